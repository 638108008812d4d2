#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magtrace/errors.hpp"
#include "magtrace/kernel_calculus.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace magtrace;
using Op = CoefficientOperator;

namespace {

// coarse grid: trapezoid is spectrally accurate for these Gaussians and an
// 81^2 twisted convolution runs in well under a second
GridSpec const coarse{12.0, 81};

Op random_sparse(std::mt19937_64& rng, int max_index, int count)
{
    std::uniform_int_distribution<int> idx(0, max_index);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Op::EntryMap entries;
    for (int i = 0; i < count; ++i) entries[{idx(rng), idx(rng)}] = Complex{val(rng), val(rng)};
    return Op(entries, OperatorClass::L1);
}

GridFunction basis_samples(GridSpec g, BasisIndex i, MagneticConfig const& cfg)
{
    return GridFunction::sample(g, [&](Point2D x) { return psi(i, x, cfg); });
}

// A psi_{n,m} = sum_k a_{n,k} psi_{k,m}
GridFunction coefficient_action(Op const& a, BasisIndex i, GridSpec g, MagneticConfig const& cfg)
{
    return GridFunction::sample(g, [&](Point2D x) {
        Complex sum{};
        for (auto const& [key, v] : a.entries()) {
            if (key.first == i.n) sum += v * psi({key.second, i.m}, x, cfg);
        }
        return sum;
    });
}

} // namespace

TEST_CASE("kernel values")
{
    auto const cfg = make_config(1.0);
    CHECK(kernel_of(Op::landau_projection(0), cfg)({0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(kernel_of(Op::transition(0, 1), cfg)({0.0, 0.0})) == 0.0);
    CHECK(std::abs(kernel_of(Op{}, cfg)({0.3, 0.1})) == 0.0);
    for (double ell : {0.5, 1.0, 2.0}) {
        auto const c = make_config(ell);
        Point2D const x{1.1, -0.4};
        double const expected = std::exp(-(x.x1 * x.x1 + x.x2 * x.x2) / (4 * ell * ell));
        CHECK(kernel_of(Op::landau_projection(0), c)(x).real() == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("trace equals kernel at zero")
{
    CHECK(kernel_at_zero(Op::landau_projection(0)).real() == doctest::Approx(1.0).epsilon(1e-14));
    auto const s = Op::landau_projection(0) + Op::transition(2, 5, 3.0);
    CHECK(std::abs(kernel_at_zero(s) - Complex{1.0}) < 1e-14);
    std::mt19937_64 rng(21);
    for (int t = 0; t < 50; ++t) {
        auto const a = random_sparse(rng, 8, 6);
        Complex tau{};
        for (auto const& [key, v] : a.entries()) if (key.first == key.second) tau += v;
        CHECK(std::abs(kernel_at_zero(a) - tau) < 1e-8);
        auto const aa = compose(adjoint(a), a);
        double const l2 = lp_norm(a, 2.0);
        CHECK(std::abs(kernel_at_zero(aa) - Complex{l2 * l2}) < 1e-8);
    }
}

TEST_CASE("apply_kernel on basis functions")
{
    auto const cfg = make_config(1.0);
    auto const phi00 = basis_samples(coarse, {0, 0}, cfg);
    auto const pi0 = Op::landau_projection(0);
    auto const out = apply_kernel(pi0, phi00, cfg);
    CHECK(out.sup_distance(phi00) <= 1e-6);
    CHECK(out.warnings.empty());
    CHECK(apply_kernel(pi0, basis_samples(coarse, {1, 0}, cfg), cfg).sup_distance(GridFunction(coarse)) <= 1e-6);
    auto const up = apply_kernel(Op::transition(0, 1), phi00, cfg);
    CHECK(up.sup_distance(basis_samples(coarse, {1, 0}, cfg)) <= 1e-6);
}

TEST_CASE("apply_kernel matches the coefficient action")
{
    auto const cfg = make_config(1.0);
    std::mt19937_64 rng(22);
    for (int t = 0; t < 3; ++t) {
        auto const a = random_sparse(rng, 2, 3);
        BasisIndex const i{static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)};
        auto const got = apply_kernel(a, basis_samples(coarse, i, cfg), cfg);
        CHECK(got.sup_distance(coefficient_action(a, i, coarse, cfg)) <= 1e-6);
    }
}

TEST_CASE("apply_kernel at another magnetic length")
{
    auto const cfg = make_config(0.7);
    GridSpec const g{12.0 * 0.7, 81};
    auto const got = apply_kernel(Op::transition(1, 0), basis_samples(g, {1, 2}, cfg), cfg);
    CHECK(got.sup_distance(basis_samples(g, {0, 2}, cfg)) <= 1e-6);
}

TEST_CASE("apply_kernel warns on a truncated grid")
{
    auto const cfg = make_config(1.0);
    GridSpec const small{3.0, 21};
    auto const out = apply_kernel(Op::landau_projection(0), basis_samples(small, {0, 0}, cfg), cfg);
    CHECK(!out.warnings.empty());
}

TEST_CASE("magnetic translations")
{
    auto const cfg = make_config(1.0);
    auto const phi = basis_samples(coarse, {1, 1}, cfg);
    CHECK(magnetic_translate({0.0, 0.0}, phi, cfg).sup_distance(phi) == 0.0);

    double const h = coarse.spacing();
    Point2D const a{2 * h, -1 * h};
    Point2D const b{3 * h, 4 * h};
    auto const lhs = magnetic_translate(a, magnetic_translate(b, phi, cfg), cfg);
    auto const rhs_shift = magnetic_translate({a.x1 + b.x1, a.x2 + b.x2}, phi, cfg);
    Complex const phase = std::exp(Complex{0.0, wedge(b, a) / 2.0});
    double worst = 0.0;
    for (int i = 0; i < coarse.nodes; ++i) {
        for (int j = 0; j < coarse.nodes; ++j) worst = std::max(worst, std::abs(lhs.at(i, j) - phase * rhs_shift.at(i, j)));
    }
    CHECK(worst <= 1e-8);

    for (Point2D off : {Point2D{0.37, -1.21}, Point2D{1.9, 0.05}}) {
        auto const moved = magnetic_translate(off, phi, cfg);
        CHECK(std::abs(moved.l2_norm() - phi.l2_norm()) <= 1e-8);
        // off-lattice samples against the closed form
        auto const exact = GridFunction::sample(coarse, [&](Point2D x) {
            return std::exp(Complex{0.0, wedge(x, off) / 2.0}) * psi({1, 1}, {x.x1 - off.x1, x.x2 - off.x2}, cfg);
        });
        CHECK(moved.sup_distance(exact) <= 1e-8);
    }
    auto const far = magnetic_translate({11.0, 0.0}, phi, cfg);
    CHECK(!far.warnings.empty());
}

TEST_CASE("commutant residuals")
{
    auto const cfg = make_config(1.0);
    auto const phi = basis_samples(coarse, {0, 0}, cfg);
    auto const pi0 = Op::landau_projection(0);
    CHECK(commutant_residual(pi0, {1.0, 0.5}, phi, cfg) <= 1e-5);
    CHECK(commutant_residual(pi0, {0.0, 0.0}, phi, cfg) <= 1e-12);
    GridOperator const x1 = [](GridFunction const& f) {
        GridFunction out = f;
        for (int i = 0; i < f.grid().nodes; ++i) {
            for (int j = 0; j < f.grid().nodes; ++j) out.at(i, j) *= f.point(i, j).x1;
        }
        return out;
    };
    CHECK(commutant_residual(x1, {1.0, 0.0}, phi, cfg) >= 0.1);
}

TEST_CASE("folner trace")
{
    auto const cfg = make_config(1.0);
    for (double r : {0.5, 3.0, 40.0}) {
        CHECK(std::abs(folner_trace(Op::landau_projection(0), r, cfg) - Complex{1.0}) <= 1e-10);
    }
    CHECK(std::abs(folner_trace(Op{}, 2.0, cfg)) == 0.0);
    auto const s = 2.0 * Op::landau_projection(0) + Op::landau_projection(1);
    CHECK(std::abs(folner_trace(s, 5.0, make_config(0.8)) - Complex{3.0}) <= 1e-10);
}

TEST_CASE("kernel pairing and norm bound")
{
    auto const cfg = make_config(1.0);
    auto const quad = QuadratureSpec::defaults(cfg);
    std::mt19937_64 rng(23);
    for (int t = 0; t < 5; ++t) {
        auto const a = random_sparse(rng, 4, 4);
        auto const b = random_sparse(rng, 4, 4);
        Complex exact{};
        for (auto const& [key, v] : a.entries()) exact += std::conj(v) * b.entry(key.first, key.second);
        CHECK(std::abs(kernel_pairing(a, b, cfg, quad) - exact) <= 1e-6);
        double const bound = std::sqrt(2.0 * std::numbers::pi) * cfg.ell() * covering_block_norm(a);
        CHECK(bound <= kernel_l2_norm(a, cfg, quad) + 1e-8);
    }
}
