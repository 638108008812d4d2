#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magtrace/errors.hpp"
#include "magtrace/operator_algebra.hpp"

#include <cmath>
#include <random>

using namespace magtrace;
using Op = CoefficientOperator;

namespace {

Op random_sparse(std::mt19937_64& rng, int max_index, int count, OperatorClass cls = OperatorClass::L1)
{
    std::uniform_int_distribution<int> idx(0, max_index);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Op::EntryMap entries;
    for (int i = 0; i < count; ++i) {
        entries[{idx(rng), idx(rng)}] = Complex{val(rng), val(rng)};
    }
    return Op(entries, cls);
}

bool near(Op const& a, Op const& b, double tol)
{
    auto const d = a - b;
    for (auto const& [key, v] : d.entries()) {
        if (std::abs(v) > tol) return false;
    }
    return true;
}

// (AB)_{m,k} = sum_j a_{j,k} b_{m,j}, written out over a dense index box
Complex dense_compose_entry(Op const& a, Op const& b, int m, int k, int box)
{
    Complex sum{};
    for (int j = 0; j < box; ++j) sum += a.entry(j, k) * b.entry(m, j);
    return sum;
}

} // namespace

TEST_CASE("transition relations for indices up to 20")
{
    for (int j = 0; j <= 20; ++j) {
        for (int k = 0; k <= 20; ++k) {
            auto const y = Op::transition(j, k);
            CHECK(adjoint(y) == Op::transition(k, j));
            for (int m = 0; m <= 20; m += 3) {
                for (int n = 0; n <= 20; ++n) {
                    auto const prod = compose(y, Op::transition(m, n));
                    if (j == n) {
                        CHECK(prod == Op::transition(m, k));
                    } else {
                        CHECK(prod.empty());
                    }
                }
            }
        }
    }
}

TEST_CASE("compose examples")
{
    CHECK(compose(Op::transition(0, 1), Op::transition(2, 0)) == Op::transition(2, 1));
    CHECK(compose(Op::landau_projection(1), Op::landau_projection(1)) == Op::landau_projection(1));
    CHECK(compose(Op::landau_projection(1), Op::landau_projection(2)).empty());
}

TEST_CASE("adjoint examples")
{
    auto const a = Op(Op::EntryMap{{{2, 2}, Complex{0, 1}}});
    CHECK(adjoint(a).entry(2, 2) == Complex{0, -1});
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        auto const r = random_sparse(rng, 6, 8);
        CHECK(adjoint(adjoint(r)) == r);
    }
}

TEST_CASE("compose against a dense oracle and the adjoint pairing formula")
{
    std::mt19937_64 rng(12);
    for (int t = 0; t < 40; ++t) {
        auto const a = random_sparse(rng, 5, 7);
        auto const b = random_sparse(rng, 5, 7);
        auto const ab = compose(a, b);
        auto const s = compose(adjoint(a), b);
        for (int m = 0; m < 6; ++m) {
            for (int k = 0; k < 6; ++k) {
                CHECK(std::abs(ab.entry(m, k) - dense_compose_entry(a, b, m, k, 6)) < 1e-14);
                Complex expected{};
                for (int n = 0; n < 6; ++n) expected += std::conj(a.entry(k, n)) * b.entry(m, n);
                CHECK(std::abs(s.entry(m, k) - expected) < 1e-14);
            }
        }
    }
}

TEST_CASE("associativity and adjoint of products")
{
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        auto const a = random_sparse(rng, 6, 6);
        auto const b = random_sparse(rng, 6, 6);
        auto const c = random_sparse(rng, 6, 6);
        CHECK(near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-13));
        CHECK(near(adjoint(compose(a, b)), compose(adjoint(b), adjoint(a)), 1e-14));
    }
}

TEST_CASE("lp norms")
{
    CHECK(lp_norm(Op::landau_projection(0), 1.0) == 1.0);
    auto const a = Op::transition(0, 1) + Op::transition(3, 2, 2.0);
    CHECK(lp_norm(a, 2.0) == doctest::Approx(std::sqrt(5.0)));
    CHECK(lp_norm(a, INFINITY) == 2.0);
    CHECK(lp_norm(Op{}, 3.0) == 0.0);
    CHECK_THROWS_AS(lp_norm(a, 0.5), DomainError);
}

TEST_CASE("no identity")
{
    CHECK_THROWS_AS(make_identity(), DomainError);
}

TEST_CASE("entries must be finite; zeros are dropped")
{
    CHECK_THROWS_AS(Op(Op::EntryMap{{{0, 0}, Complex{NAN, 0}}}), DomainError);
    CHECK(Op(Op::EntryMap{{{0, 0}, 0.0}}).empty());
    CHECK((Op::landau_projection(0) - Op::landau_projection(0)).empty());
}

TEST_CASE("matrix blocks")
{
    auto const b = matrix_block(Op::transition(0, 1), 0, 2);
    CHECK(b.matrix(1, 0) == Complex{1.0});
    CHECK(b.matrix(0, 1) == Complex{0.0});
    CHECK(b.matrix(0, 0) == Complex{0.0});

    auto const q = matrix_block(DiagonalWeight::q_power(1.0, 0.0), 3, 2);
    CHECK(q.matrix(0, 0).real() == doctest::Approx(0.25));
    CHECK(q.matrix(1, 1).real() == doctest::Approx(0.2));
    CHECK(q.matrix(0, 1) == Complex{0.0});

    auto const mp = matrix_block(DiagonalWeight::m_power(2.0), 4, 3);
    CHECK(mp.matrix.isApprox(25.0 * Eigen::MatrixXcd::Identity(3, 3)));

    std::mt19937_64 rng(14);
    auto const r = random_sparse(rng, 4, 9);
    CHECK(matrix_block(r, 0, 6).matrix == matrix_block(r, 5, 6).matrix);
}

TEST_CASE("weighted products")
{
    auto const pi0 = Op::landau_projection(0);
    for (int m : {0, 3, 9}) {
        auto const left = matrix_block(weighted_product(pi0, ProductForm::Left, 0.0, 0.0, 1.0), m, 2);
        CHECK(left.matrix(0, 0).real() == doctest::Approx(1.0 / (m + 1)));
        CHECK(std::abs(left.matrix(1, 1)) == 0.0);
        auto const split = matrix_block(weighted_product(pi0, ProductForm::Split, 0.0, 0.0, 1.0), m, 2);
        CHECK(split.matrix.isApprox(left.matrix, 1e-15));
    }
    CHECK_THROWS_AS(weighted_product(pi0, ProductForm::Left, -1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(weighted_product(pi0, ProductForm::Split, 0.0, -2.0, 1.0), DomainError);
    CHECK_THROWS_AS(weighted_product(pi0, ProductForm::Left, 0.0, 0.0, 0.0), DomainError);

    // right form: s_{n',n} value(n', m)
    auto const y = Op::transition(0, 1, 3.0);
    auto const right = weighted_product(y, ProductForm::Right, 0.5, 0.5, 2.0);
    CHECK(right.block_entry(1, 0, 2).real() == doctest::Approx(3.0 * std::pow(0 + 2 + 1 + 0.5, -2.0)));
    auto const left = weighted_product(y, ProductForm::Left, 0.5, 0.5, 2.0);
    CHECK(left.block_entry(1, 0, 2).real() == doctest::Approx(3.0 * std::pow(1 + 2 + 1 + 0.5, -2.0)));
    auto const split = weighted_product(y, ProductForm::Split, 0.5, 1.5, 2.0);
    CHECK(split.block_entry(1, 0, 2).real()
          == doctest::Approx(3.0 * std::pow(1 + 2 + 1 + 0.5, -1.0) * std::pow(0 + 2 + 1 + 1.5, -1.0)));
}

TEST_CASE("cyclic trace at truncation")
{
    std::mt19937_64 rng(15);
    auto const w = DiagonalWeight::q_power(1.5, 0.3);
    for (int t = 0; t < 20; ++t) {
        auto const a = random_sparse(rng, 4, 6);
        auto const b = random_sparse(rng, 4, 6);
        Complex lhs{};
        Complex rhs{};
        for (int m = 0; m <= 30; ++m) {
            auto const wb = matrix_block(w, m, 5).matrix;
            auto const ab = matrix_block(a, m, 5).matrix;
            auto const bb = matrix_block(b, m, 5).matrix;
            lhs += (wb * ab * bb).trace();
            rhs += (bb * wb * ab).trace();
        }
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("absorption product")
{
    std::mt19937_64 rng(16);
    auto const t = random_sparse(rng, 4, 10, OperatorClass::Unclassified);
    auto const pi0 = Op::landau_projection(0);
    CHECK(absorb_product(pi0, t, pi0) == Op(Op::EntryMap{{{0, 0}, t.entry(0, 0)}}));
    auto const pi1 = Op::landau_projection(1);
    Complex const c{0.3, -2.0};
    CHECK(absorb_product(pi1, Op::transition(1, 1, c), pi1) == Op(Op::EntryMap{{{1, 1}, c}}));
    CHECK_THROWS_AS(absorb_product(pi0.with_class(OperatorClass::L2), t, pi0), DomainError);

    for (int trial = 0; trial < 100; ++trial) {
        auto const a1 = random_sparse(rng, 5, 5);
        auto const tt = random_sparse(rng, 5, 8, OperatorClass::Unclassified);
        auto const a2 = random_sparse(rng, 5, 5);
        // kappa is the coefficient family of A1 T A2 in compose order
        CHECK(near(absorb_product(a1, tt, a2), compose(compose(a1, tt), a2), 1e-13));
        CHECK(absorption_bound(a1, tt, a2).margin >= 0.0);
    }
}

TEST_CASE("entry bound")
{
    auto const y = coefficient_bound_check(Op::transition(0, 1), 0);
    CHECK(y.max_entry == 1.0);
    CHECK(y.block_norm == doctest::Approx(1.0));
    CHECK(std::abs(y.margin) < 1e-14);
    auto const p = coefficient_bound_check(Op::landau_projection(0) + Op::landau_projection(1), 4);
    CHECK(p.max_entry == 1.0);
    CHECK(p.block_norm == doctest::Approx(1.0));
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        CHECK(coefficient_bound_check(random_sparse(rng, 6, 12), 8).margin >= 0.0);
    }
}

TEST_CASE("hilbert-schmidt kernel norms")
{
    auto const pi0 = Op::landau_projection(0);
    auto const r1 = hs_kernel_norm(DiagonalWeight::m_power(-1.0), pi0, 50);
    double expected = 0.0;
    for (int m = 0; m <= 50; ++m) expected += 1.0 / ((m + 1.0) * (m + 1.0));
    CHECK(r1.partial_norm == doctest::Approx(std::sqrt(expected)));
    CHECK(r1.tail == TailConvergence::Convergent);
    CHECK(hs_kernel_norm(DiagonalWeight::m_power(-0.4), pi0, 10).tail == TailConvergence::Divergent);
    CHECK(hs_kernel_norm(DiagonalWeight::q_power(1.0, 0.0), pi0, 10).tail == TailConvergence::Convergent);
    auto const mixed = DiagonalWeight::m_power(0.6) * DiagonalWeight::q_power(1.0, 0.0);
    CHECK(hs_kernel_norm(mixed, pi0, 10).tail == TailConvergence::Divergent);
}

TEST_CASE("class names round-trip")
{
    for (auto c : {OperatorClass::L1, OperatorClass::L2, OperatorClass::Itau}) {
        CHECK(operator_class_from_string(to_string(c)) == c);
    }
    CHECK_THROWS_AS(operator_class_from_string("L7"), DomainError);
    for (auto f : {ProductForm::Left, ProductForm::Right, ProductForm::Split}) {
        CHECK(product_form_from_string(to_string(f)) == f);
    }
}
