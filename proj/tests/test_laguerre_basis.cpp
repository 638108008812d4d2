#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magtrace/errors.hpp"
#include "magtrace/laguerre_basis.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace magtrace;

namespace {
double const inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// brute-force overlap of two basis functions by a plain Riemann sum
std::complex<double> riemann_overlap(BasisIndex a, BasisIndex b, MagneticConfig const& cfg)
{
    double const h = 0.05;
    std::complex<double> sum{};
    for (double x1 = -10.0; x1 <= 10.0; x1 += h) {
        for (double x2 = -10.0; x2 <= 10.0; x2 += h) {
            sum += std::conj(psi(a, {x1, x2}, cfg)) * psi(b, {x1, x2}, cfg);
        }
    }
    return sum * h * h;
}
} // namespace

TEST_CASE("laguerre polynomial small cases")
{
    CHECK(laguerre_poly(0, 3.7, 10.0) == 1.0);
    CHECK(laguerre_poly(1, 0.0, 2.0) == doctest::Approx(-1.0));
    CHECK(laguerre_poly(2, 1.0, 0.0) == doctest::Approx(3.0));
    // L_2^{(0)}(z) = 1 - 2z + z^2/2
    CHECK(laguerre_poly(2, 0.0, 3.0) == doctest::Approx(1.0 - 6.0 + 4.5));
}

TEST_CASE("recurrence against the explicit sum")
{
    for (int n = 0; n <= 12; ++n) {
        for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
            for (double zeta = 0.0; zeta <= 20.0; zeta += 0.5) {
                double const rec = laguerre_poly(n, alpha, zeta);
                double const sum = laguerre_poly_explicit_sum(n, alpha, zeta);
                // the alternating sum cancels; scale by its absolute terms
                double scale = 0.0;
                for (int k = 0; k <= n; ++k) {
                    double const binom =
                        std::tgamma(n + alpha + 1.0) / (std::tgamma(n - k + 1.0) * std::tgamma(alpha + k + 1.0));
                    scale += std::abs(binom) * std::pow(zeta, k) / std::tgamma(k + 1.0);
                }
                CHECK(std::abs(rec - sum) <= 1e-13 * (1.0 + scale));
            }
        }
    }
}

TEST_CASE("psi point values")
{
    auto const cfg = make_config(1.0);
    auto const v00 = psi({0, 0}, {0.0, 0.0}, cfg);
    CHECK(v00.real() == doctest::Approx(inv_sqrt_2pi).epsilon(1e-14));
    CHECK(v00.imag() == 0.0);
    CHECK(std::abs(psi({1, 0}, {0.0, 0.0}, cfg)) == 0.0);
    CHECK(psi({0, 0}, {2.0, 0.0}, cfg).real() == doctest::Approx(std::exp(-1.0) * inv_sqrt_2pi).epsilon(1e-14));
}

TEST_CASE("psi_{n,m} = (-1)^{n-m} conj(psi_{m,n})")
{
    auto const cfg = make_config(1.3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        int const n = static_cast<int>(rng() % 9);
        int const m = static_cast<int>(rng() % 9);
        Point2D const x{coord(rng), coord(rng)};
        auto const a = psi({n, m}, x, cfg);
        auto const b = std::conj(psi({m, n}, x, cfg));
        double const sign = ((n - m) % 2 == 0) ? 1.0 : -1.0;
        CHECK(std::abs(a - sign * b) <= 1e-13 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("psi_{0,0} is the Gaussian at any length")
{
    for (double ell : {0.5, 1.0, 2.0}) {
        auto const cfg = make_config(ell);
        Point2D const x{0.7, -1.1};
        double const expected = std::exp(-(x.x1 * x.x1 + x.x2 * x.x2) / (4 * ell * ell)) * inv_sqrt_2pi / ell;
        CHECK(psi({0, 0}, x, cfg).real() == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("gaussian decay")
{
    // at exactly 12 ell, n+m = 6 sits just above 1e-12 (psi_{6,0} ~ 1.29e-12)
    for (double ell : {1.0, 0.6}) {
        auto const cfg = make_config(ell);
        for (int n = 0; n <= 6; ++n) {
            for (int m = 0; n + m <= 6; ++m) {
                for (double angle = 0.0; angle < 6.3; angle += 0.7) {
                    for (double r : {12.0, 13.0, 15.0, 30.0}) {
                        Point2D const x{r * ell * std::cos(angle), r * ell * std::sin(angle)};
                        double const v = std::abs(psi({n, m}, x, cfg)) * ell;
                        // |L_k^a(t)| <= sum_j C(k+a, k-j) t^j / j!; psi carries t^{|n-m|/2} e^{-t/2}, t = r^2/2
                        int const k = std::min(n, m);
                        int const a = std::abs(n - m);
                        double const t = r * r / 2.0;
                        double lag = 0.0;
                        for (int j = 0; j <= k; ++j) {
                            lag += std::tgamma(k + a + 1.0) / (std::tgamma(k - j + 1.0) * std::tgamma(a + j + 1.0)) *
                                   std::pow(t, j) / std::tgamma(j + 1.0);
                        }
                        double const bound = std::sqrt(std::tgamma(k + 1.0) / std::tgamma(k + a + 1.0)) * lag *
                                             std::pow(t, a / 2.0) * std::exp(-t / 2.0) * inv_sqrt_2pi;
                        CHECK(v <= bound * (1.0 + 1e-12));
                        if (r >= 13.0 || n + m <= 4) CHECK(v < 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("large indices stay finite")
{
    auto const cfg = make_config(1.0);
    for (int n : {150, 170, 200}) {
        auto const v = psi({n, 3}, {5.0, 2.0}, cfg);
        CHECK(std::isfinite(v.real()));
        CHECK(std::isfinite(v.imag()));
        auto const w = psi({3, n}, {5.0, 2.0}, cfg);
        CHECK(std::isfinite(std::abs(w)));
    }
}

TEST_CASE("gauss-legendre integrates polynomials exactly")
{
    auto const rule = gauss_legendre(10);
    double sum_w = 0.0;
    double sum_x18 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum_w += rule.weights[i];
        sum_x18 += rule.weights[i] * std::pow(rule.nodes[i], 18);
    }
    CHECK(sum_w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sum_x18 == doctest::Approx(2.0 / 19.0).epsilon(1e-13));
}

TEST_CASE("orthonormality by quadrature")
{
    auto const cfg = make_config(1.0);
    auto const quad = QuadratureSpec::defaults(cfg);
    auto const single = orthonormality_check(0, cfg, quad);
    REQUIRE(single.rows() == 1);
    CHECK(single(0, 0) <= 1e-10);
    auto const dev = orthonormality_check(4, cfg, quad);
    CHECK(dev.rows() == 25);
    CHECK(dev.maxCoeff() <= 1e-8);
}

TEST_CASE("orthonormality at another length")
{
    auto const cfg = make_config(0.6);
    auto const dev = orthonormality_check(3, cfg, QuadratureSpec::defaults(cfg));
    CHECK(dev.maxCoeff() <= 1e-8);
}

TEST_CASE("independent riemann-sum overlaps")
{
    auto const cfg = make_config(1.0);
    CHECK(std::abs(riemann_overlap({1, 2}, {1, 2}, cfg) - 1.0) < 1e-8);
    CHECK(std::abs(riemann_overlap({1, 2}, {2, 1}, cfg)) < 1e-8);
    CHECK(std::abs(riemann_overlap({0, 3}, {1, 3}, cfg)) < 1e-8);
}

TEST_CASE("quadrature budget")
{
    auto const cfg = make_config(1.0);
    CHECK_THROWS_AS(orthonormality_check(2, cfg, QuadratureSpec{12.0, 1}), ResourceError);
    CHECK_THROWS_AS(orthonormality_check(9, cfg, QuadratureSpec::defaults(cfg)), ResourceError);
}
