#include "magtrace/laguerre_basis.hpp"

#include "magtrace/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace magtrace {

double laguerre_poly(int n, double alpha, double zeta)
{
    if (n < 0) {
        throw DomainError("Laguerre degree must be non-negative");
    }
    if (!std::isfinite(alpha) || !std::isfinite(zeta)) {
        throw DomainError("Laguerre arguments must be finite");
    }
    double prev = 1.0;
    if (n == 0) {
        return prev;
    }
    double curr = 1.0 + alpha - zeta;
    for (int k = 2; k <= n; ++k) {
        double const next = ((2.0 * k - 1.0 + alpha - zeta) * curr - (k - 1.0 + alpha) * prev) / k;
        prev = curr;
        curr = next;
    }
    return curr;
}

double laguerre_poly_explicit_sum(int n, double alpha, double zeta)
{
    if (n < 0) {
        throw DomainError("Laguerre degree must be non-negative");
    }
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) {
        // (alpha+n)(alpha+n-1)...(alpha+j+1) / (j! (n-j)!)
        double term = 1.0;
        for (int i = j + 1; i <= n; ++i) {
            term *= alpha + i;
        }
        term /= std::tgamma(j + 1.0) * std::tgamma(n - j + 1.0);
        sum += term * std::pow(-zeta, j);
    }
    return sum;
}

std::complex<double> psi(BasisIndex index, Point2D x, MagneticConfig const& cfg)
{
    if (index.n < 0 || index.m < 0) {
        throw DomainError("Laguerre basis indices must be non-negative");
    }
    if (!std::isfinite(x.x1) || !std::isfinite(x.x2)) {
        throw DomainError("evaluation point must be finite");
    }
    double const ell = cfg.ell();
    double const r2 = x.x1 * x.x1 + x.x2 * x.x2;
    double const rho = r2 / (2.0 * ell * ell);

    // psi_{n,m} = psi_0 sqrt(n!/m!) w^{m-n} L_n^{(m-n)}(|w|^2), w = (x1 - i x2)/(ell sqrt 2).
    // For m < n the reflection L_n^{(-k)}(r) = (-r)^k (n-k)!/n! L_{n-k}^{(k)}(r) gives
    // psi_{n,m} = psi_0 (-1)^{n-m} sqrt(m!/n!) conj(w)^{n-m} L_m^{(n-m)}(|w|^2).
    int const lo = std::min(index.n, index.m);
    int const hi = std::max(index.n, index.m);
    int const power = hi - lo;

    double const poly = laguerre_poly(lo, static_cast<double>(power), rho);
    if (poly == 0.0) {
        return {0.0, 0.0};
    }
    if (power > 0 && r2 == 0.0) {
        return {0.0, 0.0};
    }

    // log of psi_0(x) * sqrt(lo!/hi!) * |w|^power
    double log_mag = -r2 / (4.0 * ell * ell) - std::log(std::sqrt(2.0 * std::numbers::pi) * ell)
        + 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0));
    if (power > 0) {
        log_mag += 0.5 * power * std::log(rho);
    }
    double const theta = std::atan2(x.x2, x.x1);
    // w has argument -theta; conj(w) has argument +theta
    double const phase = (index.m >= index.n) ? -power * theta : power * theta;
    double magnitude = std::exp(log_mag) * poly;
    if (index.m < index.n && (power % 2 == 1)) {
        magnitude = -magnitude;
    }
    return std::polar(1.0, phase) * magnitude;
}

GaussLegendreRule gauss_legendre(int count)
{
    if (count < 1) {
        throw ResourceError("Gauss-Legendre rule needs at least one node");
    }
    GaussLegendreRule rule;
    rule.nodes.resize(count);
    rule.weights.resize(count);
    int const half = (count + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 1; k <= count; ++k) {
                double const p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = count * (z * p0 - p1) / (z * z - 1.0);
            double const dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) {
                break;
            }
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = 0.0;
        for (int k = 1; k <= count; ++k) {
            double const p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = count * (z * p0 - p1) / (z * z - 1.0);
        double const w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[count - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[count - 1 - i] = w;
    }
    if (count % 2 == 1) {
        rule.nodes[count / 2] = 0.0;
    }
    return rule;
}

Eigen::MatrixXd orthonormality_check(int max_index, MagneticConfig const& cfg, QuadratureSpec const& grid)
{
    if (max_index < 0) {
        throw DomainError("max_index must be non-negative");
    }
    if (max_index > 8) {
        throw ResourceError("orthonormality check budget covers indices up to 8, requested "
                            + std::to_string(max_index));
    }
    int const min_nodes = 4 * max_index + 16;
    if (grid.nodes < min_nodes || !(grid.half_width > 0.0)) {
        throw ResourceError("quadrature with " + std::to_string(grid.nodes) + " nodes per axis cannot resolve indices up to "
                            + std::to_string(max_index) + " (need at least " + std::to_string(min_nodes) + ")");
    }

    auto const rule = gauss_legendre(grid.nodes);
    int const per_axis = grid.nodes;
    int const points = per_axis * per_axis;
    int const side = max_index + 1;
    int const functions = side * side;

    Eigen::MatrixXcd samples(points, functions);
    Eigen::VectorXd weights(points);
    for (int a = 0; a < per_axis; ++a) {
        for (int b = 0; b < per_axis; ++b) {
            int const p = a * per_axis + b;
            Point2D const x{grid.half_width * rule.nodes[a], grid.half_width * rule.nodes[b]};
            weights(p) = grid.half_width * grid.half_width * rule.weights[a] * rule.weights[b];
            for (int n = 0; n < side; ++n) {
                for (int m = 0; m < side; ++m) {
                    samples(p, n * side + m) = psi({n, m}, x, cfg);
                }
            }
        }
    }
    Eigen::MatrixXcd const gram = samples.adjoint() * weights.asDiagonal() * samples;
    Eigen::MatrixXd errors = (gram - Eigen::MatrixXcd::Identity(functions, functions)).cwiseAbs();
    return errors;
}

} // namespace magtrace
