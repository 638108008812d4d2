#pragma once

#include "magtrace/magnetic_core.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace magtrace {

/// Index (n, m) of the Laguerre function psi_{n,m}; n is the Landau index,
/// m the transverse one. The harmonic oscillator acts on it with eigenvalue
/// shell() = n + m + 1.
struct BasisIndex {
    int n = 0;
    int m = 0;

    int shell() const noexcept { return n + m + 1; }
    friend bool operator==(BasisIndex const&, BasisIndex const&) = default;
};

struct Point2D {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// x ^ a = x1 a2 - x2 a1
inline double wedge(Point2D x, Point2D a) noexcept { return x.x1 * a.x2 - x.x2 * a.x1; }

/// Generalized Laguerre polynomial L_n^{(alpha)}(zeta) via the three-term
/// recurrence.
double laguerre_poly(int n, double alpha, double zeta);

/// Same polynomial through the explicit alternating sum. Unstable for large n,
/// kept as a reference for small degrees.
double laguerre_poly_explicit_sum(int n, double alpha, double zeta);

/// Orthonormal Laguerre function psi_{n,m}(x).
std::complex<double> psi(BasisIndex index, Point2D x, MagneticConfig const& cfg);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int count);

/// Tensor-product Gauss-Legendre rule on [-half_width, half_width]^2.
struct QuadratureSpec {
    double half_width = 12.0;
    int nodes = 160;

    static QuadratureSpec defaults(MagneticConfig const& cfg) { return {12.0 * cfg.ell(), 160}; }
};

/// |<psi_a, psi_b> - delta_ab| for all a, b with n, m <= max_index, indexed by
/// a = n * (max_index + 1) + m. Throws ResourceError when the rule cannot
/// resolve the requested indices or the budget (max_index <= 8) is exceeded.
Eigen::MatrixXd orthonormality_check(int max_index, MagneticConfig const& cfg, QuadratureSpec const& grid);

} // namespace magtrace
