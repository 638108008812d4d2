#pragma once

#include "magtrace/laguerre_basis.hpp"
#include "magtrace/magnetic_core.hpp"
#include "magtrace/operator_algebra.hpp"

#include <functional>
#include <string>
#include <vector>

namespace magtrace {

/// Twisted-convolution kernel f_A = sqrt(2 pi) ell sum (-1)^{j-k} a_{j,k} psi_{k,j}.
class KernelFunction {
public:
    KernelFunction(CoefficientOperator source, MagneticConfig cfg);

    Complex operator()(Point2D x) const;
    /// Integral kernel K(x, y) = f_A(y - x) e^{i x^y / 2 ell^2} / (2 pi ell^2).
    Complex integral_kernel(Point2D x, Point2D y) const;

    CoefficientOperator const& source() const noexcept { return source_; }
    MagneticConfig const& config() const noexcept { return cfg_; }
    int truncation() const noexcept { return source_.max_index() + 1; }

private:
    CoefficientOperator source_;
    MagneticConfig cfg_;
};

KernelFunction kernel_of(CoefficientOperator const& a, MagneticConfig const& cfg);

/// f_S(0), summed from the kernel series.
Complex kernel_at_zero(CoefficientOperator const& s, MagneticConfig const& cfg = make_config(1.0));

/// Uniform grid with `nodes` points per axis spanning [-half_width, half_width]
/// including both ends.
struct GridSpec {
    double half_width = 12.0;
    int nodes = 256;

    static GridSpec defaults(MagneticConfig const& cfg) { return {12.0 * cfg.ell(), 256}; }
    double spacing() const noexcept { return 2.0 * half_width / (nodes - 1); }
    double coord(int i) const noexcept { return -half_width + i * spacing(); }
};

/// Complex samples on a GridSpec, stored row-major with x1 as the slow index.
class GridFunction {
public:
    explicit GridFunction(GridSpec grid);

    static GridFunction sample(GridSpec grid, std::function<Complex(Point2D)> const& fn);

    GridSpec const& grid() const noexcept { return grid_; }
    Complex& at(int i, int j) { return samples_[static_cast<std::size_t>(i) * grid_.nodes + j]; }
    Complex at(int i, int j) const { return samples_[static_cast<std::size_t>(i) * grid_.nodes + j]; }
    Point2D point(int i, int j) const { return {grid_.coord(i), grid_.coord(j)}; }
    std::vector<Complex> const& samples() const noexcept { return samples_; }

    /// Discrete L2 norm with weight spacing^2.
    double l2_norm() const;
    double sup_distance(GridFunction const& other) const;
    GridFunction operator-(GridFunction const& other) const;

    /// Resource warnings attached by the operation that produced this function.
    std::vector<std::string> warnings;

private:
    GridSpec grid_;
    std::vector<Complex> samples_;
};

/// Trapezoid realisation of (A phi)(x) = (1/2 pi ell^2) int f_A(y-x) e^{i x^y/2ell^2} phi(y) dy.
GridFunction apply_kernel(CoefficientOperator const& s, GridFunction const& phi, MagneticConfig const& cfg);

/// (V(a) phi)(x) = e^{i x^a / 2 ell^2} phi(x - a); off-lattice shifts use
/// trigonometric interpolation along each axis.
GridFunction magnetic_translate(Point2D a, GridFunction const& phi, MagneticConfig const& cfg);

using GridOperator = std::function<GridFunction(GridFunction const&)>;

/// ||(S V(a) - V(a) S) phi|| / ||phi||
double commutant_residual(GridOperator const& s, Point2D a, GridFunction const& phi, MagneticConfig const& cfg);
double commutant_residual(CoefficientOperator const& s, Point2D a, GridFunction const& phi,
                          MagneticConfig const& cfg);

/// (Omega/2) |Lambda|^{-1} int_Lambda K_S(x, x) dx over Lambda = [-R, R]^2.
Complex folner_trace(CoefficientOperator const& s, double half_width, MagneticConfig const& cfg);

/// (1/2 pi ell^2) <f_A, f_B> by tensor Gauss-Legendre quadrature.
Complex kernel_pairing(CoefficientOperator const& a, CoefficientOperator const& b, MagneticConfig const& cfg,
                       QuadratureSpec const& quad);
/// ||f_A||_{L2} by the same quadrature.
double kernel_l2_norm(CoefficientOperator const& a, MagneticConfig const& cfg, QuadratureSpec const& quad);

} // namespace magtrace
