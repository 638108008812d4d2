#include "magtrace/kernel_calculus.hpp"

#include "magtrace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace magtrace {

KernelFunction::KernelFunction(CoefficientOperator source, MagneticConfig cfg)
    : source_(std::move(source)), cfg_(cfg)
{
}

Complex KernelFunction::operator()(Point2D x) const
{
    Complex sum{};
    for (auto const& [key, value] : source_.entries()) {
        auto const [j, k] = key;
        double const sign = ((j - k) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * value * psi({k, j}, x, cfg_);
    }
    return std::sqrt(2.0 * std::numbers::pi) * cfg_.ell() * sum;
}

Complex KernelFunction::integral_kernel(Point2D x, Point2D y) const
{
    double const ell2 = cfg_.ell() * cfg_.ell();
    Complex const f = (*this)({y.x1 - x.x1, y.x2 - x.x2});
    return f * std::polar(1.0, wedge(x, y) / (2.0 * ell2)) / (2.0 * std::numbers::pi * ell2);
}

KernelFunction kernel_of(CoefficientOperator const& a, MagneticConfig const& cfg)
{
    return KernelFunction(a, cfg);
}

Complex kernel_at_zero(CoefficientOperator const& s, MagneticConfig const& cfg)
{
    return kernel_of(s, cfg)({0.0, 0.0});
}

// --- grids ------------------------------------------------------------------

GridFunction::GridFunction(GridSpec grid)
    : grid_(grid)
{
    if (grid.nodes < 2 || !(grid.half_width > 0.0)) {
        throw ResourceError("grid needs at least two nodes per axis and a positive extent");
    }
    samples_.assign(static_cast<std::size_t>(grid.nodes) * grid.nodes, Complex{});
}

GridFunction GridFunction::sample(GridSpec grid, std::function<Complex(Point2D)> const& fn)
{
    GridFunction g(grid);
    for (int i = 0; i < grid.nodes; ++i) {
        for (int j = 0; j < grid.nodes; ++j) {
            g.at(i, j) = fn(g.point(i, j));
        }
    }
    return g;
}

double GridFunction::l2_norm() const
{
    double sum = 0.0;
    for (auto const& v : samples_) {
        sum += std::norm(v);
    }
    return std::sqrt(sum) * grid_.spacing();
}

double GridFunction::sup_distance(GridFunction const& other) const
{
    if (other.grid_.nodes != grid_.nodes || other.grid_.half_width != grid_.half_width) {
        throw DomainError("grid functions live on different grids");
    }
    double sup = 0.0;
    for (std::size_t p = 0; p < samples_.size(); ++p) {
        sup = std::max(sup, std::abs(samples_[p] - other.samples_[p]));
    }
    return sup;
}

GridFunction GridFunction::operator-(GridFunction const& other) const
{
    if (other.grid_.nodes != grid_.nodes || other.grid_.half_width != grid_.half_width) {
        throw DomainError("grid functions live on different grids");
    }
    GridFunction diff(grid_);
    for (std::size_t p = 0; p < samples_.size(); ++p) {
        diff.samples_[p] = samples_[p] - other.samples_[p];
    }
    return diff;
}

namespace {

double max_abs(std::vector<Complex> const& v)
{
    double m = 0.0;
    for (auto const& z : v) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

double boundary_max(GridFunction const& g)
{
    int const n = g.grid().nodes;
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        m = std::max({m, std::abs(g.at(i, 0)), std::abs(g.at(i, n - 1)), std::abs(g.at(0, i)),
                      std::abs(g.at(n - 1, i))});
    }
    return m;
}

} // namespace

GridFunction apply_kernel(CoefficientOperator const& s, GridFunction const& phi, MagneticConfig const& cfg)
{
    GridSpec const grid = phi.grid();
    int const n = grid.nodes;
    double const h = grid.spacing();
    double const ell2 = cfg.ell() * cfg.ell();
    KernelFunction const f = kernel_of(s, cfg);

    GridFunction out(grid);
    if (s.empty()) {
        return out;
    }

    // kernel on the difference lattice d = (d1, d2) h, |d_i| < n
    int const width = 2 * n - 1;
    std::vector<Complex> lattice(static_cast<std::size_t>(width) * width);
    for (int d1 = -(n - 1); d1 <= n - 1; ++d1) {
        for (int d2 = -(n - 1); d2 <= n - 1; ++d2) {
            lattice[static_cast<std::size_t>(d1 + n - 1) * width + (d2 + n - 1)] = f({d1 * h, d2 * h});
        }
    }
    double const lattice_max = max_abs(lattice);
    std::vector<char> lattice_row_live(width, 0);
    for (int r = 0; r < width; ++r) {
        for (int c = 0; c < width; ++c) {
            if (std::abs(lattice[static_cast<std::size_t>(r) * width + c]) > 1e-17 * lattice_max) {
                lattice_row_live[r] = 1;
                break;
            }
        }
    }

    // phase table E[i][l] = exp(i c_i c_l / 2 ell^2); the twist e^{i x^y/2ell^2}
    // factors as E[i][l] conj(E[j][k]) for x = (c_i, c_j), y = (c_k, c_l)
    std::vector<Complex> phase(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) {
            phase[static_cast<std::size_t>(i) * n + l] = std::polar(1.0, grid.coord(i) * grid.coord(l) / (2.0 * ell2));
        }
    }

    double const phi_max = max_abs(phi.samples());
    std::vector<char> phi_row_live(n, 0);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (std::abs(phi.at(k, l)) > 1e-17 * phi_max) {
                phi_row_live[k] = 1;
                break;
            }
        }
    }

    double const scale = h * h / (2.0 * std::numbers::pi * ell2);
    std::vector<Complex> twisted(static_cast<std::size_t>(n) * n);
    std::vector<Complex> inner(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l) {
                twisted[static_cast<std::size_t>(k) * n + l] = phase[static_cast<std::size_t>(i) * n + l] * phi.at(k, l);
            }
        }
        std::fill(inner.begin(), inner.end(), Complex{});
        for (int k = 0; k < n; ++k) {
            int const row = k - i + n - 1;
            if (!phi_row_live[k] || !lattice_row_live[row]) {
                continue;
            }
            Complex const* frow = &lattice[static_cast<std::size_t>(row) * width];
            Complex const* grow = &twisted[static_cast<std::size_t>(k) * n];
            for (int j = 0; j < n; ++j) {
                // sum_l F[k-i][l-j] G[k][l]
                Complex acc{};
                Complex const* fshift = frow + (n - 1 - j);
                for (int l = 0; l < n; ++l) {
                    acc += fshift[l] * grow[l];
                }
                out.at(i, j) += std::conj(phase[static_cast<std::size_t>(j) * n + k]) * acc;
            }
        }
        for (int j = 0; j < n; ++j) {
            out.at(i, j) *= scale;
        }
    }

    if (boundary_max(phi) > 1e-8 * std::max(phi_max, 1e-300)) {
        out.warnings.emplace_back("input function is not decayed at the grid boundary");
    }
    double kernel_edge = 0.0;
    for (double t : {-grid.half_width, grid.half_width}) {
        kernel_edge = std::max({kernel_edge, std::abs(f({t, 0.0})), std::abs(f({0.0, t}))});
    }
    if (kernel_edge > 1e-8 * std::max(lattice_max, 1e-300)) {
        out.warnings.emplace_back("kernel support exceeds the grid half-width");
    }
    if (h > 0.5 * cfg.ell()) {
        out.warnings.emplace_back("grid spacing exceeds ell/2; quadrature may be under-resolved");
    }
    return out;
}

namespace {

/// Row p of the trigonometric interpolation operator for a shift by u nodes:
/// value at node p of phi(. - u h) = sum_q D(p - q - u) phi_q.
std::vector<Complex> shift_kernel(int n, double u)
{
    // D(t) = (1/n) [sum_{|k| <= K} e^{2 pi i k t/n} + (n even) cos(pi t)], K = ceil(n/2) - 1
    int const kmax = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
    std::vector<Complex> d(2 * n - 1);
    for (int delta = -(n - 1); delta <= n - 1; ++delta) {
        double const t = delta - u;
        Complex sum = 1.0;
        for (int k = 1; k <= kmax; ++k) {
            sum += 2.0 * std::cos(2.0 * std::numbers::pi * k * t / n);
        }
        if (n % 2 == 0) {
            sum += std::cos(std::numbers::pi * t);
        }
        d[delta + n - 1] = sum / static_cast<double>(n);
    }
    return d;
}

} // namespace

GridFunction magnetic_translate(Point2D a, GridFunction const& phi, MagneticConfig const& cfg)
{
    GridSpec const grid = phi.grid();
    int const n = grid.nodes;
    double const h = grid.spacing();
    double const ell2 = cfg.ell() * cfg.ell();

    GridFunction out(grid);
    if (a.x1 == 0.0 && a.x2 == 0.0) {
        out = phi;
        out.warnings.clear();
        return out;
    }

    auto const d1 = shift_kernel(n, a.x1 / h);
    auto const d2 = shift_kernel(n, a.x2 / h);

    // shift along x1 (first index) then x2 (second index)
    std::vector<Complex> tmp(static_cast<std::size_t>(n) * n);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            Complex const w = d1[p - q + n - 1];
            if (w == Complex{}) continue;
            for (int j = 0; j < n; ++j) {
                tmp[static_cast<std::size_t>(p) * n + j] += w * phi.at(q, j);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < n; ++p) {
            Complex acc{};
            for (int q = 0; q < n; ++q) {
                acc += d2[p - q + n - 1] * tmp[static_cast<std::size_t>(i) * n + q];
            }
            out.at(i, p) = acc;
        }
    }

    // nodes whose preimage x - a lies outside the box carry no data
    double const tol = 1e-9 * h;
    double const phi_max = max_abs(phi.samples());
    double lost = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Point2D const x = out.point(i, j);
            Point2D const pre{x.x1 - a.x1, x.x2 - a.x2};
            if (std::abs(pre.x1) > grid.half_width + tol || std::abs(pre.x2) > grid.half_width + tol) {
                out.at(i, j) = 0.0;
            } else {
                out.at(i, j) *= std::polar(1.0, wedge(x, a) / (2.0 * ell2));
            }
            // input nodes pushed out of the box
            Point2D const y = phi.point(i, j);
            if (std::abs(y.x1 + a.x1) > grid.half_width + tol || std::abs(y.x2 + a.x2) > grid.half_width + tol) {
                lost = std::max(lost, std::abs(phi.at(i, j)));
            }
        }
    }
    if (lost > 1e-8 * std::max(phi_max, 1e-300)) {
        out.warnings.emplace_back("translated support clipped by the grid");
    }
    return out;
}

double commutant_residual(GridOperator const& s, Point2D a, GridFunction const& phi, MagneticConfig const& cfg)
{
    double const norm = phi.l2_norm();
    if (norm == 0.0) {
        return 0.0;
    }
    GridFunction const sv = s(magnetic_translate(a, phi, cfg));
    GridFunction const vs = magnetic_translate(a, s(phi), cfg);
    return (sv - vs).l2_norm() / norm;
}

double commutant_residual(CoefficientOperator const& s, Point2D a, GridFunction const& phi,
                          MagneticConfig const& cfg)
{
    GridOperator const op = [&](GridFunction const& g) { return apply_kernel(s, g, cfg); };
    return commutant_residual(op, a, phi, cfg);
}

Complex folner_trace(CoefficientOperator const& s, double half_width, MagneticConfig const& cfg)
{
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw DomainError("Folner box half-width must be positive");
    }
    KernelFunction const f = kernel_of(s, cfg);
    auto const rule = gauss_legendre(8);
    Complex integral{};
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            Point2D const x{half_width * rule.nodes[a], half_width * rule.nodes[b]};
            double const w = half_width * half_width * rule.weights[a] * rule.weights[b];
            integral += w * f.integral_kernel(x, x);
        }
    }
    double const volume = 4.0 * half_width * half_width;
    return 0.5 * cfg.omega_ell() * integral / volume;
}

namespace {

template <typename Visit>
void for_each_node(QuadratureSpec const& quad, Visit&& visit)
{
    if (quad.nodes < 2 || !(quad.half_width > 0.0)) {
        throw ResourceError("degenerate quadrature rule");
    }
    auto const rule = gauss_legendre(quad.nodes);
    double const r = quad.half_width;
    for (int a = 0; a < quad.nodes; ++a) {
        for (int b = 0; b < quad.nodes; ++b) {
            visit(Point2D{r * rule.nodes[a], r * rule.nodes[b]}, r * r * rule.weights[a] * rule.weights[b]);
        }
    }
}

} // namespace

Complex kernel_pairing(CoefficientOperator const& a, CoefficientOperator const& b, MagneticConfig const& cfg,
                       QuadratureSpec const& quad)
{
    KernelFunction const fa = kernel_of(a, cfg);
    KernelFunction const fb = kernel_of(b, cfg);
    Complex sum{};
    for_each_node(quad, [&](Point2D x, double w) { sum += w * std::conj(fa(x)) * fb(x); });
    return sum / (2.0 * std::numbers::pi * cfg.ell() * cfg.ell());
}

double kernel_l2_norm(CoefficientOperator const& a, MagneticConfig const& cfg, QuadratureSpec const& quad)
{
    KernelFunction const fa = kernel_of(a, cfg);
    double sum = 0.0;
    for_each_node(quad, [&](Point2D x, double w) { sum += w * std::norm(fa(x)); });
    return std::sqrt(sum);
}

} // namespace magtrace
