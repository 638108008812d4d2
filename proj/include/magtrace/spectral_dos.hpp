#pragma once

#include "magtrace/convergence.hpp"
#include "magtrace/magnetic_core.hpp"
#include "magtrace/operator_algebra.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace magtrace {

/// H = sum_j h_j Pi_j restricted to Landau indices j < J.
struct LandauDiagonalOperator {
    std::vector<double> values; // h_j, j < J
    double eps_inf = std::numeric_limits<double>::infinity();
    /// Every level j >= J lies at or above this energy. -inf means the
    /// omitted levels are unbounded below and no projection is representable.
    double tail_floor = std::numeric_limits<double>::infinity();

    int truncation() const noexcept { return static_cast<int>(values.size()); }
};

/// h_j = j + 1/2 for j < J.
LandauDiagonalOperator landau_hamiltonian(int truncation);
/// Arbitrary finite data; the omitted levels are assumed to lie at or above tail_floor.
LandauDiagonalOperator landau_diagonal(std::vector<double> values, double tail_floor,
                                       double eps_inf = std::numeric_limits<double>::infinity());

/// P_H(eps) for the interval (-inf, eps].
CoefficientOperator spectral_projection(LandauDiagonalOperator const& h, double eps);
/// N_H(eps) = tau(P_H(eps)) / (2 pi ell^2)
double idos(LandauDiagonalOperator const& h, double eps, MagneticConfig const& cfg);

struct DOSAtom {
    double energy = 0.0;
    double weight = 0.0;
};
struct DOSMeasure {
    std::vector<DOSAtom> atoms; // strictly increasing energies
    double scale = 0.0;

    /// mu((e1, e2])
    double mass(double e1, double e2) const;
};
DOSMeasure dos_measure(LandauDiagonalOperator const& h, MagneticConfig const& cfg);

/// Continuous piecewise-linear function, zero outside [first node, last node].
class CompactTestFunction {
public:
    /// Nodes strictly increasing in energy; the end values must be 0.
    explicit CompactTestFunction(std::vector<std::pair<double, double>> nodes);

    double operator()(double eps) const;
    double support_low() const noexcept { return nodes_.front().first; }
    double support_high() const noexcept { return nodes_.back().first; }
    std::vector<std::pair<double, double>> const& nodes() const noexcept { return nodes_; }

    static CompactTestFunction hat(double low, double peak_at, double high, double peak = 1.0);

private:
    std::vector<std::pair<double, double>> nodes_;
};

/// f(H) = sum_j f(h_j) Pi_j, declared L1.
CoefficientOperator functional_calculus(LandauDiagonalOperator const& h, CompactTestFunction const& f);

struct SpectralFormulaResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};
/// tau(f(H)) against (Omega/2) int f dmu_H.
SpectralFormulaResult spectral_formula_check(LandauDiagonalOperator const& h, CompactTestFunction const& f,
                                             MagneticConfig const& cfg);

/// Rows (N, (2 / Omega log N) sum_{j<=N} w_j(P_H(eps)), accelerated analogue).
ConvergenceTable idos_shell_approx(LandauDiagonalOperator const& h, double eps, std::vector<int> const& n_grid,
                                   MagneticConfig const& cfg);

struct DixmierDosResult {
    double dixmier = 0.0;
    double integral = 0.0;
    double gap = 0.0;
    ConvergenceTable table;
};
/// Dixmier estimate of the weighted product of f(H) (s = 1) against
/// (Omega/2) int f dmu_H. Uses eigenvalues when f(H) has negative entries.
DixmierDosResult dixmier_dos_check(LandauDiagonalOperator const& h, CompactTestFunction const& f, ProductForm form,
                                   double lambda, double lambda_prime, MagneticConfig const& cfg,
                                   int m_max = 20000);

} // namespace magtrace
