#pragma once

#include "magtrace/convergence.hpp"
#include "magtrace/kernel_calculus.hpp"
#include "magtrace/laguerre_basis.hpp"
#include "magtrace/operator_algebra.hpp"

#include <vector>

namespace magtrace {

/// h_n = sum_{k=1}^n 1/k with h_0 = 0, accumulated in extended precision.
class HarmonicNumbers {
public:
    explicit HarmonicNumbers(int max_n);

    long double value(int n) const;
    int max_n() const noexcept { return static_cast<int>(values_.size()) - 1; }

private:
    std::vector<long double> values_;
};

/// Hurwitz zeta function sum_{m>=0} (m+q)^{-t} for t > 1, q > 0 (Euler-Maclaurin).
double hurwitz_zeta(double t, double q);

/// tau(S) = sum_k s_{k,k}
Complex tau_diagonal(CoefficientOperator const& s);

/// theta_S(x) = sum_n s_{n,n} zeta(1+x, n+1+lambda) = Tr(Q_lambda^{-(1+x)} S)
Complex theta(CoefficientOperator const& s, double x, double lambda);

/// Rows (x, x theta_S(x)) with polynomial extrapolation to x = 0.
ConvergenceTable tau_residue(CoefficientOperator const& s, double lambda, std::vector<double> const& x_grid);

/// w_j(S) = (1/j) sum_{n+m=j-1} <psi_{n,m}, S psi_{n,m}> = (1/j) sum_{n<j} s_{n,n}
Complex shell_average(CoefficientOperator const& s, int j);

/// sum_{j=1}^N w_j(S), compensated.
Complex shell_sum(CoefficientOperator const& s, int n_max);
/// sum_{n=0}^{N-1} (h_N - h_n) s_{n,n}, compensated.
Complex harmonic_rearrangement(CoefficientOperator const& s, int n_max);

/// Energy-shell estimator. Rows carry (N, (1/log N) sum_{j<=N} w_j,
/// (sum_{j<=N} w_j + sum_{n<N} h_n s_{n,n}) / h_N); the raw column is
/// extrapolated with L + c/log N.
ConvergenceTable tau_shell(CoefficientOperator const& s, std::vector<int> const& n_grid);

/// Ordered-eigenbasis estimator: basis states sorted by increasing shell
/// n+m+1 (ties by increasing n), partial sums of <phi_r, Q_0^{-1} S phi_r>
/// over r = 0..N divided by log(N+1). Each requested N is lowered to the last
/// completed shell; the row parameter is the number of states N+1. The
/// extrapolated limit approximates tau(S)/2.
ConvergenceTable tau_ordered_basis(CoefficientOperator const& s, std::vector<int> const& n_grid,
                                   ProductForm form = ProductForm::Left);

struct ResiduePairResult {
    ConvergenceTable table;
    Complex quadrature_pairing{}; // (1/2 pi ell^2) <f_A, f_B>
    Complex coefficient_pairing{}; // sum conj(a_{j,k}) b_{j,k}
};
ResiduePairResult residue_pair(CoefficientOperator const& a, CoefficientOperator const& b, double lambda,
                               std::vector<double> const& x_grid, MagneticConfig const& cfg,
                               QuadratureSpec const& quad);

/// Default tolerance attached to the converged flag of the engines' fits.
inline constexpr double kEngineFitTolerance = 1e-3;

} // namespace magtrace
