#pragma once

#include "magtrace/convergence.hpp"
#include "magtrace/operator_algebra.hpp"

#include <functional>
#include <string>
#include <vector>

namespace magtrace {

/// Where a retained spectrum came from and which part of it is exact.
struct SpectrumProvenance {
    std::string operator_description;
    int blocks = 0;        // blocks m = 0..blocks-1, or shells 1..blocks for diagonal weights
    int block_order = 0;   // rows kept per block
    /// Every omitted value is at most this; the leading values above it are
    /// exactly the leading values of the untruncated operator.
    double tail_bound = 0.0;
    /// Number of leading values known exactly (those above tail_bound).
    std::size_t reliable_length = 0;
    /// Sum of omitted values raised to the power t, when a closed form exists.
    std::function<double(double)> tail_power_sum;
    /// Upper bound for the same sum when only a bound is available.
    std::function<double(double)> tail_power_bound;
};

/// Non-increasing singular values.
struct SingularSpectrum {
    std::vector<double> values;
    SpectrumProvenance provenance;
};

/// Eigenvalues ordered by non-increasing modulus.
struct EigenSequence {
    std::vector<Complex> values;
    SpectrumProvenance provenance;
};

/// Singular values of a weighted product from blocks m < m_max, each block
/// restricted to rows n < n_max (n_max <= 0 selects the support of S).
SingularSpectrum singular_spectrum(WeightedProduct const& t, int m_max, int n_max = 0);
/// Eigenvalues of the same blocks. Throws ComputationError naming the block
/// when a block is numerically non-diagonalizable.
EigenSequence eigen_sequence(WeightedProduct const& t, int m_max, int n_max = 0);
/// Values of a diagonal weight over whole shells n+m+1 <= shells (and n < n_max
/// when n_max > 0); no SVD needed.
SingularSpectrum singular_spectrum(DiagonalWeight const& w, int shells, int n_max = 0);

/// Finite-rank spectrum made of exactly these values (nothing omitted), or,
/// with a tail function, the leading part of a longer sequence whose omitted
/// values satisfy sum mu^t = tail(t).
SingularSpectrum make_spectrum(std::vector<double> values, std::string description = "explicit",
                               std::function<double(double)> tail_power_sum = {});

/// sigma_N^p = sum_{n<N} mu_n^p
double sigma_p(SingularSpectrum const& spec, std::size_t n, double p);
/// gamma_N = sigma_N^1 / log N, N >= 2
double gamma_n(SingularSpectrum const& spec, std::size_t n);
/// max_{2 <= N <= length} gamma_N, a lower bound for the Calderon norm.
double calderon_norm(SingularSpectrum const& spec);

/// Checkpoints N = e(e+1)/2 for shells e (whole-shell counts of Q-power spectra).
std::vector<std::size_t> shell_checkpoints(std::vector<int> const& shells);
/// Geometric checkpoints up to the reliable length, moved down where needed so
/// that no cut separates values of (numerically) equal modulus.
std::vector<std::size_t> default_checkpoints(SingularSpectrum const& spec, int count = 4);
std::vector<std::size_t> default_checkpoints(EigenSequence const& spec, int count = 4);

/// Rows (N, sum_{n<N} mu_n / log N), extrapolated with L + c/log N.
ConvergenceTable dixmier_estimate(SingularSpectrum const& spec, std::vector<std::size_t> const& checkpoints);
/// Same with Re(lambda_n); imaginary parts above 1e-10 raise ComputationError.
ConvergenceTable dixmier_estimate(EigenSequence const& spec, std::vector<std::size_t> const& checkpoints);

struct TauberianValue {
    double partial = 0.0; // sum over retained values of mu^{1+x}
    double tail = 0.0;    // closed-form tail, 0 when unavailable
    bool tail_exact = false;
    /// Upper end of the interval [value, upper] containing zeta_T(x); equals
    /// value() when the tail is exact, +inf when nothing bounds it.
    double upper = 0.0;
    double value() const noexcept { return partial + tail; }
};
/// zeta_T(x) = Tr(T^{1+x})
TauberianValue tauberian_zeta(SingularSpectrum const& spec, double x);
/// Rows (x, x zeta_T(x)) extrapolated to x = 0.
ConvergenceTable tauberian_residue(SingularSpectrum const& spec, std::vector<double> const& x_grid);

inline constexpr double kDixmierFitTolerance = 1e-2;

} // namespace magtrace
