#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace magtrace {

enum class ExtrapolationModel { LogInverse, RichardsonX, None };
std::string to_string(ExtrapolationModel model);

/// One row of a convergence study: the parameter (N or x), the raw estimate
/// and, where an engine has one, an accelerated estimate.
struct ConvergenceRow {
    double param = 0.0;
    std::complex<double> raw{};
    std::optional<std::complex<double>> accelerated;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::complex<double> extrapolated{};
    double residual = 0.0;
    ExtrapolationModel model = ExtrapolationModel::None;
    /// residual below the tolerance the producing engine declares
    bool converged = true;

    /// Sharp value: the last accelerated entry when present, else the extrapolation.
    std::complex<double> best() const;
};

/// Polynomial extrapolation to x = 0 through all points (Neville). The
/// residual is the change against the extrapolation that drops the point with
/// the largest |x|.
struct Extrapolation {
    std::complex<double> limit{};
    double residual = 0.0;
};
Extrapolation richardson_to_zero(std::span<double const> x, std::span<std::complex<double> const> y);

/// Least-squares fit y = L + c / log(N); residual is the root-mean-square misfit.
Extrapolation log_inverse_fit(std::span<double const> n, std::span<std::complex<double> const> y);

/// Fill extrapolated/residual/model/converged of a table from its raw column.
void extrapolate_log_inverse(ConvergenceTable& table, double tolerance);
void extrapolate_richardson(ConvergenceTable& table, double tolerance);

} // namespace magtrace
