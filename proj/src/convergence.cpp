#include "magtrace/convergence.hpp"

#include "magtrace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magtrace {

std::string to_string(ExtrapolationModel model)
{
    switch (model) {
    case ExtrapolationModel::LogInverse: return "log_inverse";
    case ExtrapolationModel::RichardsonX: return "richardson_x";
    case ExtrapolationModel::None: return "none";
    }
    return "none";
}

std::complex<double> ConvergenceTable::best() const
{
    if (!rows.empty() && rows.back().accelerated) {
        return *rows.back().accelerated;
    }
    return extrapolated;
}

namespace {

std::complex<double> neville_at_zero(std::span<double const> x, std::span<std::complex<double> const> y)
{
    std::vector<std::complex<double>> p(y.begin(), y.end());
    std::size_t const n = p.size();
    for (std::size_t level = 1; level < n; ++level) {
        for (std::size_t i = 0; i + level < n; ++i) {
            double const xi = x[i];
            double const xj = x[i + level];
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    return p[0];
}

} // namespace

Extrapolation richardson_to_zero(std::span<double const> x, std::span<std::complex<double> const> y)
{
    if (x.size() != y.size() || x.empty()) {
        throw DomainError("extrapolation needs matching, non-empty abscissae and values");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            if (x[i] == x[j]) {
                throw DomainError("extrapolation abscissae must be distinct");
            }
        }
    }
    Extrapolation result;
    result.limit = neville_at_zero(x, y);
    if (x.size() >= 2) {
        // drop the point farthest from zero
        std::size_t far = 0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            if (std::abs(x[i]) > std::abs(x[far])) far = i;
        }
        std::vector<double> xs;
        std::vector<std::complex<double>> ys;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i == far) continue;
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
        result.residual = std::abs(result.limit - neville_at_zero(xs, ys));
    }
    return result;
}

Extrapolation log_inverse_fit(std::span<double const> n, std::span<std::complex<double> const> y)
{
    if (n.size() != y.size() || n.size() < 2) {
        throw DomainError("log-inverse fit needs at least two checkpoints");
    }
    // normal equations for [1, u] with u = 1/log N
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    std::complex<double> t0{}, t1{};
    std::vector<double> u(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 1.0)) {
            throw DomainError("log-inverse fit needs checkpoints N > 1");
        }
        u[i] = 1.0 / std::log(n[i]);
        s0 += 1.0;
        s1 += u[i];
        s2 += u[i] * u[i];
        t0 += y[i];
        t1 += u[i] * y[i];
    }
    double const det = s0 * s2 - s1 * s1;
    if (std::abs(det) < 1e-300) {
        throw DomainError("log-inverse fit needs distinct checkpoints");
    }
    std::complex<double> const limit = (s2 * t0 - s1 * t1) / det;
    std::complex<double> const slope = (s0 * t1 - s1 * t0) / det;
    double misfit = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        misfit += std::norm(y[i] - (limit + slope * u[i]));
    }
    return {limit, std::sqrt(misfit / n.size())};
}

namespace {

void split_columns(ConvergenceTable const& table, std::vector<double>& params,
                   std::vector<std::complex<double>>& raw)
{
    params.clear();
    raw.clear();
    for (auto const& row : table.rows) {
        params.push_back(row.param);
        raw.push_back(row.raw);
    }
}

} // namespace

void extrapolate_log_inverse(ConvergenceTable& table, double tolerance)
{
    std::vector<double> params;
    std::vector<std::complex<double>> raw;
    split_columns(table, params, raw);
    table.model = ExtrapolationModel::LogInverse;
    if (params.size() < 2) {
        table.extrapolated = raw.empty() ? std::complex<double>{} : raw.back();
        table.residual = std::numeric_limits<double>::quiet_NaN();
        table.converged = false;
        return;
    }
    auto const fit = log_inverse_fit(params, raw);
    table.extrapolated = fit.limit;
    table.residual = fit.residual;
    table.converged = std::isfinite(fit.residual) && fit.residual <= tolerance;
}

void extrapolate_richardson(ConvergenceTable& table, double tolerance)
{
    std::vector<double> params;
    std::vector<std::complex<double>> raw;
    split_columns(table, params, raw);
    table.model = ExtrapolationModel::RichardsonX;
    if (params.empty()) {
        table.converged = false;
        return;
    }
    auto const fit = richardson_to_zero(params, raw);
    table.extrapolated = fit.limit;
    table.residual = fit.residual;
    table.converged = std::isfinite(fit.residual) && fit.residual <= tolerance;
}

} // namespace magtrace
