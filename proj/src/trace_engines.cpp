#include "magtrace/trace_engines.hpp"

#include "magtrace/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace magtrace {

namespace {

/// Neumaier-compensated accumulator in extended precision.
class CompensatedSum {
public:
    void add(long double v)
    {
        long double const t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v)) {
            carry_ += (sum_ - t) + v;
        } else {
            carry_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    long double value() const { return sum_ + carry_; }

private:
    long double sum_ = 0.0L;
    long double carry_ = 0.0L;
};

struct ComplexSum {
    CompensatedSum re;
    CompensatedSum im;

    void add(long double r, long double i)
    {
        re.add(r);
        im.add(i);
    }
};

/// s_{n,n} as a dense vector up to the largest stored diagonal index.
std::vector<Complex> dense_diagonal(CoefficientOperator const& s)
{
    auto const diag = s.diagonal_entries();
    if (diag.empty()) {
        return {};
    }
    std::vector<Complex> d(static_cast<std::size_t>(diag.rbegin()->first) + 1);
    for (auto const& [n, v] : diag) {
        d[n] = v;
    }
    return d;
}

void require_lambda(double lambda)
{
    if (!(lambda > -1.0) || !std::isfinite(lambda)) {
        std::ostringstream msg;
        msg << "lambda must exceed -1 (Q + lambda 1 is invertible only for lambda > -1), got " << lambda;
        throw DomainError(msg.str());
    }
}

} // namespace

HarmonicNumbers::HarmonicNumbers(int max_n)
{
    if (max_n < 0) {
        throw DomainError("harmonic number table size must be non-negative");
    }
    values_.resize(static_cast<std::size_t>(max_n) + 1);
    CompensatedSum h;
    values_[0] = 0.0L;
    for (int k = 1; k <= max_n; ++k) {
        h.add(1.0L / k);
        values_[k] = h.value();
    }
}

long double HarmonicNumbers::value(int n) const
{
    if (n < 0 || n > max_n()) {
        throw RangeError("harmonic number index outside the cached table");
    }
    return values_[n];
}

double hurwitz_zeta(double t, double q)
{
    if (!(t > 1.0) || !std::isfinite(t)) {
        throw DomainError("Hurwitz zeta requires t > 1");
    }
    if (!(q > 0.0) || !std::isfinite(q)) {
        throw DomainError("Hurwitz zeta requires q > 0");
    }
    // B_{2j} / (2j)!, j = 1..10
    static constexpr std::array<double, 10> bernoulli_over_factorial = {
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
        -691.0 / 2730.0 / 479001600.0,
        7.0 / 6.0 / 87178291200.0,
        -3617.0 / 510.0 / 20922789888000.0,
        43867.0 / 798.0 / 6402373705728000.0,
        -174611.0 / 330.0 / 2432902008176640000.0,
    };
    int const direct_terms = 12;
    long double head = 0.0L;
    for (int k = direct_terms - 1; k >= 0; --k) {
        head += std::pow(static_cast<long double>(k) + q, -static_cast<long double>(t));
    }
    double const a = direct_terms + q;
    double tail = std::pow(a, 1.0 - t) / (t - 1.0) + 0.5 * std::pow(a, -t);
    // sum_j B_{2j}/(2j)! t(t+1)...(t+2j-2) a^{-t-2j+1}
    double rising = t;
    double power = std::pow(a, -t - 1.0);
    double const inv_a2 = 1.0 / (a * a);
    for (std::size_t j = 0; j < bernoulli_over_factorial.size(); ++j) {
        tail += bernoulli_over_factorial[j] * rising * power;
        rising *= (t + 2.0 * j + 1.0) * (t + 2.0 * j + 2.0);
        power *= inv_a2;
    }
    return static_cast<double>(head + tail);
}

Complex tau_diagonal(CoefficientOperator const& s)
{
    ComplexSum sum;
    for (auto const& [n, v] : s.diagonal_entries()) {
        sum.add(v.real(), v.imag());
    }
    return {static_cast<double>(sum.re.value()), static_cast<double>(sum.im.value())};
}

Complex theta(CoefficientOperator const& s, double x, double lambda)
{
    if (!(x > 0.0)) {
        throw DomainError("theta requires x > 0");
    }
    require_lambda(lambda);
    Complex sum{};
    for (auto const& [n, v] : s.diagonal_entries()) {
        sum += v * hurwitz_zeta(1.0 + x, n + 1.0 + lambda);
    }
    return sum;
}

ConvergenceTable tau_residue(CoefficientOperator const& s, double lambda, std::vector<double> const& x_grid)
{
    require_lambda(lambda);
    if (x_grid.size() < 3) {
        throw DomainError("residue extrapolation needs at least three x values");
    }
    for (double x : x_grid) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw DomainError("residue x values must be positive");
        }
    }
    ConvergenceTable table;
    for (double x : x_grid) {
        table.rows.push_back({x, x * theta(s, x, lambda), std::nullopt});
    }
    extrapolate_richardson(table, kEngineFitTolerance);
    return table;
}

Complex shell_average(CoefficientOperator const& s, int j)
{
    if (j < 1) {
        throw DomainError("shell index j must be at least 1");
    }
    ComplexSum sum;
    for (auto const& [n, v] : s.diagonal_entries()) {
        if (n < j) {
            sum.add(v.real(), v.imag());
        }
    }
    return {static_cast<double>(sum.re.value() / j), static_cast<double>(sum.im.value() / j)};
}

namespace {

/// Prefix sums W(N) = sum_{j<=N} w_j and H(N) = sum_{n<N} h_n s_{n,n} for N = 0..n_max.
struct ShellAccumulation {
    std::vector<long double> w_re, w_im, h_re, h_im;
};

ShellAccumulation accumulate_shells(std::vector<Complex> const& diag, HarmonicNumbers const& harmonic, int n_max)
{
    ShellAccumulation acc;
    acc.w_re.assign(n_max + 1, 0.0L);
    acc.w_im.assign(n_max + 1, 0.0L);
    acc.h_re.assign(n_max + 1, 0.0L);
    acc.h_im.assign(n_max + 1, 0.0L);
    ComplexSum prefix;
    ComplexSum w_total;
    ComplexSum h_total;
    for (int j = 1; j <= n_max; ++j) {
        int const n = j - 1; // diagonal entry entering shell j
        if (static_cast<std::size_t>(n) < diag.size()) {
            prefix.add(diag[n].real(), diag[n].imag());
            h_total.add(harmonic.value(n) * diag[n].real(), harmonic.value(n) * diag[n].imag());
        }
        w_total.add(prefix.re.value() / j, prefix.im.value() / j);
        acc.w_re[j] = w_total.re.value();
        acc.w_im[j] = w_total.im.value();
        acc.h_re[j] = h_total.re.value();
        acc.h_im[j] = h_total.im.value();
    }
    return acc;
}

} // namespace

Complex shell_sum(CoefficientOperator const& s, int n_max)
{
    if (n_max < 0) {
        throw DomainError("shell count must be non-negative");
    }
    if (n_max == 0) {
        return {};
    }
    HarmonicNumbers const harmonic(n_max);
    auto const acc = accumulate_shells(dense_diagonal(s), harmonic, n_max);
    return {static_cast<double>(acc.w_re[n_max]), static_cast<double>(acc.w_im[n_max])};
}

Complex harmonic_rearrangement(CoefficientOperator const& s, int n_max)
{
    if (n_max < 0) {
        throw DomainError("shell count must be non-negative");
    }
    HarmonicNumbers const harmonic(n_max);
    ComplexSum sum;
    long double const h_n = harmonic.value(n_max);
    for (auto const& [n, v] : s.diagonal_entries()) {
        if (n < n_max) {
            long double const weight = h_n - harmonic.value(n);
            sum.add(weight * v.real(), weight * v.imag());
        }
    }
    return {static_cast<double>(sum.re.value()), static_cast<double>(sum.im.value())};
}

ConvergenceTable tau_shell(CoefficientOperator const& s, std::vector<int> const& n_grid)
{
    if (n_grid.empty()) {
        throw DomainError("shell estimator needs at least one N");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2) {
            throw DomainError("shell estimator needs N >= 2");
        }
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
            throw DomainError("shell estimator N grid must be strictly increasing");
        }
    }
    int const n_max = n_grid.back();
    HarmonicNumbers const harmonic(n_max);
    auto const acc = accumulate_shells(dense_diagonal(s), harmonic, n_max);

    ConvergenceTable table;
    for (int n : n_grid) {
        long double const log_n = std::log(static_cast<long double>(n));
        long double const h_n = harmonic.value(n);
        Complex const raw{static_cast<double>(acc.w_re[n] / log_n), static_cast<double>(acc.w_im[n] / log_n)};
        Complex const accelerated{static_cast<double>((acc.w_re[n] + acc.h_re[n]) / h_n),
                                  static_cast<double>((acc.w_im[n] + acc.h_im[n]) / h_n)};
        table.rows.push_back({static_cast<double>(n), raw, accelerated});
    }
    extrapolate_log_inverse(table, kEngineFitTolerance);
    return table;
}

ConvergenceTable tau_ordered_basis(CoefficientOperator const& s, std::vector<int> const& n_grid, ProductForm form)
{
    if (n_grid.empty()) {
        throw DomainError("ordered-basis estimator needs at least one N");
    }
    // completed shells E with E(E+1)/2 <= N+1
    std::vector<int> shells;
    for (int n : n_grid) {
        if (n < 2) {
            throw DomainError("ordered-basis estimator needs N >= 2");
        }
        long double const states = static_cast<long double>(n) + 1.0L;
        int e = static_cast<int>(std::floor((std::sqrt(8.0L * states + 1.0L) - 1.0L) / 2.0L));
        while (static_cast<long double>(e + 1) * (e + 2) / 2 <= states) ++e;
        while (static_cast<long double>(e) * (e + 1) / 2 > states) --e;
        if (shells.empty() || e > shells.back()) {
            shells.push_back(e);
        }
    }
    WeightedProduct const weighted = weighted_product(s, form, 0.0, 0.0, 1.0);
    int const support = s.max_index() + 1;

    ConvergenceTable table;
    ComplexSum partial;
    long long states = 0;
    std::size_t next = 0;
    int const last_shell = shells.back();
    for (int e = 1; e <= last_shell; ++e) {
        // states of shell e in order n = 0..e-1, m = e-1-n
        for (int n = 0; n < e; ++n) {
            ++states;
            if (n < support) {
                Complex const v = weighted.block_entry(n, n, e - 1 - n);
                partial.add(v.real(), v.imag());
            }
        }
        if (next < shells.size() && e == shells[next]) {
            long double const log_count = std::log(static_cast<long double>(states));
            table.rows.push_back({static_cast<double>(states),
                                  {static_cast<double>(partial.re.value() / log_count),
                                   static_cast<double>(partial.im.value() / log_count)},
                                  std::nullopt});
            ++next;
        }
    }
    extrapolate_log_inverse(table, kEngineFitTolerance);
    return table;
}

ResiduePairResult residue_pair(CoefficientOperator const& a, CoefficientOperator const& b, double lambda,
                               std::vector<double> const& x_grid, MagneticConfig const& cfg,
                               QuadratureSpec const& quad)
{
    ResiduePairResult result;
    result.table = tau_residue(compose(adjoint(a), b), lambda, x_grid);
    result.quadrature_pairing = kernel_pairing(a, b, cfg, quad);
    for (auto const& [key, value] : a.entries()) {
        result.coefficient_pairing += std::conj(value) * b.entry(key.first, key.second);
    }
    return result;
}

} // namespace magtrace
