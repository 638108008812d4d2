#include "magtrace/dixmier.hpp"

#include "magtrace/errors.hpp"
#include "magtrace/trace_engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace magtrace {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_diagonal(Eigen::MatrixXcd const& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j && m(i, j) != Complex{}) return false;
        }
    }
    return true;
}

std::size_t count_above(std::vector<double> const& sorted_desc, double bound)
{
    if (!std::isfinite(bound)) {
        return std::isnan(bound) ? sorted_desc.size() : 0;
    }
    return static_cast<std::size_t>(
        std::count_if(sorted_desc.begin(), sorted_desc.end(), [bound](double v) { return v > bound; }));
}

int block_order(WeightedProduct const& t, int n_max)
{
    int const support = t.inner().max_index() + 1;
    return n_max > 0 ? n_max : std::max(support, 1);
}

void fill_weighted_provenance(SpectrumProvenance& prov, WeightedProduct const& t, int m_max, int order)
{
    prov.operator_description = t.describe();
    prov.blocks = m_max;
    prov.block_order = order;

    CoefficientOperator const& s = t.inner();
    int const support = s.max_index() + 1;
    double const norm = covering_block_norm(s);
    if (order < support) {
        // rows were cut: the retained values are compressions, not exact
        prov.tail_bound = kInf;
        return;
    }
    prov.tail_bound = norm * t.block_weight_bound(m_max);

    double const power = t.power();
    double const lambda_low = std::min(t.lambda(), t.form() == ProductForm::Split ? t.lambda_prime() : t.lambda());
    // each omitted block has at most `support` values, each <= norm * (m+1+lambda_low)^{-s}
    prov.tail_power_bound = [=](double exponent) {
        if (support == 0) return 0.0;
        double const st = power * exponent;
        if (!(st > 1.0)) return kInf;
        return support * std::pow(norm, exponent) * hurwitz_zeta(st, m_max + 1.0 + lambda_low);
    };

    bool const same_lambda = t.form() != ProductForm::Split || t.lambda() == t.lambda_prime();
    if (s.is_diagonal() && same_lambda) {
        auto const diag = s.diagonal_entries();
        double const lambda = t.lambda();
        prov.tail_power_sum = [=](double exponent) {
            double const st = power * exponent;
            if (!(st > 1.0)) return kInf;
            double sum = 0.0;
            for (auto const& [n, v] : diag) {
                sum += std::pow(std::abs(v), exponent) * hurwitz_zeta(st, n + m_max + 1.0 + lambda);
            }
            return sum;
        };
    }
}

} // namespace

SingularSpectrum singular_spectrum(WeightedProduct const& t, int m_max, int n_max)
{
    if (m_max < 1) {
        throw DomainError("spectrum needs at least one block (m_max >= 1)");
    }
    int const order = block_order(t, n_max);
    SingularSpectrum spec;
    spec.values.reserve(static_cast<std::size_t>(m_max) * order);
    for (int m = 0; m < m_max; ++m) {
        auto const block = matrix_block(t, m, order);
        if (is_diagonal(block.matrix)) {
            for (Eigen::Index i = 0; i < block.matrix.rows(); ++i) {
                spec.values.push_back(std::abs(block.matrix(i, i)));
            }
        } else {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block.matrix);
            auto const& sv = svd.singularValues();
            spec.values.insert(spec.values.end(), sv.data(), sv.data() + sv.size());
        }
    }
    std::sort(spec.values.begin(), spec.values.end(), std::greater<>());
    fill_weighted_provenance(spec.provenance, t, m_max, order);
    spec.provenance.reliable_length = count_above(spec.values, spec.provenance.tail_bound);
    return spec;
}

EigenSequence eigen_sequence(WeightedProduct const& t, int m_max, int n_max)
{
    if (m_max < 1) {
        throw DomainError("spectrum needs at least one block (m_max >= 1)");
    }
    int const order = block_order(t, n_max);
    EigenSequence seq;
    seq.values.reserve(static_cast<std::size_t>(m_max) * order);
    for (int m = 0; m < m_max; ++m) {
        auto const block = matrix_block(t, m, order);
        if (is_diagonal(block.matrix)) {
            for (Eigen::Index i = 0; i < block.matrix.rows(); ++i) {
                seq.values.push_back(block.matrix(i, i));
            }
            continue;
        }
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(block.matrix, true);
        if (solver.info() != Eigen::Success) {
            throw ComputationError("eigen decomposition failed in block m=" + std::to_string(m));
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> cond(solver.eigenvectors());
        auto const& sv = cond.singularValues();
        double const smallest = sv(sv.size() - 1);
        if (!(smallest > 1e-10 * sv(0))) {
            throw ComputationError("block m=" + std::to_string(m) + " is numerically non-diagonalizable");
        }
        auto const& ev = solver.eigenvalues();
        seq.values.insert(seq.values.end(), ev.data(), ev.data() + ev.size());
    }
    std::stable_sort(seq.values.begin(), seq.values.end(),
                     [](Complex const& a, Complex const& b) { return std::abs(a) > std::abs(b); });
    fill_weighted_provenance(seq.provenance, t, m_max, order);
    std::vector<double> moduli(seq.values.size());
    std::transform(seq.values.begin(), seq.values.end(), moduli.begin(), [](Complex const& z) { return std::abs(z); });
    seq.provenance.reliable_length = count_above(moduli, seq.provenance.tail_bound);
    return seq;
}

SingularSpectrum singular_spectrum(DiagonalWeight const& w, int shells, int n_max)
{
    if (shells < 1) {
        throw DomainError("shell cutoff must be at least 1");
    }
    SingularSpectrum spec;
    for (int e = 1; e <= shells; ++e) {
        for (int n = 0; n < e; ++n) {
            if (n_max > 0 && n >= n_max) break;
            spec.values.push_back(std::abs(w.value(n, e - 1 - n)));
        }
    }
    std::sort(spec.values.begin(), spec.values.end(), std::greater<>());

    auto& prov = spec.provenance;
    prov.operator_description = w.describe();
    prov.blocks = shells;
    prov.block_order = n_max;
    auto const& factors = w.factors();
    if (factors.size() == 1 && factors.front().kind == DiagonalWeight::Kind::QPower) {
        double const s = factors.front().s;
        double const lambda = factors.front().lambda;
        prov.tail_bound = std::pow(shells + 1.0 + lambda, -s);
        prov.tail_power_sum = [=](double exponent) {
            double const st = s * exponent;
            double const q = shells + 1.0 + lambda;
            if (n_max > 0 && n_max <= shells + 1) {
                // every omitted shell holds n_max values
                if (!(st > 1.0)) return kInf;
                return n_max * hurwitz_zeta(st, q);
            }
            // omitted shell e holds e values: sum_e e (e+lambda)^{-st}
            if (!(st > 2.0)) return kInf;
            return hurwitz_zeta(st - 1.0, q) - lambda * hurwitz_zeta(st, q);
        };
    } else {
        prov.tail_bound = kNaN;
    }
    prov.reliable_length = count_above(spec.values, prov.tail_bound);
    return spec;
}

SingularSpectrum make_spectrum(std::vector<double> values, std::string description,
                               std::function<double(double)> tail_power_sum)
{
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw DomainError("singular values must be finite and non-negative");
        }
    }
    SingularSpectrum spec;
    spec.values = std::move(values);
    std::sort(spec.values.begin(), spec.values.end(), std::greater<>());
    spec.provenance.operator_description = std::move(description);
    spec.provenance.blocks = 1;
    spec.provenance.block_order = static_cast<int>(spec.values.size());
    if (tail_power_sum) {
        spec.provenance.tail_bound = kNaN;
        spec.provenance.tail_power_sum = std::move(tail_power_sum);
    } else {
        spec.provenance.tail_bound = 0.0;
        spec.provenance.tail_power_sum = [](double) { return 0.0; };
    }
    spec.provenance.reliable_length = spec.values.size();
    return spec;
}

double sigma_p(SingularSpectrum const& spec, std::size_t n, double p)
{
    if (!(p >= 1.0)) {
        throw DomainError("sigma_p requires p >= 1");
    }
    if (n > spec.values.size()) {
        throw RangeError("N = " + std::to_string(n) + " exceeds the retained spectrum of length "
                         + std::to_string(spec.values.size()));
    }
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        sum += p == 1.0 ? spec.values[i] : std::pow(static_cast<long double>(spec.values[i]), p);
    }
    return static_cast<double>(sum);
}

double gamma_n(SingularSpectrum const& spec, std::size_t n)
{
    if (n < 2) {
        throw DomainError("gamma_N requires N >= 2");
    }
    return sigma_p(spec, n, 1.0) / std::log(static_cast<double>(n));
}

double calderon_norm(SingularSpectrum const& spec)
{
    if (spec.values.size() < 2) {
        throw DomainError("Calderon norm needs a spectrum of length at least 2");
    }
    long double partial = spec.values[0];
    double best = 0.0;
    for (std::size_t n = 2; n <= spec.values.size(); ++n) {
        partial += spec.values[n - 1];
        best = std::max(best, static_cast<double>(partial / std::log(static_cast<long double>(n))));
    }
    return best;
}

std::vector<std::size_t> shell_checkpoints(std::vector<int> const& shells)
{
    std::vector<std::size_t> out;
    for (int e : shells) {
        if (e < 2) {
            throw DomainError("shell checkpoints need shells >= 2");
        }
        out.push_back(static_cast<std::size_t>(e) * (e + 1) / 2);
    }
    return out;
}

namespace {

std::vector<std::size_t> geometric_checkpoints(std::vector<double> const& moduli, std::size_t reliable, int count)
{
    if (count < 3) {
        throw DomainError("at least three checkpoints are needed");
    }
    std::size_t const top = std::min(reliable, moduli.size());
    std::vector<std::size_t> out;
    for (int k = count - 1; k >= 0; --k) {
        std::size_t n = top >> k;
        // keep cuts between values of distinct modulus
        while (n > 2 && n < moduli.size() && moduli[n - 1] > 0.0
               && moduli[n - 1] - moduli[n] <= 1e-9 * moduli[n - 1]) {
            --n;
        }
        if (n >= 2 && (out.empty() || n > out.back())) {
            out.push_back(n);
        }
    }
    return out;
}

ConvergenceTable estimate_from_values(std::vector<double> const& values, std::vector<std::size_t> const& checkpoints)
{
    if (checkpoints.size() < 3) {
        throw DomainError("Dixmier estimate needs at least three checkpoints");
    }
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 2) {
            throw DomainError("Dixmier checkpoints need N >= 2");
        }
        if (checkpoints[i] > values.size()) {
            throw RangeError("checkpoint N = " + std::to_string(checkpoints[i])
                             + " exceeds the retained spectrum of length " + std::to_string(values.size()));
        }
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw DomainError("Dixmier checkpoints must be strictly increasing");
        }
    }
    ConvergenceTable table;
    long double partial = 0.0L;
    std::size_t consumed = 0;
    for (std::size_t n : checkpoints) {
        for (; consumed < n; ++consumed) {
            partial += values[consumed];
        }
        table.rows.push_back({static_cast<double>(n),
                              static_cast<double>(partial / std::log(static_cast<long double>(n))), std::nullopt});
    }
    extrapolate_log_inverse(table, kDixmierFitTolerance);
    return table;
}

} // namespace

std::vector<std::size_t> default_checkpoints(SingularSpectrum const& spec, int count)
{
    return geometric_checkpoints(spec.values, spec.provenance.reliable_length, count);
}

std::vector<std::size_t> default_checkpoints(EigenSequence const& spec, int count)
{
    std::vector<double> moduli(spec.values.size());
    std::transform(spec.values.begin(), spec.values.end(), moduli.begin(), [](Complex const& z) { return std::abs(z); });
    return geometric_checkpoints(moduli, spec.provenance.reliable_length, count);
}

ConvergenceTable dixmier_estimate(SingularSpectrum const& spec, std::vector<std::size_t> const& checkpoints)
{
    return estimate_from_values(spec.values, checkpoints);
}

ConvergenceTable dixmier_estimate(EigenSequence const& spec, std::vector<std::size_t> const& checkpoints)
{
    std::vector<double> real_parts(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        Complex const z = spec.values[i];
        if (std::abs(z.imag()) > 1e-10 * std::max(1.0, std::abs(z))) {
            std::ostringstream msg;
            msg << "eigenvalue " << i << " has imaginary part " << z.imag()
                << "; Dixmier eigen sums need a self-adjoint operator";
            throw ComputationError(msg.str());
        }
        real_parts[i] = z.real();
    }
    return estimate_from_values(real_parts, checkpoints);
}

TauberianValue tauberian_zeta(SingularSpectrum const& spec, double x)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("Tauberian zeta requires x > 0");
    }
    double const exponent = 1.0 + x;
    TauberianValue out;
    long double partial = 0.0L;
    for (double v : spec.values) {
        if (v > 0.0) partial += std::pow(static_cast<long double>(v), exponent);
    }
    out.partial = static_cast<double>(partial);
    auto const& prov = spec.provenance;
    if (prov.tail_power_sum) {
        out.tail = prov.tail_power_sum(exponent);
        out.tail_exact = std::isfinite(out.tail);
        out.upper = out.partial + out.tail;
        if (!out.tail_exact) out.tail = 0.0;
    } else if (prov.tail_power_bound) {
        out.upper = out.partial + prov.tail_power_bound(exponent);
    } else {
        out.upper = kInf;
    }
    return out;
}

ConvergenceTable tauberian_residue(SingularSpectrum const& spec, std::vector<double> const& x_grid)
{
    if (x_grid.size() < 3) {
        throw DomainError("Tauberian residue needs at least three x values");
    }
    ConvergenceTable table;
    bool exact = true;
    for (double x : x_grid) {
        auto const z = tauberian_zeta(spec, x);
        exact = exact && z.tail_exact;
        table.rows.push_back({x, x * z.value(), std::nullopt});
    }
    extrapolate_richardson(table, kDixmierFitTolerance);
    table.converged = table.converged && exact;
    return table;
}

} // namespace magtrace
