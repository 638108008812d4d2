#include "magtrace/spectral_dos.hpp"

#include "magtrace/dixmier.hpp"
#include "magtrace/errors.hpp"
#include "magtrace/trace_engines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magtrace {

namespace {

void check_below_eps_inf(LandauDiagonalOperator const& h, double eps)
{
    if (!(eps < h.eps_inf)) {
        std::ostringstream msg;
        msg << "eps = " << eps << " must lie strictly below sup of the spectrum (" << h.eps_inf
            << "); the projection onto the whole spectrum is the identity, which is not in the algebra";
        throw DomainError(msg.str());
    }
    if (!(eps < h.tail_floor)) {
        std::ostringstream msg;
        msg << "eps = " << eps << " reaches levels beyond the truncation J = " << h.truncation()
            << " (omitted levels start at " << h.tail_floor << "); the projection would be misrepresented";
        throw RangeError(msg.str());
    }
}

} // namespace

LandauDiagonalOperator landau_hamiltonian(int truncation)
{
    if (truncation < 1) {
        throw DomainError("Landau truncation J must be at least 1");
    }
    LandauDiagonalOperator h;
    h.values.resize(static_cast<std::size_t>(truncation));
    for (int j = 0; j < truncation; ++j) {
        h.values[j] = j + 0.5;
    }
    h.tail_floor = truncation + 0.5;
    return h;
}

LandauDiagonalOperator landau_diagonal(std::vector<double> values, double tail_floor, double eps_inf)
{
    if (values.empty()) {
        throw DomainError("Landau truncation J must be at least 1");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError("Landau-diagonal eigenvalues must be finite reals");
        }
        if (v > eps_inf) {
            throw DomainError("eps_inf must bound every stored eigenvalue");
        }
    }
    LandauDiagonalOperator h;
    h.values = std::move(values);
    h.tail_floor = tail_floor;
    h.eps_inf = eps_inf;
    return h;
}

CoefficientOperator spectral_projection(LandauDiagonalOperator const& h, double eps)
{
    check_below_eps_inf(h, eps);
    CoefficientOperator::EntryMap entries;
    for (int j = 0; j < h.truncation(); ++j) {
        if (h.values[j] <= eps) {
            entries[{j, j}] = 1.0;
        }
    }
    return CoefficientOperator(std::move(entries), OperatorClass::L1);
}

double idos(LandauDiagonalOperator const& h, double eps, MagneticConfig const& cfg)
{
    return cfg.idos_scale() * tau_diagonal(spectral_projection(h, eps)).real();
}

double DOSMeasure::mass(double e1, double e2) const
{
    double total = 0.0;
    for (auto const& atom : atoms) {
        if (atom.energy > e1 && atom.energy <= e2) total += atom.weight;
    }
    return total;
}

DOSMeasure dos_measure(LandauDiagonalOperator const& h, MagneticConfig const& cfg)
{
    std::vector<double> sorted = h.values;
    std::sort(sorted.begin(), sorted.end());
    DOSMeasure mu;
    mu.scale = cfg.idos_scale();
    for (double e : sorted) {
        if (!mu.atoms.empty() && mu.atoms.back().energy == e) {
            mu.atoms.back().weight += mu.scale;
        } else {
            mu.atoms.push_back({e, mu.scale});
        }
    }
    return mu;
}

CompactTestFunction::CompactTestFunction(std::vector<std::pair<double, double>> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() < 2) {
        throw DomainError("a test function needs at least two nodes");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!std::isfinite(nodes_[i].first) || !std::isfinite(nodes_[i].second)) {
            throw DomainError("test function nodes must be finite");
        }
        if (i > 0 && !(nodes_[i].first > nodes_[i - 1].first)) {
            throw DomainError("test function nodes must be strictly increasing in energy");
        }
    }
    if (nodes_.front().second != 0.0 || nodes_.back().second != 0.0) {
        throw DomainError("test function must vanish at both support endpoints");
    }
}

double CompactTestFunction::operator()(double eps) const
{
    if (eps <= nodes_.front().first || eps >= nodes_.back().first) return 0.0;
    auto const it = std::upper_bound(nodes_.begin(), nodes_.end(), eps,
                                     [](double e, auto const& node) { return e < node.first; });
    auto const& [e1, v1] = *(it - 1);
    auto const& [e2, v2] = *it;
    if (eps == e1) return v1;
    double const t = (eps - e1) / (e2 - e1);
    return v1 + t * (v2 - v1);
}

CompactTestFunction CompactTestFunction::hat(double low, double peak_at, double high, double peak)
{
    return CompactTestFunction({{low, 0.0}, {peak_at, peak}, {high, 0.0}});
}

CoefficientOperator functional_calculus(LandauDiagonalOperator const& h, CompactTestFunction const& f)
{
    if (!(f.support_high() < h.eps_inf)) {
        throw DomainError("test function support must lie strictly below sup of the spectrum");
    }
    if (!(f.support_high() <= h.tail_floor)) {
        throw RangeError("test function support reaches Landau levels beyond the truncation");
    }
    CoefficientOperator::EntryMap entries;
    for (int j = 0; j < h.truncation(); ++j) {
        double const v = f(h.values[j]);
        if (v != 0.0) entries[{j, j}] = v;
    }
    return CoefficientOperator(std::move(entries), OperatorClass::L1);
}

namespace {

double dos_integral(LandauDiagonalOperator const& h, CompactTestFunction const& f, MagneticConfig const& cfg)
{
    auto const mu = dos_measure(h, cfg);
    double sum = 0.0;
    for (auto const& atom : mu.atoms) {
        sum += atom.weight * f(atom.energy);
    }
    return 0.5 * cfg.omega_ell() * sum;
}

} // namespace

SpectralFormulaResult spectral_formula_check(LandauDiagonalOperator const& h, CompactTestFunction const& f,
                                             MagneticConfig const& cfg)
{
    SpectralFormulaResult out;
    out.lhs = tau_diagonal(functional_calculus(h, f)).real();
    out.rhs = dos_integral(h, f, cfg);
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

ConvergenceTable idos_shell_approx(LandauDiagonalOperator const& h, double eps, std::vector<int> const& n_grid,
                                   MagneticConfig const& cfg)
{
    auto table = tau_shell(spectral_projection(h, eps), n_grid);
    double const c = cfg.idos_scale();
    for (auto& row : table.rows) {
        row.raw *= c;
        if (row.accelerated) *row.accelerated *= c;
    }
    table.extrapolated *= c;
    table.residual *= c;
    return table;
}

DixmierDosResult dixmier_dos_check(LandauDiagonalOperator const& h, CompactTestFunction const& f, ProductForm form,
                                   double lambda, double lambda_prime, MagneticConfig const& cfg, int m_max)
{
    auto const s = functional_calculus(h, f);
    auto const t = weighted_product(s, form, lambda, lambda_prime, 1.0);
    DixmierDosResult out;
    out.integral = dos_integral(h, f, cfg);
    if (s.empty()) {
        out.gap = std::abs(out.integral);
        return out;
    }
    bool negative = false;
    for (auto const& [key, v] : s.entries()) {
        negative = negative || v.real() < 0.0;
    }
    if (negative) {
        auto const seq = eigen_sequence(t, m_max);
        out.table = dixmier_estimate(seq, default_checkpoints(seq));
    } else {
        auto const spec = singular_spectrum(t, m_max);
        out.table = dixmier_estimate(spec, default_checkpoints(spec));
    }
    out.dixmier = out.table.extrapolated.real();
    out.gap = std::abs(out.dixmier - out.integral);
    return out;
}

} // namespace magtrace
