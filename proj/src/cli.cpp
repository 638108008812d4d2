#include "magtrace/cli.hpp"

#include "magtrace/dixmier.hpp"
#include "magtrace/errors.hpp"
#include "magtrace/kernel_calculus.hpp"
#include "magtrace/laguerre_basis.hpp"
#include "magtrace/magnetic_core.hpp"
#include "magtrace/operator_algebra.hpp"
#include "magtrace/serialization.hpp"
#include "magtrace/spectral_dos.hpp"
#include "magtrace/trace_engines.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace magtrace::cli {

namespace {

struct Globals {
    double ell = 1.0;
    std::string format = "json";
    std::string out;
    std::uint64_t seed = 0;
    std::string budget = "quick";
};

struct Budget {
    int shells = 512;
    std::vector<double> x_grid{1e-1, 1e-2, 1e-3};
    std::vector<int> n_grid{100, 1000, 10000};
};

Budget budget_for(std::string const& profile)
{
    Budget b;
    if (profile == "full") b.shells = 2000;
    return b;
}

// everything a subcommand may read; each subcommand binds only its own flags
struct Params {
    std::string op;
    std::string op2;
    std::string f;
    int n = 0;
    int m = 0;
    double x1 = 0.0;
    double x2 = 0.0;
    int max_index = 4;
    std::string p = "1";
    int block_order = 0;
    double radius = 20.0;
    double a1 = 1.0;
    double a2 = 0.0;
    int nodes = 81;
    double extent = 0.0;
    double lambda = 0.0;
    std::optional<double> lambda2;
    std::vector<double> x_grid;
    std::vector<int> n_grid;
    std::string form = "left";
    std::optional<int> shells;
    std::optional<double> power;
    std::string kind = "singular";
    int limit = 32;
    double eps = 2.0;
    int landau_j = 64;
};

struct Output {
    Json config = Json::object();
    Json results = Json::object();
    std::function<void(std::ostream&)> csv;
    bool converged = true;
};

Json cplx(Complex z)
{
    return complex_to_json(z);
}

void generic_csv(std::ostream& os, Json const& results)
{
    os << "field,value\n";
    for (auto it = results.begin(); it != results.end(); ++it) {
        if (it->is_primitive()) {
            os << it.key() << ',' << canonical_dump(*it) << '\n';
        } else if (it->is_array() && it->size() == 2 && (*it)[0].is_number() && (*it)[1].is_number()) {
            os << it.key() << "_re," << canonical_dump((*it)[0]) << '\n';
            os << it.key() << "_im," << canonical_dump((*it)[1]) << '\n';
        }
    }
}

void table_output(Output& o, ConvergenceTable const& t)
{
    o.results["table"] = table_to_json(t);
    o.converged = o.converged && t.converged;
    o.csv = [t](std::ostream& os) { write_table_csv(os, t); };
}

ProductForm parse_form(std::string const& s)
{
    return product_form_from_string(s);
}

double parse_p(std::string const& s)
{
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (std::exception const&) {
        used = 0;
    }
    if (used != s.size()) {
        throw DomainError("--p must be a number >= 1 or 'inf', got '" + s + "'");
    }
    return v;
}

Json matrix_json(Eigen::MatrixXcd const& m)
{
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(cplx(m(i, j)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<int> ordered_grid(int shells)
{
    // N + 1 = e(e+1)/2 states for whole shells e
    std::vector<int> grid;
    for (int div : {8, 4, 2, 1}) {
        int const e = std::max(2, shells / div);
        int const n = e * (e + 1) / 2 - 1;
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    return grid;
}

// ---- basis ----

void cmd_basis_eval(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["n"] = p.n;
    o.config["m"] = p.m;
    o.config["x1"] = p.x1;
    o.config["x2"] = p.x2;
    if (p.n < 0 || p.m < 0) {
        throw DomainError("basis indices n, m must be non-negative");
    }
    o.results["psi"] = cplx(psi({p.n, p.m}, {p.x1, p.x2}, cfg));
}

void cmd_basis_gram(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["max_index"] = p.max_index;
    auto const quad = QuadratureSpec::defaults(cfg);
    o.config["quadrature_nodes"] = quad.nodes;
    auto const dev = orthonormality_check(p.max_index, cfg, quad);
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < dev.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < dev.cols(); ++j) row.push_back(dev(i, j));
        rows.push_back(std::move(row));
    }
    o.results["deviation"] = rows;
    o.results["max_deviation"] = dev.maxCoeff();
    int const side = p.max_index + 1;
    o.csv = [dev, side](std::ostream& os) {
        os << "a_n,a_m,b_n,b_m,deviation\n";
        for (Eigen::Index i = 0; i < dev.rows(); ++i) {
            for (Eigen::Index j = 0; j < dev.cols(); ++j) {
                os << i / side << ',' << i % side << ',' << j / side << ',' << j % side << ','
                   << canonical_dump(Json(dev(i, j))) << '\n';
            }
        }
    };
}

// ---- op ----

void operator_output(Output& o, CoefficientOperator const& a)
{
    o.results["operator"] = operator_to_json(a);
    o.csv = [a](std::ostream& os) {
        os << "j,k,re,im\n";
        for (auto const& [key, c] : a.entries()) {
            os << key.first << ',' << key.second << ',' << canonical_dump(Json(c.real())) << ','
               << canonical_dump(Json(c.imag())) << '\n';
        }
    };
}

void cmd_op_compose(Params const& p, Output& o)
{
    o.config["in"] = p.op;
    o.config["in2"] = p.op2;
    operator_output(o, compose(load_operator(p.op), load_operator(p.op2)));
}

void cmd_op_adjoint(Params const& p, Output& o)
{
    o.config["in"] = p.op;
    operator_output(o, adjoint(load_operator(p.op)));
}

void cmd_op_norm(Params const& p, Output& o)
{
    o.config["in"] = p.op;
    o.config["p"] = p.p;
    o.results["norm"] = lp_norm(load_operator(p.op), parse_p(p.p));
}

void cmd_op_block(Params const& p, Output& o)
{
    auto const a = load_operator(p.op);
    int const order = p.block_order > 0 ? p.block_order : std::max(1, a.max_index() + 1);
    o.config["in"] = p.op;
    o.config["m"] = p.m;
    o.config["N"] = order;
    if (p.m < 0) {
        throw DomainError("block index m must be non-negative");
    }
    auto const block = matrix_block(a, p.m, order);
    o.results["matrix"] = matrix_json(block.matrix);
}

// ---- kernel ----

void cmd_kernel_eval(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["op"] = p.op;
    o.config["x1"] = p.x1;
    o.config["x2"] = p.x2;
    auto const k = kernel_of(load_operator(p.op), cfg);
    o.results["kernel"] = cplx(k({p.x1, p.x2}));
}

void cmd_kernel_folner(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["op"] = p.op;
    o.config["R"] = p.radius;
    if (!(p.radius > 0.0)) {
        throw DomainError("Folner box half-width R must be positive");
    }
    auto const s = load_operator(p.op);
    Complex const value = folner_trace(s, p.radius, cfg);
    Complex const tau = tau_diagonal(s);
    o.results["folner_trace"] = cplx(value);
    o.results["tau"] = cplx(tau);
    o.results["gap"] = std::abs(value - tau);
}

void cmd_kernel_commutant(Params const& p, MagneticConfig const& cfg, Output& o)
{
    GridSpec const grid{p.extent > 0.0 ? p.extent : 12.0 * cfg.ell(), p.nodes};
    o.config["op"] = p.op;
    o.config["a1"] = p.a1;
    o.config["a2"] = p.a2;
    o.config["nodes"] = grid.nodes;
    o.config["extent"] = grid.half_width;
    if (grid.nodes < 8) {
        throw DomainError("commutant grid needs at least 8 nodes per axis");
    }
    auto const s = load_operator(p.op);
    auto const phi = GridFunction::sample(grid, [&](Point2D x) { return psi({0, 0}, x, cfg); });
    o.results["residual"] = commutant_residual(s, {p.a1, p.a2}, phi, cfg);
}

// ---- trace ----

void cmd_trace_diag(Params const& p, Output& o)
{
    o.config["op"] = p.op;
    Complex const tau = tau_diagonal(load_operator(p.op));
    o.results["tau"] = cplx(tau);
    o.csv = [tau](std::ostream& os) { os << canonical_dump(Json(tau.real())) << '\n'; };
}

void cmd_trace_residue(Params const& p, Budget const& b, Output& o)
{
    auto const grid = p.x_grid.empty() ? b.x_grid : p.x_grid;
    o.config["op"] = p.op;
    o.config["lambda"] = p.lambda;
    o.config["x_grid"] = grid;
    table_output(o, tau_residue(load_operator(p.op), p.lambda, grid));
}

void cmd_trace_shell(Params const& p, Budget const& b, Output& o)
{
    auto const grid = p.n_grid.empty() ? b.n_grid : p.n_grid;
    o.config["op"] = p.op;
    o.config["N_grid"] = grid;
    auto const t = tau_shell(load_operator(p.op), grid);
    table_output(o, t);
    o.results["accelerated"] = cplx(t.rows.back().accelerated.value_or(Complex{}));
}

void cmd_trace_ordered(Params const& p, Budget const& b, Output& o)
{
    auto const grid = p.n_grid.empty() ? ordered_grid(b.shells) : p.n_grid;
    o.config["op"] = p.op;
    o.config["N_grid"] = grid;
    o.config["form"] = p.form;
    auto const t = tau_ordered_basis(load_operator(p.op), grid, parse_form(p.form));
    table_output(o, t);
    o.results["doubled"] = cplx(2.0 * t.extrapolated);
}

// ---- dixmier ----

struct DixmierInput {
    std::optional<SingularSpectrum> singular;
    std::optional<EigenSequence> eigen;
};

DixmierInput dixmier_input(Params const& p, Budget const& b, Output& o)
{
    int const shells = p.shells.value_or(b.shells);
    double const power = p.power.value_or(p.op.empty() ? 2.0 : 1.0);
    double const lambda2 = p.lambda2.value_or(p.lambda);
    o.config["shells"] = shells;
    o.config["s"] = power;
    o.config["lambda"] = p.lambda;
    o.config["kind"] = p.kind;
    if (p.kind != "singular" && p.kind != "eigen") {
        throw DomainError("--kind must be singular or eigen");
    }
    DixmierInput in;
    if (p.op.empty()) {
        o.config["operator"] = "Q-power weight";
        auto const w = DiagonalWeight::q_power(power, p.lambda);
        in.singular = singular_spectrum(w, shells);
        return in;
    }
    o.config["op"] = p.op;
    o.config["form"] = p.form;
    o.config["lambda2"] = lambda2;
    auto const t = weighted_product(load_operator(p.op), parse_form(p.form), p.lambda, lambda2, power);
    if (p.kind == "eigen") {
        in.eigen = eigen_sequence(t, shells);
    } else {
        in.singular = singular_spectrum(t, shells);
    }
    return in;
}

void provenance_json(Output& o, SpectrumProvenance const& prov, std::size_t length)
{
    o.results["description"] = prov.operator_description;
    o.results["length"] = length;
    o.results["reliable_length"] = prov.reliable_length;
    o.results["tail_bound"] = prov.tail_bound;
}

void cmd_dixmier_spectrum(Params const& p, Budget const& b, Output& o)
{
    auto const in = dixmier_input(p, b, o);
    o.config["limit"] = p.limit;
    std::size_t const limit = static_cast<std::size_t>(std::max(p.limit, 0));
    if (in.singular) {
        auto const& v = in.singular->values;
        provenance_json(o, in.singular->provenance, v.size());
        std::vector<double> head(v.begin(), v.begin() + std::min(limit, v.size()));
        o.results["values"] = head;
        o.csv = [head](std::ostream& os) {
            os << "index,value\n";
            for (std::size_t i = 0; i < head.size(); ++i) os << i << ',' << canonical_dump(Json(head[i])) << '\n';
        };
    } else {
        auto const& v = in.eigen->values;
        provenance_json(o, in.eigen->provenance, v.size());
        std::vector<Complex> head(v.begin(), v.begin() + std::min(limit, v.size()));
        Json vals = Json::array();
        for (auto z : head) vals.push_back(cplx(z));
        o.results["values"] = vals;
        o.csv = [head](std::ostream& os) {
            os << "index,re,im\n";
            for (std::size_t i = 0; i < head.size(); ++i) {
                os << i << ',' << canonical_dump(Json(head[i].real())) << ','
                   << canonical_dump(Json(head[i].imag())) << '\n';
            }
        };
    }
}

void cmd_dixmier_gamma(Params const& p, Budget const& b, Output& o)
{
    auto in = dixmier_input(p, b, o);
    if (!in.singular) {
        throw DomainError("gamma_N is defined on singular values; use --kind singular");
    }
    auto const& spec = *in.singular;
    auto const checkpoints = default_checkpoints(spec);
    Json rows = Json::array();
    for (auto n : checkpoints) {
        rows.push_back({{"N", n}, {"gamma", gamma_n(spec, n)}});
    }
    o.results["rows"] = rows;
    o.results["calderon_lower_bound"] = calderon_norm(spec);
    o.csv = [spec, checkpoints](std::ostream& os) {
        os << "N,gamma\n";
        for (auto n : checkpoints) os << n << ',' << canonical_dump(Json(gamma_n(spec, n))) << '\n';
    };
}

ConvergenceTable estimate_of(DixmierInput const& in)
{
    if (in.singular) {
        return dixmier_estimate(*in.singular, default_checkpoints(*in.singular));
    }
    return dixmier_estimate(*in.eigen, default_checkpoints(*in.eigen));
}

void cmd_dixmier_estimate(Params const& p, Budget const& b, Output& o)
{
    table_output(o, estimate_of(dixmier_input(p, b, o)));
}

void cmd_dixmier_tauberian(Params const& p, Budget const& b, Output& o)
{
    auto in = dixmier_input(p, b, o);
    if (!in.singular) {
        throw DomainError("the Tauberian residue is defined for non-negative operators; use --kind singular");
    }
    auto const grid = p.x_grid.empty() ? b.x_grid : p.x_grid;
    o.config["x_grid"] = grid;
    table_output(o, tauberian_residue(*in.singular, grid));
}

// ---- dos ----

void cmd_dos_idos(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["eps"] = p.eps;
    o.config["J"] = p.landau_j;
    o.results["idos"] = idos(landau_hamiltonian(p.landau_j), p.eps, cfg);
}

void cmd_dos_measure(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["J"] = p.landau_j;
    auto const mu = dos_measure(landau_hamiltonian(p.landau_j), cfg);
    Json atoms = Json::array();
    for (auto const& a : mu.atoms) atoms.push_back({{"energy", a.energy}, {"weight", a.weight}});
    o.results["atoms"] = atoms;
    o.results["scale"] = mu.scale;
    o.csv = [mu](std::ostream& os) {
        os << "energy,weight\n";
        for (auto const& a : mu.atoms) {
            os << canonical_dump(Json(a.energy)) << ',' << canonical_dump(Json(a.weight)) << '\n';
        }
    };
}

void cmd_dos_spectral(Params const& p, MagneticConfig const& cfg, Output& o)
{
    o.config["f"] = p.f;
    o.config["J"] = p.landau_j;
    auto const r = spectral_formula_check(landau_hamiltonian(p.landau_j), load_test_function(p.f), cfg);
    o.results["lhs"] = r.lhs;
    o.results["rhs"] = r.rhs;
    o.results["gap"] = r.gap;
}

void cmd_dos_approx(Params const& p, Budget const& b, MagneticConfig const& cfg, Output& o)
{
    auto const grid = p.n_grid.empty() ? b.n_grid : p.n_grid;
    o.config["eps"] = p.eps;
    o.config["J"] = p.landau_j;
    o.config["N_grid"] = grid;
    auto const h = landau_hamiltonian(p.landau_j);
    auto const t = idos_shell_approx(h, p.eps, grid, cfg);
    table_output(o, t);
    o.results["idos"] = idos(h, p.eps, cfg);
}

void cmd_dos_dixmier(Params const& p, Budget const& b, MagneticConfig const& cfg, Output& o)
{
    int const blocks = p.shells.value_or(b.shells);
    double const lambda2 = p.lambda2.value_or(p.lambda);
    o.config["f"] = p.f;
    o.config["J"] = p.landau_j;
    o.config["form"] = p.form;
    o.config["lambda"] = p.lambda;
    o.config["lambda2"] = lambda2;
    o.config["shells"] = blocks;
    auto const r = dixmier_dos_check(landau_hamiltonian(p.landau_j), load_test_function(p.f), parse_form(p.form),
                                     p.lambda, lambda2, cfg, blocks);
    o.results["dixmier"] = r.dixmier;
    o.results["integral"] = r.integral;
    o.results["gap"] = r.gap;
    if (!r.table.rows.empty()) {
        o.results["table"] = table_to_json(r.table);
        o.converged = r.table.converged;
    }
}

// ---- compare ----

struct CompareRow {
    std::string engine;
    Complex value;
    bool sharp = true;
    bool converged = true;
    std::string note;
};

void cmd_compare(Params const& p, Budget const& b, Output& o)
{
    auto const s = load_operator(p.op);
    o.config["op"] = p.op;
    o.config["lambda"] = p.lambda;
    o.config["shells"] = b.shells;
    o.config["x_grid"] = b.x_grid;
    o.config["N_grid"] = b.n_grid;

    Complex const tau = tau_diagonal(s);
    std::vector<CompareRow> rows;
    rows.push_back({"tau_diagonal", tau, true, true, ""});

    auto const residue = tau_residue(s, p.lambda, b.x_grid);
    rows.push_back({"tau_residue", residue.extrapolated, true, residue.converged, ""});

    auto const shell = tau_shell(s, b.n_grid);
    rows.push_back({"tau_shell_raw", shell.extrapolated, false, shell.converged, "log-inverse extrapolation of the raw column"});
    rows.push_back({"tau_shell_accelerated", shell.rows.back().accelerated.value_or(Complex{}), true, true, ""});

    auto const ordered = tau_ordered_basis(s, ordered_grid(b.shells), ProductForm::Left);
    rows.push_back({"tau_ordered_basis_doubled", 2.0 * ordered.extrapolated, true, ordered.converged, ""});

    bool diagonal_nonneg = s.is_diagonal();
    for (auto const& [key, v] : s.entries()) {
        diagonal_nonneg = diagonal_nonneg && v.imag() == 0.0 && v.real() >= 0.0;
    }
    if (s.empty()) {
        rows.push_back({"dixmier_estimate", Complex{}, true, true, "zero operator"});
    } else if (diagonal_nonneg) {
        auto const spec = singular_spectrum(weighted_product(s, ProductForm::Left, p.lambda, p.lambda, 1.0), b.shells);
        auto const t = dixmier_estimate(spec, default_checkpoints(spec));
        rows.push_back({"dixmier_estimate", t.extrapolated, true, t.converged, "singular values, left form"});
    } else if (s == adjoint(s)) {
        auto const seq = eigen_sequence(weighted_product(s, ProductForm::Split, p.lambda, p.lambda, 1.0), b.shells);
        auto const t = dixmier_estimate(seq, default_checkpoints(seq));
        rows.push_back({"dixmier_estimate", t.extrapolated, true, t.converged, "eigenvalues, split form"});
    } else {
        o.results["skipped"] = Json::array({"dixmier_estimate: operator is neither non-negative diagonal nor self-adjoint"});
    }

    Json jrows = Json::array();
    double max_gap = 0.0;
    for (auto const& r : rows) {
        double const gap = std::abs(r.value - tau);
        if (r.sharp) max_gap = std::max(max_gap, gap);
        o.converged = o.converged && r.converged;
        Json jr = {{"engine", r.engine}, {"value", cplx(r.value)}, {"gap", gap}, {"sharp", r.sharp},
                   {"converged", r.converged}};
        if (!r.note.empty()) jr["note"] = r.note;
        jrows.push_back(std::move(jr));
    }
    o.results["rows"] = jrows;
    o.results["max_gap"] = max_gap;
    o.csv = [rows, tau](std::ostream& os) {
        os << "engine,re,im,gap,sharp,converged\n";
        for (auto const& r : rows) {
            os << r.engine << ',' << canonical_dump(Json(r.value.real())) << ','
               << canonical_dump(Json(r.value.imag())) << ',' << canonical_dump(Json(std::abs(r.value - tau)))
               << ',' << (r.sharp ? 1 : 0) << ',' << (r.converged ? 1 : 0) << '\n';
        }
    };
}

} // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    auto const start = std::chrono::steady_clock::now();
    Globals g;
    Params p;

    CLI::App app{"magtrace: traces, Dixmier traces and densities of states in the magnetic algebra", "magtrace"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--ell", g.ell, "magnetic length")->capture_default_str();
    app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--out", g.out, "write the report to this file");
    app.add_option("--seed", g.seed, "reserved, unused (no randomized algorithms)");
    app.add_option("--budget-profile", g.budget, "truncation budget")
        ->check(CLI::IsMember({"quick", "full"}))
        ->capture_default_str();

    auto need_op = [&p](CLI::App* c) { c->add_option("--op", p.op, "operator JSON file")->required(); };

    auto* basis = app.add_subcommand("basis", "Laguerre basis functions");
    basis->require_subcommand(1);
    auto* basis_eval = basis->add_subcommand("eval", "evaluate psi_{n,m}(x)");
    basis_eval->add_option("--n", p.n)->required();
    basis_eval->add_option("--m", p.m)->required();
    basis_eval->add_option("--x1", p.x1);
    basis_eval->add_option("--x2", p.x2);
    auto* basis_gram = basis->add_subcommand("gram", "orthonormality deviations by quadrature");
    basis_gram->add_option("--max-index", p.max_index)->capture_default_str();

    auto* op = app.add_subcommand("op", "coefficient operator algebra");
    op->require_subcommand(1);
    auto* op_compose = op->add_subcommand("compose", "product A B");
    op_compose->add_option("--in", p.op)->required();
    op_compose->add_option("--in2", p.op2)->required();
    auto* op_adjoint = op->add_subcommand("adjoint", "adjoint A*");
    op_adjoint->add_option("--in", p.op)->required();
    auto* op_norm = op->add_subcommand("norm", "coefficient lp norm");
    op_norm->add_option("--in", p.op)->required();
    op_norm->add_option("--p", p.p, "p >= 1 or inf")->capture_default_str();
    auto* op_block = op->add_subcommand("block", "matrix block m truncated to N rows");
    op_block->add_option("--in", p.op)->required();
    op_block->add_option("--m", p.m)->capture_default_str();
    op_block->add_option("--N", p.block_order, "rows kept (default: support)");

    auto* kernel = app.add_subcommand("kernel", "integral kernels");
    kernel->require_subcommand(1);
    auto* kernel_eval = kernel->add_subcommand("eval", "kernel function f_A(x)");
    need_op(kernel_eval);
    kernel_eval->add_option("--x1", p.x1);
    kernel_eval->add_option("--x2", p.x2);
    auto* kernel_folner = kernel->add_subcommand("folner", "trace per unit volume over [-R, R]^2");
    need_op(kernel_folner);
    kernel_folner->add_option("--R", p.radius)->capture_default_str();
    auto* kernel_commutant = kernel->add_subcommand("commutant", "commutator with a magnetic translation");
    need_op(kernel_commutant);
    kernel_commutant->add_option("--a1", p.a1)->capture_default_str();
    kernel_commutant->add_option("--a2", p.a2)->capture_default_str();
    kernel_commutant->add_option("--nodes", p.nodes, "grid nodes per axis")->capture_default_str();
    kernel_commutant->add_option("--extent", p.extent, "grid half-width (default 12 ell)");

    auto* trace = app.add_subcommand("trace", "canonical trace engines");
    trace->require_subcommand(1);
    auto* trace_diag = trace->add_subcommand("diag", "diagonal coefficient sum");
    need_op(trace_diag);
    auto* trace_residue = trace->add_subcommand("residue", "residue of x theta_S(x)");
    need_op(trace_residue);
    trace_residue->add_option("--lambda", p.lambda)->capture_default_str();
    trace_residue->add_option("--xgrid", p.x_grid)->delimiter(',');
    auto* trace_shell = trace->add_subcommand("shell", "energy-shell averages");
    need_op(trace_shell);
    trace_shell->add_option("--Ngrid", p.n_grid)->delimiter(',');
    auto* trace_ordered = trace->add_subcommand("ordered", "ordered-eigenbasis partial sums");
    need_op(trace_ordered);
    trace_ordered->add_option("--Ngrid", p.n_grid)->delimiter(',');
    trace_ordered->add_option("--form", p.form)->capture_default_str();

    auto* dixmier = app.add_subcommand("dixmier", "Dixmier traces of weighted operators");
    dixmier->require_subcommand(1);
    std::vector<CLI::App*> dixmier_cmds;
    for (auto const& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"spectrum", "leading singular values or eigenvalues"},
             {"gamma", "gamma_N at checkpoints and the Calderon lower bound"},
             {"estimate", "Dixmier trace by L + c/log N extrapolation"},
             {"tauberian", "Tauberian residue of x Tr(T^{1+x})"}}) {
        auto* c = dixmier->add_subcommand(name, help);
        c->add_option("--op", p.op, "inner operator S (default: pure Q-power weight)");
        c->add_option("--form", p.form)->capture_default_str();
        c->add_option("--lambda", p.lambda)->capture_default_str();
        c->add_option("--lambda2", p.lambda2, "lambda' of the split form (default: lambda)");
        c->add_option("--shells", p.shells, "shell cutoff E / number of m blocks");
        c->add_option("--s", p.power, "weight power (default 1 with --op, 2 without)");
        c->add_option("--kind", p.kind, "singular|eigen")->capture_default_str();
        dixmier_cmds.push_back(c);
    }
    dixmier_cmds[0]->add_option("--limit", p.limit, "values to print")->capture_default_str();
    dixmier_cmds[3]->add_option("--xgrid", p.x_grid)->delimiter(',');

    auto* dos = app.add_subcommand("dos", "integrated density of states");
    dos->require_subcommand(1);
    auto* dos_idos = dos->add_subcommand("idos", "N_H(eps) for the Landau Hamiltonian");
    dos_idos->add_option("--eps", p.eps)->capture_default_str();
    dos_idos->add_option("--J", p.landau_j)->capture_default_str();
    auto* dos_measure_cmd = dos->add_subcommand("measure", "atoms of the DOS measure");
    dos_measure_cmd->add_option("--J", p.landau_j)->capture_default_str();
    auto* dos_spectral = dos->add_subcommand("spectral", "tau(f(H)) against (Omega/2) int f dmu");
    dos_spectral->add_option("--f", p.f, "test function JSON file")->required();
    dos_spectral->add_option("--J", p.landau_j)->capture_default_str();
    auto* dos_approx = dos->add_subcommand("approx", "IDOS by energy-shell averages");
    dos_approx->add_option("--eps", p.eps)->capture_default_str();
    dos_approx->add_option("--Ngrid", p.n_grid)->delimiter(',');
    dos_approx->add_option("--J", p.landau_j)->capture_default_str();
    auto* dos_dixmier = dos->add_subcommand("dixmier", "Dixmier trace of Q^{-1} f(H) against the DOS integral");
    dos_dixmier->add_option("--f", p.f, "test function JSON file")->required();
    dos_dixmier->add_option("--form", p.form)->capture_default_str();
    dos_dixmier->add_option("--lambda", p.lambda)->capture_default_str();
    dos_dixmier->add_option("--lambda2", p.lambda2);
    dos_dixmier->add_option("--shells", p.shells, "number of m blocks");
    dos_dixmier->add_option("--J", p.landau_j)->capture_default_str();

    auto* compare = app.add_subcommand("compare", "all trace engines on one operator");
    need_op(compare);
    compare->add_option("--lambda", p.lambda)->capture_default_str();

    std::vector<std::string> argv_store{"magtrace"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char const*> argv;
    for (auto const& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kExitOk;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (CLI::ParseError const& e) {
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    std::string command;
    for (CLI::App* level = &app;;) {
        auto const subs = level->get_subcommands();
        if (subs.empty()) break;
        level = subs.front();
        command += (command.empty() ? "" : " ") + level->get_name();
    }

    Output o;
    try {
        auto const cfg = make_config(g.ell);
        auto const budget = budget_for(g.budget);
        if (basis_eval->parsed()) cmd_basis_eval(p, cfg, o);
        else if (basis_gram->parsed()) cmd_basis_gram(p, cfg, o);
        else if (op_compose->parsed()) cmd_op_compose(p, o);
        else if (op_adjoint->parsed()) cmd_op_adjoint(p, o);
        else if (op_norm->parsed()) cmd_op_norm(p, o);
        else if (op_block->parsed()) cmd_op_block(p, o);
        else if (kernel_eval->parsed()) cmd_kernel_eval(p, cfg, o);
        else if (kernel_folner->parsed()) cmd_kernel_folner(p, cfg, o);
        else if (kernel_commutant->parsed()) cmd_kernel_commutant(p, cfg, o);
        else if (trace_diag->parsed()) cmd_trace_diag(p, o);
        else if (trace_residue->parsed()) cmd_trace_residue(p, budget, o);
        else if (trace_shell->parsed()) cmd_trace_shell(p, budget, o);
        else if (trace_ordered->parsed()) cmd_trace_ordered(p, budget, o);
        else if (dixmier_cmds[0]->parsed()) cmd_dixmier_spectrum(p, budget, o);
        else if (dixmier_cmds[1]->parsed()) cmd_dixmier_gamma(p, budget, o);
        else if (dixmier_cmds[2]->parsed()) cmd_dixmier_estimate(p, budget, o);
        else if (dixmier_cmds[3]->parsed()) cmd_dixmier_tauberian(p, budget, o);
        else if (dos_idos->parsed()) cmd_dos_idos(p, cfg, o);
        else if (dos_measure_cmd->parsed()) cmd_dos_measure(p, cfg, o);
        else if (dos_spectral->parsed()) cmd_dos_spectral(p, cfg, o);
        else if (dos_approx->parsed()) cmd_dos_approx(p, budget, cfg, o);
        else if (dos_dixmier->parsed()) cmd_dos_dixmier(p, budget, cfg, o);
        else if (compare->parsed()) cmd_compare(p, budget, o);
        else {
            err << "usage error: incomplete command\n\n" << app.help();
            return kExitUsage;
        }
    } catch (std::logic_error const& e) { // DomainError and friends
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (std::exception const& e) { // RangeError, ResourceError, ComputationError, malformed JSON
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }

    o.config["ell"] = g.ell;
    o.config["budget_profile"] = g.budget;
    o.config["seed"] = g.seed;
    Json report = {{"format_version", kReportVersion},
                   {"command", command},
                   {"config", o.config},
                   {"results", o.results},
                   {"converged", o.converged}};

    std::ofstream file;
    if (!g.out.empty()) {
        file.open(g.out);
        if (!file) {
            err << "error: cannot write " << g.out << '\n';
            return kExitDomain;
        }
    }
    std::ostream& sink = g.out.empty() ? out : file;
    if (g.format == "csv") {
        if (o.csv) o.csv(sink);
        else generic_csv(sink, o.results);
    } else {
        sink << canonical_dump(report) << '\n';
    }

    double const seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "wall time: " << std::fixed << std::setprecision(3) << seconds << " s\n";
    if (!o.converged) {
        err << "warning: at least one extrapolation did not meet its tolerance\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

} // namespace magtrace::cli
