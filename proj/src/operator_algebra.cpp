#include "magtrace/operator_algebra.hpp"

#include "magtrace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magtrace {

namespace {

void require_lambda(double lambda, char const* name)
{
    if (!(lambda > -1.0) || !std::isfinite(lambda)) {
        std::ostringstream msg;
        msg << name << " must exceed -1 (Q + lambda 1 is invertible only for lambda > -1), got " << lambda;
        throw DomainError(msg.str());
    }
}

void check_index(int j, int k)
{
    if (j < 0 || k < 0) {
        throw DomainError("transition indices must be non-negative");
    }
}

} // namespace

std::string to_string(OperatorClass cls)
{
    switch (cls) {
    case OperatorClass::L1: return "L1";
    case OperatorClass::L2: return "L2";
    case OperatorClass::Itau: return "Itau";
    case OperatorClass::Unclassified: return "unclassified";
    }
    return "unclassified";
}

OperatorClass operator_class_from_string(std::string const& name)
{
    if (name == "L1") return OperatorClass::L1;
    if (name == "L2") return OperatorClass::L2;
    if (name == "Itau") return OperatorClass::Itau;
    if (name == "unclassified" || name.empty()) return OperatorClass::Unclassified;
    throw DomainError("unknown operator class '" + name + "' (expected L1, L2 or Itau)");
}

CoefficientOperator::CoefficientOperator(EntryMap entries, OperatorClass cls)
    : class_(cls)
{
    for (auto const& [key, value] : entries) {
        check_index(key.first, key.second);
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
            throw DomainError("coefficient entries must be finite");
        }
        if (value != Complex{0.0, 0.0}) {
            entries_.emplace(key, value);
        }
    }
}

CoefficientOperator CoefficientOperator::transition(int j, int k, Complex c)
{
    return CoefficientOperator({{{j, k}, c}}, OperatorClass::L1);
}

CoefficientOperator CoefficientOperator::landau_projection(int j)
{
    return transition(j, j);
}

CoefficientOperator CoefficientOperator::diagonal(std::vector<Complex> const& d, OperatorClass cls)
{
    EntryMap entries;
    for (std::size_t n = 0; n < d.size(); ++n) {
        entries[{static_cast<int>(n), static_cast<int>(n)}] = d[n];
    }
    return CoefficientOperator(std::move(entries), cls);
}

Complex CoefficientOperator::entry(int j, int k) const
{
    auto const it = entries_.find({j, k});
    return it == entries_.end() ? Complex{} : it->second;
}

CoefficientOperator CoefficientOperator::with_class(OperatorClass cls) const
{
    CoefficientOperator copy = *this;
    copy.class_ = cls;
    return copy;
}

int CoefficientOperator::max_index() const noexcept
{
    int result = -1;
    for (auto const& [key, value] : entries_) {
        result = std::max({result, key.first, key.second});
    }
    return result;
}

bool CoefficientOperator::is_diagonal() const noexcept
{
    return std::all_of(entries_.begin(), entries_.end(),
                       [](auto const& e) { return e.first.first == e.first.second; });
}

std::map<int, Complex> CoefficientOperator::diagonal_entries() const
{
    std::map<int, Complex> result;
    for (auto const& [key, value] : entries_) {
        if (key.first == key.second) {
            result[key.first] = value;
        }
    }
    return result;
}

CoefficientOperator CoefficientOperator::operator+(CoefficientOperator const& other) const
{
    EntryMap sum = entries_;
    for (auto const& [key, value] : other.entries_) {
        sum[key] += value;
    }
    OperatorClass const cls = class_ == other.class_ ? class_ : OperatorClass::Unclassified;
    return CoefficientOperator(std::move(sum), cls);
}

CoefficientOperator CoefficientOperator::operator-(CoefficientOperator const& other) const
{
    return *this + Complex{-1.0, 0.0} * other;
}

CoefficientOperator operator*(Complex c, CoefficientOperator const& a)
{
    CoefficientOperator::EntryMap scaled;
    for (auto const& [key, value] : a.entries_) {
        scaled[key] = c * value;
    }
    return CoefficientOperator(std::move(scaled), a.class_);
}

CoefficientOperator make_identity()
{
    throw DomainError("the magnetic C*-algebra is non-unital: no identity element is representable");
}

CoefficientOperator adjoint(CoefficientOperator const& a)
{
    CoefficientOperator::EntryMap result;
    for (auto const& [key, value] : a.entries()) {
        result[{key.second, key.first}] = std::conj(value);
    }
    return CoefficientOperator(std::move(result), a.declared_class());
}

CoefficientOperator compose(CoefficientOperator const& a, CoefficientOperator const& b)
{
    // group b's entries by their target index j: b_{m,j}
    std::map<int, std::vector<std::pair<int, Complex>>> b_by_target;
    for (auto const& [key, value] : b.entries()) {
        b_by_target[key.second].emplace_back(key.first, value);
    }
    CoefficientOperator::EntryMap result;
    for (auto const& [key, a_value] : a.entries()) {
        auto const it = b_by_target.find(key.first);
        if (it == b_by_target.end()) {
            continue;
        }
        for (auto const& [m, b_value] : it->second) {
            result[{m, key.second}] += a_value * b_value;
        }
    }
    OperatorClass cls = OperatorClass::Unclassified;
    if (a.declared_class() == OperatorClass::L1 && b.declared_class() == OperatorClass::L1) {
        cls = OperatorClass::L1;
    }
    return CoefficientOperator(std::move(result), cls);
}

double lp_norm(CoefficientOperator const& a, double p)
{
    if (!(p >= 1.0)) {
        throw DomainError("l^p norm requires p >= 1");
    }
    if (std::isinf(p)) {
        double sup = 0.0;
        for (auto const& [key, value] : a.entries()) {
            sup = std::max(sup, std::abs(value));
        }
        return sup;
    }
    double sum = 0.0;
    for (auto const& [key, value] : a.entries()) {
        sum += std::pow(std::abs(value), p);
    }
    return std::pow(sum, 1.0 / p);
}

// --- DiagonalWeight -------------------------------------------------------

DiagonalWeight DiagonalWeight::q_power(double s, double lambda)
{
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DomainError("Q-power exponent s must be positive");
    }
    require_lambda(lambda, "lambda");
    DiagonalWeight w;
    w.factors_.push_back(Factor{Kind::QPower, s, lambda, 0.0, {}, {}});
    return w;
}

DiagonalWeight DiagonalWeight::m_power(double r)
{
    if (!std::isfinite(r)) {
        throw DomainError("M-power exponent must be finite");
    }
    DiagonalWeight w;
    w.factors_.push_back(Factor{Kind::MPower, 0.0, 0.0, r, {}, {}});
    return w;
}

DiagonalWeight DiagonalWeight::shell_function(std::string tag, std::function<double(int)> fn)
{
    if (!fn) {
        throw DomainError("shell function must be callable");
    }
    DiagonalWeight w;
    w.factors_.push_back(Factor{Kind::Shell, 0.0, 0.0, 0.0, std::move(tag), std::move(fn)});
    return w;
}

double DiagonalWeight::value(int n, int m) const
{
    double v = 1.0;
    for (auto const& f : factors_) {
        switch (f.kind) {
        case Kind::QPower: v *= std::pow(n + m + 1.0 + f.lambda, -f.s); break;
        case Kind::MPower: v *= std::pow(m + 1.0, f.r); break;
        case Kind::Shell: v *= f.shell_fn(n + m + 1); break;
        }
    }
    return v;
}

double DiagonalWeight::q_exponent() const noexcept
{
    double s = 0.0;
    for (auto const& f : factors_) {
        if (f.kind == Kind::QPower) s += f.s;
    }
    return s;
}

double DiagonalWeight::m_exponent() const noexcept
{
    double r = 0.0;
    for (auto const& f : factors_) {
        if (f.kind == Kind::MPower) r += f.r;
    }
    return r;
}

bool DiagonalWeight::has_shell_factor() const noexcept
{
    return std::any_of(factors_.begin(), factors_.end(), [](Factor const& f) { return f.kind == Kind::Shell; });
}

std::string DiagonalWeight::describe() const
{
    std::ostringstream out;
    bool first = true;
    for (auto const& f : factors_) {
        if (!first) out << " * ";
        first = false;
        switch (f.kind) {
        case Kind::QPower: out << "Q_" << f.lambda << "^-" << f.s; break;
        case Kind::MPower: out << "M^" << f.r; break;
        case Kind::Shell: out << "shell[" << f.tag << "]"; break;
        }
    }
    if (first) out << "1";
    return out.str();
}

DiagonalWeight operator*(DiagonalWeight const& a, DiagonalWeight const& b)
{
    DiagonalWeight w = a;
    w.factors_.insert(w.factors_.end(), b.factors_.begin(), b.factors_.end());
    return w;
}

// --- WeightedProduct ------------------------------------------------------

std::string to_string(ProductForm form)
{
    switch (form) {
    case ProductForm::Left: return "left";
    case ProductForm::Right: return "right";
    case ProductForm::Split: return "split";
    }
    return "left";
}

ProductForm product_form_from_string(std::string const& name)
{
    if (name == "left") return ProductForm::Left;
    if (name == "right") return ProductForm::Right;
    if (name == "split") return ProductForm::Split;
    throw DomainError("unknown weight form '" + name + "' (expected left, right or split)");
}

WeightedProduct::WeightedProduct(CoefficientOperator s, ProductForm form, double lambda, double lambda_prime,
                                 double power)
    : inner_(std::move(s)), form_(form), lambda_(lambda), lambda_prime_(lambda_prime), power_(power)
{
    require_lambda(lambda, "lambda");
    require_lambda(lambda_prime, "lambda'");
    if (!(power > 0.0) || !std::isfinite(power)) {
        throw DomainError("weight exponent s must be positive");
    }
}

Complex WeightedProduct::block_entry(int n, int n_prime, int m) const
{
    Complex const a = inner_.entry(n_prime, n);
    if (a == Complex{}) {
        return a;
    }
    switch (form_) {
    case ProductForm::Left: return std::pow(n + m + 1.0 + lambda_, -power_) * a;
    case ProductForm::Right: return a * std::pow(n_prime + m + 1.0 + lambda_, -power_);
    case ProductForm::Split:
        return std::pow(n + m + 1.0 + lambda_, -0.5 * power_) * a
            * std::pow(n_prime + m + 1.0 + lambda_prime_, -0.5 * power_);
    }
    return {};
}

double WeightedProduct::block_weight_bound(int m) const
{
    switch (form_) {
    case ProductForm::Left:
    case ProductForm::Right: return std::pow(m + 1.0 + lambda_, -power_);
    case ProductForm::Split:
        return std::pow(m + 1.0 + lambda_, -0.5 * power_) * std::pow(m + 1.0 + lambda_prime_, -0.5 * power_);
    }
    return 0.0;
}

std::string WeightedProduct::describe() const
{
    std::ostringstream out;
    out << to_string(form_) << "(s=" << power_ << ", lambda=" << lambda_;
    if (form_ == ProductForm::Split) out << ", lambda'=" << lambda_prime_;
    out << ", entries=" << inner_.size() << ")";
    return out.str();
}

WeightedProduct weighted_product(CoefficientOperator const& s, ProductForm form, double lambda,
                                 double lambda_prime, double power)
{
    return WeightedProduct(s, form, lambda, lambda_prime, power);
}

// --- blocks -----------------------------------------------------------------

namespace {

void require_block_args(int m, int truncation)
{
    if (truncation < 1) {
        throw DomainError("block truncation order must be at least 1");
    }
    if (m < 0) {
        throw DomainError("block index m must be non-negative");
    }
}

} // namespace

TruncatedMatrix matrix_block(CoefficientOperator const& a, int m, int truncation)
{
    require_block_args(m, truncation);
    TruncatedMatrix block{m, Eigen::MatrixXcd::Zero(truncation, truncation)};
    for (auto const& [key, value] : a.entries()) {
        auto const [j, k] = key;
        // <n,m|A|n',m> = a_{n',n}: row n = k, column n' = j
        if (j < truncation && k < truncation) {
            block.matrix(k, j) = value;
        }
    }
    return block;
}

TruncatedMatrix matrix_block(DiagonalWeight const& w, int m, int truncation)
{
    require_block_args(m, truncation);
    TruncatedMatrix block{m, Eigen::MatrixXcd::Zero(truncation, truncation)};
    for (int n = 0; n < truncation; ++n) {
        block.matrix(n, n) = w.value(n, m);
    }
    return block;
}

TruncatedMatrix matrix_block(WeightedProduct const& t, int m, int truncation)
{
    require_block_args(m, truncation);
    TruncatedMatrix block{m, Eigen::MatrixXcd::Zero(truncation, truncation)};
    for (auto const& [key, value] : t.inner().entries()) {
        auto const [j, k] = key;
        if (j < truncation && k < truncation) {
            block.matrix(k, j) = t.block_entry(k, j, m);
        }
    }
    return block;
}

double covering_block_norm(CoefficientOperator const& t)
{
    int const order = t.max_index() + 1;
    if (order <= 0) {
        return 0.0;
    }
    auto const block = matrix_block(t, 0, order);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block.matrix);
    return svd.singularValues()(0);
}

CoefficientOperator absorb_product(CoefficientOperator const& a1, CoefficientOperator const& t,
                                   CoefficientOperator const& a2)
{
    if (a1.declared_class() != OperatorClass::L1 || a2.declared_class() != OperatorClass::L1) {
        throw DomainError("absorption product requires A1 and A2 declared L1");
    }
    CoefficientOperator::EntryMap kappa;
    // kappa_{p,s} = sum a1_{r,s} t_{q,r} a2_{p,q}
    for (auto const& [k1, v1] : a1.entries()) {
        int const r = k1.first;
        int const s = k1.second;
        for (auto const& [kt, vt] : t.entries()) {
            if (kt.second != r) continue;
            int const q = kt.first;
            for (auto const& [k2, v2] : a2.entries()) {
                if (k2.second != q) continue;
                kappa[{k2.first, s}] += v1 * vt * v2;
            }
        }
    }
    return CoefficientOperator(std::move(kappa), OperatorClass::L1);
}

AbsorptionBound absorption_bound(CoefficientOperator const& a1, CoefficientOperator const& t,
                                 CoefficientOperator const& a2)
{
    AbsorptionBound result;
    result.l1_result = lp_norm(absorb_product(a1, t, a2), 1.0);
    result.bound = covering_block_norm(t) * lp_norm(a1, 1.0) * lp_norm(a2, 1.0);
    result.margin = result.bound - result.l1_result;
    return result;
}

CoefficientBoundReport coefficient_bound_check(CoefficientOperator const& t, int truncation)
{
    CoefficientBoundReport report;
    report.truncation = std::max({truncation, t.max_index() + 1, 1});
    report.max_entry = lp_norm(t, std::numeric_limits<double>::infinity());
    auto const block = matrix_block(t, 0, report.truncation);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block.matrix);
    report.block_norm = svd.singularValues()(0);
    report.margin = report.block_norm - report.max_entry;
    return report;
}

std::string to_string(TailConvergence c)
{
    switch (c) {
    case TailConvergence::Convergent: return "convergent";
    case TailConvergence::Divergent: return "divergent";
    case TailConvergence::Unknown: return "unknown";
    }
    return "unknown";
}

HilbertSchmidtReport hs_kernel_norm(DiagonalWeight const& w, CoefficientOperator const& a, int m_max)
{
    if (m_max < 1) {
        throw DomainError("m_max must be at least 1");
    }
    HilbertSchmidtReport report;
    double sum = 0.0;
    for (int m = 0; m <= m_max; ++m) {
        for (auto const& [key, value] : a.entries()) {
            // <n,m|W A|n',m> = W(n,m) a_{n',n} with n = k
            double const weight = w.value(key.second, m);
            sum += weight * weight * std::norm(value);
        }
    }
    report.partial_norm = std::sqrt(sum);
    if (w.has_shell_factor()) {
        report.tail = TailConvergence::Unknown;
    } else {
        report.tail = (w.q_exponent() - w.m_exponent() > 0.5) ? TailConvergence::Convergent
                                                               : TailConvergence::Divergent;
    }
    return report;
}

} // namespace magtrace
