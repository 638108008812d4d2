#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace magtrace {

using Complex = std::complex<double>;

/// Summability class the caller asserts for an operator. Advisory metadata:
/// no operation reclassifies silently.
enum class OperatorClass { L1, L2, Itau, Unclassified };

std::string to_string(OperatorClass cls);
OperatorClass operator_class_from_string(std::string const& name);

/// Finite coefficient family {a_{j,k}} of A = sum a_{j,k} Y_{j->k}, where the
/// transition operator Y_{j->k} maps psi_{j,m} to psi_{k,m}. Absent entries are
/// zero; stored entries are finite and non-zero.
class CoefficientOperator {
public:
    using Key = std::pair<int, int>; // (j, k)
    using EntryMap = std::map<Key, Complex>;

    CoefficientOperator() = default;
    explicit CoefficientOperator(EntryMap entries, OperatorClass cls = OperatorClass::Unclassified);

    /// c * Y_{j->k}
    static CoefficientOperator transition(int j, int k, Complex c = 1.0);
    /// Landau projection Pi_j = Y_{j->j}
    static CoefficientOperator landau_projection(int j);
    /// Diagonal operator sum_j d[j] Pi_j
    static CoefficientOperator diagonal(std::vector<Complex> const& d, OperatorClass cls = OperatorClass::L1);

    Complex entry(int j, int k) const;
    EntryMap const& entries() const noexcept { return entries_; }
    OperatorClass declared_class() const noexcept { return class_; }
    CoefficientOperator with_class(OperatorClass cls) const;

    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    /// Largest j or k among stored entries, -1 when empty.
    int max_index() const noexcept;
    bool is_diagonal() const noexcept;
    /// Stored diagonal entries s_{n,n}, keyed by n.
    std::map<int, Complex> diagonal_entries() const;

    CoefficientOperator operator+(CoefficientOperator const& other) const;
    CoefficientOperator operator-(CoefficientOperator const& other) const;
    friend CoefficientOperator operator*(Complex c, CoefficientOperator const& a);

    friend bool operator==(CoefficientOperator const& a, CoefficientOperator const& b)
    {
        return a.entries_ == b.entries_;
    }

private:
    EntryMap entries_;
    OperatorClass class_ = OperatorClass::Unclassified;
};

/// The magnetic C*-algebra has no unit; always throws DomainError.
[[noreturn]] CoefficientOperator make_identity();

CoefficientOperator adjoint(CoefficientOperator const& a);
/// (AB)_{m,k} = sum_j a_{j,k} b_{m,j}
CoefficientOperator compose(CoefficientOperator const& a, CoefficientOperator const& b);
double lp_norm(CoefficientOperator const& a, double p);

/// Operator diagonal in the Laguerre basis: a product of factors, each one of
/// (n+m+1+lambda)^{-s}, (m+1)^r or a tagged function of the shell n+m+1.
class DiagonalWeight {
public:
    enum class Kind { QPower, MPower, Shell };

    struct Factor {
        Kind kind;
        double s = 0.0;
        double lambda = 0.0;
        double r = 0.0;
        std::string tag;
        std::function<double(int)> shell_fn;
    };

    static DiagonalWeight q_power(double s, double lambda);
    static DiagonalWeight m_power(double r);
    static DiagonalWeight shell_function(std::string tag, std::function<double(int)> fn);

    double value(int n, int m) const;
    std::vector<Factor> const& factors() const noexcept { return factors_; }

    /// Net exponents: value ~ (m+1)^{m_exponent} / shell^{q_exponent} along m.
    double q_exponent() const noexcept;
    double m_exponent() const noexcept;
    bool has_shell_factor() const noexcept;
    std::string describe() const;

    friend DiagonalWeight operator*(DiagonalWeight const& a, DiagonalWeight const& b);

private:
    std::vector<Factor> factors_;
};

enum class ProductForm { Left, Right, Split };
std::string to_string(ProductForm form);
ProductForm product_form_from_string(std::string const& name);

/// Lazy description of Q_l^{-s} S (left), S Q_l^{-s} (right) or
/// Q_l^{-s/2} S Q_{l'}^{-s/2} (split). Block diagonal in m.
class WeightedProduct {
public:
    WeightedProduct(CoefficientOperator s, ProductForm form, double lambda, double lambda_prime, double power);

    CoefficientOperator const& inner() const noexcept { return inner_; }
    ProductForm form() const noexcept { return form_; }
    double lambda() const noexcept { return lambda_; }
    double lambda_prime() const noexcept { return lambda_prime_; }
    double power() const noexcept { return power_; }

    /// <n,m| T |n',m>
    Complex block_entry(int n, int n_prime, int m) const;
    /// Largest weight factor met in block m, used for tail bounds:
    /// every singular value of block m is at most this times the norm of S.
    double block_weight_bound(int m) const;
    std::string describe() const;

private:
    CoefficientOperator inner_;
    ProductForm form_;
    double lambda_;
    double lambda_prime_;
    double power_;
};

/// Throws DomainError unless lambda, lambda_prime > -1 and s > 0.
WeightedProduct weighted_product(CoefficientOperator const& s, ProductForm form, double lambda,
                                 double lambda_prime, double power);

struct TruncatedMatrix {
    int block = 0;
    Eigen::MatrixXcd matrix; // rows n, columns n'
};

TruncatedMatrix matrix_block(CoefficientOperator const& a, int m, int truncation);
TruncatedMatrix matrix_block(DiagonalWeight const& w, int m, int truncation);
TruncatedMatrix matrix_block(WeightedProduct const& t, int m, int truncation);

/// Spectral norm of the smallest block covering every stored index; a lower
/// estimate of the operator norm.
double covering_block_norm(CoefficientOperator const& t);

/// kappa_{p,s} = sum_{q,r} a1_{r,s} t_{q,r} a2_{p,q}, the coefficients of A1 T A2.
/// A1 and A2 must be declared L1.
CoefficientOperator absorb_product(CoefficientOperator const& a1, CoefficientOperator const& t,
                                   CoefficientOperator const& a2);

struct AbsorptionBound {
    double l1_result = 0.0;
    double bound = 0.0; // ||T_trunc|| ||A1||_1 ||A2||_1
    double margin = 0.0;
};
AbsorptionBound absorption_bound(CoefficientOperator const& a1, CoefficientOperator const& t,
                                 CoefficientOperator const& a2);

struct CoefficientBoundReport {
    double max_entry = 0.0;
    double block_norm = 0.0;
    double margin = 0.0;
    int truncation = 0;
};
/// max |t_{n,k}| against the spectral norm of a truncated block of order
/// max(truncation, covering order).
CoefficientBoundReport coefficient_bound_check(CoefficientOperator const& t, int truncation);

enum class TailConvergence { Convergent, Divergent, Unknown };
std::string to_string(TailConvergence c);

struct HilbertSchmidtReport {
    double partial_norm = 0.0;
    TailConvergence tail = TailConvergence::Unknown;
};
/// Partial l2 norm of the kernel of W A over blocks m <= m_max, and whether the
/// m-series converges (net exponent q - r > 1/2).
HilbertSchmidtReport hs_kernel_norm(DiagonalWeight const& w, CoefficientOperator const& a, int m_max);

} // namespace magtrace
