#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hessianlab {

/// Eigenvalue tuple (lambda_1, ..., lambda_n).
using Spectrum = std::vector<double>;

enum class OperatorKind { SigmaKRoot, HessianQuotient };

/// One member of the two operator families: f = sigma_k^{1/k} on Gamma_k,
/// or the Hessian quotient f = (sigma_k/sigma_l)^{1/(k-l)} on Gamma_k.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::SigmaKRoot;
    int n = 1;
    int k = 1;
    int l = 0; // quotient only

    static OperatorSpec sigma_root(int k, int n);
    static OperatorSpec quotient(int k, int l, int n);

    /// Compact text form "sigma:k/n" or "quot:k:l/n".
    static OperatorSpec parse(const std::string& text);
    std::string to_string() const;

    /// True when f_inf is a finite function (quotient family).
    bool finite_f_inf() const { return kind == OperatorKind::HessianQuotient; }
};

/// Identifies one of the admissibility cones.
struct ConeId {
    enum Tag { GammaK, GammaInf, GammaPrime, Gamma1, GammaN, FullSpace };
    Tag tag = Gamma1;
    int k = 0;         // GammaK only
    OperatorSpec spec; // GammaInf / GammaPrime only

    static ConeId gamma_k(int k);
    static ConeId gamma_inf(const OperatorSpec& spec);
    static ConeId gamma_prime(const OperatorSpec& spec);
    static ConeId gamma_1();
    static ConeId gamma_n();
    static ConeId full_space();
};

/// Thrown when a spectrum leaves the admissibility cone of an operation.
/// failing_index is the first j with sigma_j <= 0 (0 when not applicable).
class cone_error : public std::domain_error {
public:
    cone_error(const std::string& what, int failing_index)
        : std::domain_error(what), failing_index(failing_index) {}
    int failing_index;
};

/// j-th elementary symmetric polynomial, sigma_0 := 1.
/// Coefficient recursion of prod_i (1 + lambda_i t), ascending order.
double sigma(int j, const Spectrum& lambda);

/// Strict membership (no tolerance); callers add margins explicitly.
bool in_cone(const ConeId& cone, const Spectrum& lambda);

/// Signed distance to the cone boundary along the diagonal direction:
/// the largest s with lambda - s*(1,...,1) in the cone (negative when
/// lambda is outside). Found by bisection to 1e-12 absolute.
double cone_margin(const ConeId& cone, const Spectrum& lambda);

double eval_f(const OperatorSpec& spec, const Spectrum& lambda);

/// Analytic gradient of f; every component strictly positive on Gamma.
Spectrum grad_f(const OperatorSpec& spec, const Spectrum& lambda);

/// Value of f_inf, with a distinguished +infinity marker for the
/// sigma_k^{1/k} family. The marker compares greater than every real and
/// never enters floating-point arithmetic.
struct FInfValue {
    bool finite = true;
    double value = 0.0;

    static FInfValue infinite() { return {false, 0.0}; }
    double value_or(double big) const { return finite ? value : big; }
};

inline bool operator<(const FInfValue& a, double b) { return a.finite && a.value < b; }
inline bool operator>=(const FInfValue& a, double b) { return !(a < b); }

FInfValue eval_f_inf(const OperatorSpec& spec, const Spectrum& lambda);

/// Sequence f(lambda with lambda_i := R) over R in r_list; verifies the
/// defining limit of f_inf numerically. Monotone increasing in R.
std::vector<double> f_inf_limit_check(const OperatorSpec& spec, const Spectrum& lambda,
                                      int i, const std::vector<double>& r_list);

} // namespace hessianlab
