#include "hessianlab/symfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hessianlab {

OperatorSpec OperatorSpec::sigma_root(int k, int n) {
    if (n < 1 || k < 1 || k > n)
        throw std::invalid_argument("sigma_root: need 1 <= k <= n");
    return {OperatorKind::SigmaKRoot, n, k, 0};
}

OperatorSpec OperatorSpec::quotient(int k, int l, int n) {
    if (n < 1 || l < 1 || l >= k || k > n)
        throw std::invalid_argument("quotient: need 1 <= l < k <= n");
    return {OperatorKind::HessianQuotient, n, k, l};
}

OperatorSpec OperatorSpec::parse(const std::string& text) {
    auto fail = [&] { throw std::invalid_argument("bad operator spec '" + text + "' (want sigma:k/n or quot:k:l/n)"); };
    auto colon = text.find(':');
    if (colon == std::string::npos) fail();
    const std::string head = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    auto slash = rest.find('/');
    if (slash == std::string::npos) fail();
    try {
        int n = std::stoi(rest.substr(slash + 1));
        if (head == "sigma") {
            return sigma_root(std::stoi(rest.substr(0, slash)), n);
        } else if (head == "quot") {
            auto colon2 = rest.find(':');
            if (colon2 == std::string::npos || colon2 > slash) fail();
            int k = std::stoi(rest.substr(0, colon2));
            int l = std::stoi(rest.substr(colon2 + 1, slash - colon2 - 1));
            return quotient(k, l, n);
        }
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    fail();
    return {};
}

std::string OperatorSpec::to_string() const {
    if (kind == OperatorKind::SigmaKRoot)
        return "sigma:" + std::to_string(k) + "/" + std::to_string(n);
    return "quot:" + std::to_string(k) + ":" + std::to_string(l) + "/" + std::to_string(n);
}

ConeId ConeId::gamma_k(int k) {
    if (k < 1) throw std::invalid_argument("gamma_k: k >= 1 required");
    ConeId c; c.tag = GammaK; c.k = k; return c;
}
ConeId ConeId::gamma_inf(const OperatorSpec& spec) { ConeId c; c.tag = GammaInf; c.spec = spec; return c; }
ConeId ConeId::gamma_prime(const OperatorSpec& spec) { ConeId c; c.tag = GammaPrime; c.spec = spec; return c; }
ConeId ConeId::gamma_1() { ConeId c; c.tag = Gamma1; return c; }
ConeId ConeId::gamma_n() { ConeId c; c.tag = GammaN; return c; }
ConeId ConeId::full_space() { ConeId c; c.tag = FullSpace; return c; }

double sigma(int j, const Spectrum& lambda) {
    const int n = static_cast<int>(lambda.size());
    if (j < 0 || j > n)
        throw std::invalid_argument("sigma: index out of range");
    // coefficients of prod (1 + lambda_i t), updated high-to-low
    std::vector<double> c(static_cast<size_t>(j) + 1, 0.0);
    c[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int m = std::min(j, i + 1); m >= 1; --m)
            c[m] += lambda[i] * c[m - 1];
    return c[j];
}

namespace {

// sigma_j of the tuple with index skip removed
double sigma_skip(int j, const Spectrum& lambda, int skip) {
    const int n = static_cast<int>(lambda.size());
    if (j < 0 || j > n - 1)
        throw std::invalid_argument("sigma_skip: index out of range");
    std::vector<double> c(static_cast<size_t>(j) + 1, 0.0);
    c[0] = 1.0;
    int seen = 0;
    for (int i = 0; i < n; ++i) {
        if (i == skip) continue;
        for (int m = std::min(j, seen + 1); m >= 1; --m)
            c[m] += lambda[i] * c[m - 1];
        ++seen;
    }
    return c[j];
}

// first j in 1..kmax with sigma_j <= 0, or 0 if none
int first_nonpositive_sigma(const Spectrum& lambda, int kmax) {
    for (int j = 1; j <= kmax; ++j)
        if (!(sigma(j, lambda) > 0.0)) return j;
    return 0;
}

// Gamma' membership of the (n-1)-tuple obtained by skipping index skip.
bool skipped_in_gamma_prime(const OperatorSpec& spec, const Spectrum& lambda, int skip) {
    const int jmax = (spec.kind == OperatorKind::HessianQuotient) ? spec.k - 1 : spec.k - 1;
    // Gamma_0 convention: no constraints when k - 1 == 0.
    for (int j = 1; j <= jmax; ++j)
        if (!(sigma_skip(j, lambda, skip) > 0.0)) return false;
    return true;
}

void require_dim(const OperatorSpec& spec, const Spectrum& lambda) {
    if (static_cast<int>(lambda.size()) != spec.n)
        throw std::invalid_argument("spectrum dimension does not match operator spec");
}

void require_gamma(const OperatorSpec& spec, const Spectrum& lambda) {
    int j = first_nonpositive_sigma(lambda, spec.k);
    if (j != 0)
        throw cone_error("spectrum outside Gamma_" + std::to_string(spec.k) +
                             ": sigma_" + std::to_string(j) + " <= 0",
                         j);
}

} // namespace

bool in_cone(const ConeId& cone, const Spectrum& lambda) {
    const int n = static_cast<int>(lambda.size());
    if (n < 1) throw std::invalid_argument("in_cone: empty spectrum");
    switch (cone.tag) {
    case ConeId::GammaK:
        if (cone.k > n) throw std::invalid_argument("in_cone: GammaK(k) needs k <= n");
        return first_nonpositive_sigma(lambda, cone.k) == 0;
    case ConeId::GammaInf: {
        if (cone.spec.n != n) throw std::invalid_argument("in_cone: dimension mismatch");
        for (int i = 0; i < n; ++i)
            if (!skipped_in_gamma_prime(cone.spec, lambda, i)) return false;
        return true;
    }
    case ConeId::GammaPrime: {
        // lambda is already the projected (n-1)-tuple of the spec.
        if (cone.spec.n != n + 1) throw std::invalid_argument("in_cone: GammaPrime expects an (n-1)-tuple");
        for (int j = 1; j <= cone.spec.k - 1; ++j)
            if (!(sigma(j, lambda) > 0.0)) return false;
        return true;
    }
    case ConeId::Gamma1: {
        double s = 0.0;
        for (double x : lambda) s += x;
        return s > 0.0;
    }
    case ConeId::GammaN:
        return std::all_of(lambda.begin(), lambda.end(), [](double x) { return x > 0.0; });
    case ConeId::FullSpace:
        return true;
    }
    return false;
}

double cone_margin(const ConeId& cone, const Spectrum& lambda) {
    double scale = 1.0;
    for (double x : lambda) scale = std::max(scale, std::fabs(x));
    auto member_at = [&](double s) {
        Spectrum shifted = lambda;
        for (double& x : shifted) x -= s;
        return in_cone(cone, shifted);
    };
    double lo, hi;
    if (member_at(0.0)) {
        lo = 0.0;
        hi = scale;
        while (member_at(hi)) {
            hi *= 2.0;
            if (hi > 1e18) return hi; // effectively unbounded (FullSpace)
        }
    } else {
        hi = 0.0;
        lo = -scale;
        while (!member_at(lo)) {
            lo *= 2.0;
            if (lo < -1e18) return lo;
        }
    }
    // member_at(lo) true, member_at(hi) false
    while (hi - lo > 1e-12 * std::max(1.0, scale)) {
        double mid = 0.5 * (lo + hi);
        (member_at(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double eval_f(const OperatorSpec& spec, const Spectrum& lambda) {
    require_dim(spec, lambda);
    require_gamma(spec, lambda);
    if (spec.kind == OperatorKind::SigmaKRoot)
        return std::pow(sigma(spec.k, lambda), 1.0 / spec.k);
    const double sk = sigma(spec.k, lambda);
    const double sl = sigma(spec.l, lambda);
    return std::pow(sk / sl, 1.0 / (spec.k - spec.l));
}

Spectrum grad_f(const OperatorSpec& spec, const Spectrum& lambda) {
    require_dim(spec, lambda);
    require_gamma(spec, lambda);
    const int n = spec.n;
    Spectrum g(static_cast<size_t>(n));
    if (spec.kind == OperatorKind::SigmaKRoot) {
        const double sk = sigma(spec.k, lambda);
        const double fk = std::pow(sk, 1.0 / spec.k);
        for (int i = 0; i < n; ++i)
            g[i] = fk / (spec.k * sk) * sigma_skip(spec.k - 1, lambda, i);
    } else {
        const double sk = sigma(spec.k, lambda);
        const double sl = sigma(spec.l, lambda);
        const double f = std::pow(sk / sl, 1.0 / (spec.k - spec.l));
        for (int i = 0; i < n; ++i) {
            const double dk = sigma_skip(spec.k - 1, lambda, i);
            const double dl = sigma_skip(spec.l - 1, lambda, i);
            g[i] = f / (spec.k - spec.l) * (dk / sk - dl / sl);
        }
    }
    return g;
}

FInfValue eval_f_inf(const OperatorSpec& spec, const Spectrum& lambda) {
    require_dim(spec, lambda);
    const ConeId ginf = ConeId::gamma_inf(spec);
    if (!in_cone(ginf, lambda))
        throw cone_error("spectrum outside Gamma_inf", 0);
    if (spec.kind == OperatorKind::SigmaKRoot)
        return FInfValue::infinite();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec.n; ++i) {
        const double sk = sigma_skip(spec.k - 1, lambda, i);
        const double sl = sigma_skip(spec.l - 1, lambda, i); // sigma_0 = 1 when l == 1
        best = std::min(best, std::pow(sk / sl, 1.0 / (spec.k - spec.l)));
    }
    return {true, best};
}

std::vector<double> f_inf_limit_check(const OperatorSpec& spec, const Spectrum& lambda,
                                      int i, const std::vector<double>& r_list) {
    require_dim(spec, lambda);
    if (i < 0 || i >= spec.n)
        throw std::invalid_argument("f_inf_limit_check: index out of range");
    std::vector<double> out;
    out.reserve(r_list.size());
    for (double r : r_list) {
        Spectrum mod = lambda;
        mod[static_cast<size_t>(i)] = r;
        out.push_back(eval_f(spec, mod));
    }
    return out;
}

} // namespace hessianlab
