#include "hessianlab/regmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace hessianlab {

namespace {

double raw_bump(double s) {
    if (std::fabs(s) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

std::mutex g_rule_mutex;
std::map<int, QuadRule> g_rules;

QuadRule compute_gauss_legendre(int order) {
    QuadRule r;
    r.x.resize(static_cast<size_t>(order));
    r.w.resize(static_cast<size_t>(order));
    for (int i = 0; i < order; ++i) {
        // Chebyshev initial guess, Newton on P_order
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            double dp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= order; ++j) {
            double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        double dp = order * (x * p1 - p0) / (x * x - 1.0);
        r.x[static_cast<size_t>(i)] = x;
        r.w[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

double bump_normalization() {
    static const double z = [] {
        const QuadRule& q = gauss_legendre(256);
        double s = 0.0;
        for (size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * raw_bump(q.x[i]);
        return s;
    }();
    return z;
}

struct ActiveSet {
    std::vector<double> t;
    std::vector<double> e;
    std::vector<size_t> index; // position in the original input
};

ActiveSet drop_dominated(const std::vector<double>& t, const std::vector<double>& eps) {
    ActiveSet a;
    std::vector<char> alive(t.size(), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t j = 0; j < t.size(); ++j) {
            if (!alive[j]) continue;
            double other = -std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < t.size(); ++i)
                if (i != j && alive[i]) other = std::max(other, t[i] - eps[i]);
            if (t[j] + eps[j] <= other) {
                alive[j] = 0;
                changed = true;
            }
        }
    }
    for (size_t j = 0; j < t.size(); ++j)
        if (alive[j]) {
            a.t.push_back(t[j]);
            a.e.push_back(eps[j]);
            a.index.push_back(j);
        }
    return a;
}

void validate(const std::vector<double>& t, const MollifierWeights& eps) {
    if (t.empty()) throw std::invalid_argument("reg_max: empty argument list");
    if (eps.eps.size() != t.size())
        throw std::invalid_argument("reg_max: t and eps dimension mismatch");
    for (double e : eps.eps)
        if (!(e > 0.0)) throw std::invalid_argument("reg_max: eps must be strictly positive");
}

// Tensor-product quadrature over [-1,1]^m with per-axis renormalized
// mollifier weights (keeps translation and sum-to-one exact at any order).
template <class Fn>
void tensor_quadrature(size_t m, int nodes, Fn&& visit) {
    const QuadRule& q = gauss_legendre(nodes);
    std::vector<size_t> idx(m, 0);
    std::vector<double> s(m), wpart(m);
    double wnorm = 0.0;
    for (size_t a = 0; a < q.x.size(); ++a) wnorm += q.w[a] * raw_bump(q.x[a]);
    while (true) {
        double w = 1.0;
        for (size_t d = 0; d < m; ++d) {
            s[d] = q.x[idx[d]];
            w *= q.w[idx[d]] * raw_bump(q.x[idx[d]]) / wnorm;
        }
        visit(s, w);
        size_t d = 0;
        for (; d < m; ++d) {
            if (++idx[d] < q.x.size()) break;
            idx[d] = 0;
        }
        if (d == m) break;
    }
}

// Cubic Hermite table for the mollifier CDF (exact derivative available);
// interpolation error ~ h^4, far below every quadrature tolerance here.
double fast_cdf(double s) {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return 1.0;
    constexpr int M = 4096;
    static const std::vector<double>& F = *[] {
        auto* f = new std::vector<double>(M + 1);
        for (int i = 0; i <= M; ++i) (*f)[static_cast<size_t>(i)] = mollifier_cdf(-1.0 + 2.0 * i / M);
        (*f)[0] = 0.0;
        (*f)[M] = 1.0;
        return f;
    }();
    double p = (s + 1.0) * (M / 2.0);
    int i = std::min(M - 1, static_cast<int>(p));
    double x = p - i, h = 2.0 / M;
    double s0 = -1.0 + 2.0 * static_cast<double>(i) / M;
    double d0 = mollifier(s0) * h, d1 = mollifier(s0 + h) * h;
    double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * F[static_cast<size_t>(i)] + (x3 - 2 * x2 + x) * d0 +
           (-2 * x3 + 3 * x2) * F[static_cast<size_t>(i) + 1] + (x3 - x2) * d1;
}

double cdf_value(const ActiveSet& a, int nodes) {
    // E max = lo + int_lo^hi (1 - prod_j F_j(s)) ds, split at support endpoints
    std::vector<double> brk;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < a.t.size(); ++j) {
        lo = std::max(lo, a.t[j] - a.e[j]);
        hi = std::max(hi, a.t[j] + a.e[j]);
        brk.push_back(a.t[j] - a.e[j]);
        brk.push_back(a.t[j] + a.e[j]);
    }
    brk.push_back(lo);
    brk.push_back(hi);
    std::sort(brk.begin(), brk.end());
    const QuadRule& q = gauss_legendre(nodes);
    double acc = lo;
    for (size_t p = 0; p + 1 < brk.size(); ++p) {
        double x0 = std::max(brk[p], lo), x1 = std::min(brk[p + 1], hi);
        if (x1 <= x0) continue;
        double piece = 0.0;
        for (size_t i = 0; i < q.x.size(); ++i) {
            double s = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * q.x[i];
            double prod = 1.0;
            for (size_t j = 0; j < a.t.size(); ++j)
                prod *= fast_cdf((s - a.t[j]) / a.e[j]);
            piece += q.w[i] * (1.0 - prod);
        }
        acc += 0.5 * (x1 - x0) * piece;
    }
    return acc;
}

std::vector<double> cdf_grad(const ActiveSet& a, int nodes) {
    std::vector<double> brk;
    for (size_t j = 0; j < a.t.size(); ++j) {
        brk.push_back(a.t[j] - a.e[j]);
        brk.push_back(a.t[j] + a.e[j]);
    }
    std::sort(brk.begin(), brk.end());
    const QuadRule& q = gauss_legendre(nodes);
    std::vector<double> g(a.t.size(), 0.0);
    for (size_t j = 0; j < a.t.size(); ++j) {
        double lo = a.t[j] - a.e[j], hi = a.t[j] + a.e[j];
        for (size_t p = 0; p + 1 < brk.size(); ++p) {
            double x0 = std::max(brk[p], lo), x1 = std::min(brk[p + 1], hi);
            if (x1 <= x0) continue;
            double piece = 0.0;
            for (size_t i = 0; i < q.x.size(); ++i) {
                double s = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * q.x[i];
                double val = mollifier((s - a.t[j]) / a.e[j]) / a.e[j];
                for (size_t k = 0; k < a.t.size(); ++k)
                    if (k != j) val *= fast_cdf((s - a.t[k]) / a.e[k]);
                piece += q.w[i] * val;
            }
            g[j] += 0.5 * (x1 - x0) * piece;
        }
    }
    return g;
}

} // namespace

const QuadRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order >= 1");
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = g_rules.find(order);
    if (it == g_rules.end()) it = g_rules.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

double mollifier(double s) { return raw_bump(s) / bump_normalization(); }

double mollifier_cdf(double s) {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const QuadRule& q = gauss_legendre(64);
    double acc = 0.0;
    for (size_t i = 0; i < q.x.size(); ++i) {
        double xi = 0.5 * (-1.0 + s) + 0.5 * (s + 1.0) * q.x[i];
        acc += q.w[i] * raw_bump(xi);
    }
    return acc * 0.5 * (s + 1.0) / bump_normalization();
}

double reg_max(const std::vector<double>& t, const MollifierWeights& eps, int nodes) {
    validate(t, eps);
    ActiveSet a = drop_dominated(t, eps.eps);
    if (a.t.size() == 1) return a.t[0];
    if (a.t.size() > 2) return cdf_value(a, nodes);
    double acc = 0.0;
    tensor_quadrature(a.t.size(), nodes, [&](const std::vector<double>& s, double w) {
        double m = -std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < a.t.size(); ++j) m = std::max(m, a.t[j] + a.e[j] * s[j]);
        acc += w * m;
    });
    return acc;
}

std::vector<double> reg_max_grad(const std::vector<double>& t, const MollifierWeights& eps,
                                 int nodes) {
    validate(t, eps);
    ActiveSet a = drop_dominated(t, eps.eps);
    std::vector<double> out(t.size(), 0.0);
    if (a.t.size() == 1) {
        out[a.index[0]] = 1.0;
        return out;
    }
    std::vector<double> g;
    if (a.t.size() > 2) {
        g = cdf_grad(a, nodes);
    } else {
        g.assign(a.t.size(), 0.0);
        tensor_quadrature(a.t.size(), nodes, [&](const std::vector<double>& s, double w) {
            double m = -std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < a.t.size(); ++j) m = std::max(m, a.t[j] + a.e[j] * s[j]);
            // ties share the node weight equally
            size_t count = 0;
            for (size_t j = 0; j < a.t.size(); ++j)
                if (a.t[j] + a.e[j] * s[j] >= m - 1e-15 * std::max(1.0, std::fabs(m))) ++count;
            for (size_t j = 0; j < a.t.size(); ++j)
                if (a.t[j] + a.e[j] * s[j] >= m - 1e-15 * std::max(1.0, std::fabs(m)))
                    g[j] += w / count;
        });
    }
    for (size_t j = 0; j < g.size(); ++j) out[a.index[j]] = g[j];
    return out;
}

} // namespace hessianlab
