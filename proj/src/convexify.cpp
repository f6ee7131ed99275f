#include "hessianlab/convexify.hpp"
#include "hessianlab/regmax.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace hessianlab {

double Affine::operator()(const std::vector<double>& x) const {
    double s = c;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
    return s;
}

bool Box::contains(const std::vector<double>& x, double margin) const {
    for (int i = 0; i < dim(); ++i) {
        std::size_t u = static_cast<std::size_t>(i);
        if (!(x[u] > lo[u] + margin && x[u] < hi[u] - margin)) return false;
    }
    return true;
}

double Box::diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
        double w = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
        s += w * w;
    }
    return std::sqrt(s);
}

double Box::min_width() const {
    double w = hi[0] - lo[0];
    for (int i = 1; i < dim(); ++i)
        w = std::min(w, hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
    return w;
}

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

/// Visit an m^d lattice over [lo, hi] (endpoints included).
template <class Fn>
void for_lattice(const std::vector<double>& lo, const std::vector<double>& hi, int m, Fn&& fn) {
    const int d = static_cast<int>(lo.size());
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (;;) {
        for (int a = 0; a < d; ++a) {
            std::size_t u = static_cast<std::size_t>(a);
            x[u] = m == 1 ? 0.5 * (lo[u] + hi[u])
                          : lo[u] + (hi[u] - lo[u]) * idx[u] / static_cast<double>(m - 1);
        }
        fn(x, idx);
        int a = d - 1;
        for (; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < m) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
        if (a < 0) break;
    }
}

} // namespace

SectionInfo section(const ConvexOracle& u, const std::vector<double>& x0, double t) {
    const int d = u.domain.dim();
    if (!(t > 0.0)) throw std::invalid_argument("section: t must be positive");
    if (!u.domain.contains(x0)) throw std::invalid_argument("section: x0 must be interior");

    SectionInfo out;
    out.l = u.supporting_affine(x0);
    out.t = t;
    {
        ConvexOracle copy = u;
        Affine l = out.l;
        out.contains = [copy, l, t](const std::vector<double>& x) {
            return copy.domain.contains(x) && copy.eval(x) < l(x) + t;
        };
    }

    // sampled diameter: coarse scan, then window refinement around the members
    std::vector<double> wlo = u.domain.lo, whi = u.domain.hi;
    const int m = d == 1 ? 257 : 65;
    std::vector<std::vector<double>> members;
    for (int pass = 0; pass < 5; ++pass) {
        members.clear();
        std::vector<double> blo(static_cast<std::size_t>(d), 1e300);
        std::vector<double> bhi(static_cast<std::size_t>(d), -1e300);
        for_lattice(wlo, whi, m, [&](const std::vector<double>& x, const std::vector<int>&) {
            if (u.domain.contains(x) && u.eval(x) < out.l(x) + t) {
                members.push_back(x);
                for (int a = 0; a < d; ++a) {
                    std::size_t ua = static_cast<std::size_t>(a);
                    blo[ua] = std::min(blo[ua], x[ua]);
                    bhi[ua] = std::max(bhi[ua], x[ua]);
                }
            }
        });
        if (members.empty()) {
            // the section always contains x0; zoom toward it
            for (int a = 0; a < d; ++a) {
                std::size_t ua = static_cast<std::size_t>(a);
                double w = 0.25 * (whi[ua] - wlo[ua]);
                wlo[ua] = x0[ua] - 0.5 * w;
                whi[ua] = x0[ua] + 0.5 * w;
            }
            continue;
        }
        for (int a = 0; a < d; ++a) {
            std::size_t ua = static_cast<std::size_t>(a);
            double pad = (whi[ua] - wlo[ua]) / (m - 1);
            wlo[ua] = blo[ua] - pad;
            whi[ua] = bhi[ua] + pad;
        }
    }
    if (members.size() > 800) {
        std::vector<std::vector<double>> sub;
        std::size_t step = members.size() / 800 + 1;
        for (std::size_t i = 0; i < members.size(); i += step) sub.push_back(members[i]);
        members.swap(sub);
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            d2 = std::max(d2, dist2(members[i], members[j]));
    out.diameter = std::sqrt(d2);
    return out;
}

// ---------------------------------------------------------------------------
// SmoothedConvex evaluation: glue the local quadratics through reg_max over
// the seeds whose section can reach x; all other quadratics sit strictly
// below u there and would be dropped by reg_max anyway.
// ---------------------------------------------------------------------------

namespace {

long long cell_key(const std::vector<double>& x, double cell) {
    long long k = 0;
    for (double xi : x) {
        long long c = static_cast<long long>(std::floor(xi / cell)) + (1LL << 20);
        k = (k << 21) | (c & ((1LL << 21) - 1));
    }
    return k;
}

} // namespace

void SmoothedConvex::build_index() {
    classes_.clear();
    if (seeds.empty()) return;
    double rmax = *std::max_element(radii.begin(), radii.end());
    const int nclasses = 8;
    std::vector<std::map<long long, std::vector<int>>> builders(nclasses);
    for (std::size_t j = 0; j < seeds.size(); ++j) {
        int c = 0;
        double r = rmax;
        while (c + 1 < nclasses && radii[j] <= 0.5 * r) {
            r *= 0.5;
            ++c;
        }
        builders[static_cast<std::size_t>(c)][cell_key(seeds[j], r)].push_back(
            static_cast<int>(j));
    }
    double r = rmax;
    for (int c = 0; c < nclasses; ++c) {
        RadiusClass rc;
        rc.cell = r;
        for (auto& kv : builders[static_cast<std::size_t>(c)])
            rc.cells.emplace_back(kv.first, std::move(kv.second));
        classes_.push_back(std::move(rc));
        r *= 0.5;
    }
}

void SmoothedConvex::candidate_seeds(const std::vector<double>& x, std::vector<int>& out) const {
    const int d = domain.dim();
    std::vector<double> probe(static_cast<std::size_t>(d));
    for (const RadiusClass& rc : classes_) {
        if (rc.cells.empty()) continue;
        // 3^d neighborhood of x's cell in this class
        const int reach = 1;
        std::vector<int> off(static_cast<std::size_t>(d), -reach);
        for (;;) {
            for (int a = 0; a < d; ++a)
                probe[static_cast<std::size_t>(a)] =
                    x[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)] * rc.cell;
            long long key = cell_key(probe, rc.cell);
            auto it = std::lower_bound(rc.cells.begin(), rc.cells.end(), key,
                                       [](const auto& kv, long long k) { return kv.first < k; });
            if (it != rc.cells.end() && it->first == key)
                for (int j : it->second)
                    if (dist2(x, seeds[static_cast<std::size_t>(j)]) <=
                        radii[static_cast<std::size_t>(j)] * radii[static_cast<std::size_t>(j)])
                        out.push_back(j);
            int a = d - 1;
            for (; a >= 0; --a) {
                if (++off[static_cast<std::size_t>(a)] <= reach) break;
                off[static_cast<std::size_t>(a)] = -reach;
            }
            if (a < 0) break;
        }
    }
}

double SmoothedConvex::operator()(const std::vector<double>& x) const {
    if (!domain.contains(x))
        throw std::domain_error(
            "SmoothedConvex: point outside the construction box; rebuild with a larger box");
    std::vector<int> cand;
    candidate_seeds(x, cand);
    if (cand.empty())
        throw std::domain_error(
            "SmoothedConvex: point not covered by any section; rebuild with a larger box");
    std::vector<double> t;
    MollifierWeights w;
    t.reserve(cand.size());
    w.eps.reserve(cand.size());
    for (int j : cand) {
        std::size_t u = static_cast<std::size_t>(j);
        t.push_back(affines[u](x) + 0.75 * levels[u] + quads[u] * dist2(x, seeds[u]));
        w.eps.push_back(margins[u]);
    }
    return reg_max(t, w);
}

// ---------------------------------------------------------------------------
// smooth_convex construction
// ---------------------------------------------------------------------------

SmoothedConvex smooth_convex(const ConvexOracle& u,
                             const std::function<double(const std::vector<double>&)>& h) {
    const int d = u.domain.dim();
    if (d < 1 || d > 2) throw std::invalid_argument("smooth_convex: dimension must be 1 or 2");

    const double margin = u.domain.min_width() / 256.0;
    Box K{u.domain.lo, u.domain.hi};
    for (int a = 0; a < d; ++a) {
        K.lo[static_cast<std::size_t>(a)] += margin;
        K.hi[static_cast<std::size_t>(a)] -= margin;
    }

    double inf_h = 1e300, sup_h = 0.0;
    for_lattice(K.lo, K.hi, d == 1 ? 257 : 49,
                [&](const std::vector<double>& x, const std::vector<int>&) {
                    inf_h = std::min(inf_h, h(x));
                    sup_h = std::max(sup_h, h(x));
                });
    if (!(inf_h > 0.0)) throw std::invalid_argument("smooth_convex: h must be positive");

    const double D = u.domain.diameter();
    const double D2 = D * D;

    // strict-convexity screen: every supporting affine must sit strictly
    // below u away from its anchor
    {
        const int ma = d == 1 ? 17 : 9, ms = d == 1 ? 65 : 17;
        bool failed = false;
        std::vector<double> witness;
        std::string why;
        for_lattice(K.lo, K.hi, ma, [&](const std::vector<double>& x0, const std::vector<int>&) {
            if (failed) return;
            Affine l = u.supporting_affine(x0);
            for_lattice(K.lo, K.hi, ms, [&](const std::vector<double>& x, const std::vector<int>&) {
                if (failed) return;
                double gap = u.eval(x) - l(x);
                if (gap < -1e-9) {
                    failed = true;
                    witness = x;
                    why = "supporting affine lies above the function";
                } else if (gap <= 1e-12 && dist2(x, x0) > 1e-16 * D2) {
                    failed = true;
                    witness = x;
                    why = "function not strictly convex at the sampled resolution";
                }
            });
        });
        if (failed) throw construction_error("smooth_convex: " + why, witness);
    }

    SmoothedConvex out;
    out.domain = u.domain;

    // Sections are allowed to spill past the box: outside it the oracle is
    // continued by the upper envelope of supporting affines taken on an
    // interior anchor lattice.  The continuation is convex, minorizes every
    // convex extension of u, and coincides with u where the anchors are
    // dense, so every separation condition checked against it is conservative.
    Box W{u.domain.lo, u.domain.hi};
    for (int a = 0; a < d; ++a) {
        std::size_t ua = static_cast<std::size_t>(a);
        double pad = 0.3 * (u.domain.hi[ua] - u.domain.lo[ua]);
        W.lo[ua] -= pad;
        W.hi[ua] += pad;
    }
    std::vector<Affine> anchors;
    for_lattice(K.lo, K.hi, d == 1 ? 129 : 33,
                [&](const std::vector<double>& x, const std::vector<int>&) {
                    anchors.push_back(u.supporting_affine(x));
                });
    // quadratic growth off the box keeps the continuation's sections bounded
    // (the bare envelope is flat along outward rays)
    const double padmin = 0.3 * u.domain.min_width();
    const double mu0 = 16.0 * sup_h / (padmin * padmin);
    auto ue = [&](const std::vector<double>& x) {
        if (u.domain.contains(x)) return u.eval(x);
        double best = -1e300;
        for (const Affine& l : anchors) best = std::max(best, l(x));
        double s2 = 0.0;
        for (int a = 0; a < d; ++a) {
            std::size_t ua = static_cast<std::size_t>(a);
            double s = std::max({0.0, u.domain.lo[ua] - x[ua], x[ua] - u.domain.hi[ua]});
            s2 += s * s;
        }
        return best + mu0 * s2;
    };
    const double DW = W.diameter();

    const int win = d == 1 ? 65 : 25; // local window lattice per axis
    double warm_r = u.domain.min_width() / 4.0;

    auto make_seed = [&](const std::vector<double>& xs) {
        Affine l = u.supporting_affine(xs);
        // the upper bound on the glued function at x is u(x) + t_j + eps_j
        // because l <= u pointwise, so t + eps <= h over the section suffices
        double t = 0.85 * h(xs);
        double R = 0.0, rS = 0.0;
        for (int iter = 0;; ++iter) {
            if (iter > 400 || t < 1e-13)
                throw construction_error("smooth_convex: no admissible section level", xs);
            double w = std::max({4.0 * warm_r, 4.0 * std::sqrt(t), 4.0 * margin});
            std::vector<double> wlo(static_cast<std::size_t>(d)), whi(static_cast<std::size_t>(d));
            for (int a = 0; a < d; ++a) {
                std::size_t ua = static_cast<std::size_t>(a);
                wlo[ua] = std::max(xs[ua] - w, W.lo[ua]);
                whi[ua] = std::min(xs[ua] + w, W.hi[ua]);
            }
            bool touches_edge = false;
            double hmin = 1e300, r2 = 0.0;
            for_lattice(wlo, whi, win, [&](const std::vector<double>& x, const std::vector<int>& idx) {
                double ux = ue(x);
                if (!(ux <= l(x) + t)) return;
                for (int a = 0; a < d; ++a) {
                    int ia = idx[static_cast<std::size_t>(a)];
                    if (ia == 0 || ia == win - 1) touches_edge = true;
                }
                if (u.domain.contains(x)) hmin = std::min(hmin, h(x));
                r2 = std::max(r2, dist2(x, xs));
            });
            double spacing = 0.0;
            for (int a = 0; a < d; ++a)
                spacing = std::max(spacing, (whi[static_cast<std::size_t>(a)] -
                                             wlo[static_cast<std::size_t>(a)]) /
                                                (win - 1));
            if (!touches_edge && t <= 0.85 * hmin) {
                rS = std::sqrt(r2);
                R = rS + std::sqrt(static_cast<double>(d)) * spacing;
                break;
            }
            t *= 0.5;
        }
        // curvature: q <= t / (16 R^2) keeps v + eps < u on the section
        // boundary; q <= t / (2 R DW) keeps v below u out to the far end of
        // the work box, where convexity only gives linear growth of u - l
        double q = t * std::min(1.0 / (16.0 * R * R), 0.5 / (R * DW));
        // gluing width: largest halving of inf h / 4 below both separation
        // margins (3t/16 at the section boundary, 2q for the Hessian bound);
        // a wide glue keeps coarse difference stencils well inside the seams
        double ecap = std::min(0.15 * t, 1.75 * q);
        double e = inf_h * 0.25;
        while (e > ecap) e *= 0.5;
        out.seeds.push_back(xs);
        out.affines.push_back(l);
        out.levels.push_back(t);
        out.margins.push_back(e);
        out.quads.push_back(q);
        out.radii.push_back(R);
        warm_r = R;
    };

    std::size_t level_start = 0;
    std::vector<int> cand;
    auto covered = [&](const std::vector<double>& x, double ux) {
        auto hits = [&](std::size_t j) {
            return dist2(x, out.seeds[j]) <= out.radii[j] * out.radii[j] &&
                   ux <= out.affines[j](x) + 0.0625 * out.levels[j];
        };
        cand.clear();
        out.candidate_seeds(x, cand); // seeds from finished levels
        for (int j : cand)
            if (hits(static_cast<std::size_t>(j))) return true;
        for (std::size_t j = out.seeds.size(); j > level_start; --j)
            if (hits(j - 1)) return true;
        return false;
    };

    const int cap = d == 1 ? 16385 : 4097;
    int quiet_levels = 0; // stop only after two refinements that add nothing
    for (int pts = 9; pts <= cap; pts = 2 * (pts - 1) + 1) {
        out.build_index();
        level_start = out.seeds.size();
        for_lattice(K.lo, K.hi, pts, [&](const std::vector<double>& x, const std::vector<int>&) {
            if (covered(x, u.eval(x))) return;
            make_seed(x);
        });
        quiet_levels = out.seeds.size() == level_start ? quiet_levels + 1 : 0;
        if (quiet_levels >= 2 && pts > 9) break;
    }

    out.build_index();
    return out;
}

std::vector<double> discrete_hessian_eigs(const SmoothedConvex& f, const std::vector<double>& x) {
    const int d = f.domain.dim();
    const double s = f.domain.min_width() / 512.0;
    auto at = [&](double dx, double dy) {
        std::vector<double> p = x;
        p[0] += dx;
        if (d == 2) p[1] += dy;
        return f(p);
    };
    double c = at(0, 0);
    double uxx = (at(s, 0) - 2.0 * c + at(-s, 0)) / (s * s);
    if (d == 1) return {uxx};
    double uyy = (at(0, s) - 2.0 * c + at(0, -s)) / (s * s);
    double uxy = (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4.0 * s * s);
    double tr = uxx + uyy;
    double disc = std::sqrt(std::max(0.0, (uxx - uyy) * (uxx - uyy) + 4.0 * uxy * uxy));
    return {0.5 * (tr - disc), 0.5 * (tr + disc)};
}

// ---------------------------------------------------------------------------
// f_tilde_eps and g_eps
// ---------------------------------------------------------------------------

double f_tilde_eps(const OperatorSpec& spec, double eps, const Spectrum& lambda) {
    if (!spec.finite_f_inf())
        throw std::invalid_argument("f_tilde_eps: needs an operator with finite f_inf");
    if (!in_cone(ConeId::gamma_inf(spec), lambda))
        throw cone_error("f_tilde_eps: spectrum outside Gamma_inf", 0);
    FInfValue base = eval_f_inf(spec, lambda);
    double total = 0.0;
    for (double li : lambda) total += li;
    double pert = 0.0;
    for (double li : lambda) pert += std::atan(total - li);
    return base.value + eps / static_cast<double>(spec.n) * pert;
}

namespace {

/// Branch values f_inf,i = (sigma_{k-1} / sigma_{l-1})(lambda with i removed).
std::vector<double> f_inf_branches(const OperatorSpec& spec, const Spectrum& lambda) {
    std::vector<double> out;
    const double inv = 1.0 / static_cast<double>(spec.k - spec.l);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        Spectrum rest;
        for (std::size_t j = 0; j < lambda.size(); ++j)
            if (j != i) rest.push_back(lambda[j]);
        double num = sigma(spec.k - 1, rest);
        double den = sigma(spec.l - 1, rest);
        out.push_back(std::pow(num / den, inv));
    }
    return out;
}

} // namespace

GEps::GEps(const OperatorSpec& spec, double eps, double box_lo, double box_hi)
    : spec_(spec), eps_(eps) {
    if (!spec.finite_f_inf())
        throw std::invalid_argument("GEps: needs an operator with finite f_inf");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("GEps: eps must be in (0,1)");
    if (spec.n >= 3) {
        power_ = std::log(static_cast<double>(spec.n)) / (-std::log1p(-eps));
        return;
    }
    if (!(box_lo > 0.0 && box_hi > box_lo))
        throw std::invalid_argument("GEps: box must satisfy 0 < lo < hi");

    // n = 2: convexify -f_tilde_eps over the box, which sits inside
    // Gamma_inf (the positive quadrant for the only admissible quotient)
    ConvexOracle oracle;
    oracle.domain = Box{{box_lo, box_lo}, {box_hi, box_hi}};
    OperatorSpec s = spec;
    oracle.eval = [s, eps](const std::vector<double>& x) { return -f_tilde_eps(s, eps, x); };
    oracle.supporting_affine = [s, eps](const std::vector<double>& x0) {
        Affine l;
        l.a.resize(2);
        // subgradient of -min(x) - (eps/2)(atan x1 + atan x2)
        double w0 = x0[0] < x0[1] ? 1.0 : (x0[0] > x0[1] ? 0.0 : 0.5);
        l.a[0] = -w0 - 0.5 * eps / (1.0 + x0[0] * x0[0]);
        l.a[1] = -(1.0 - w0) - 0.5 * eps / (1.0 + x0[1] * x0[1]);
        double u0 = -f_tilde_eps(s, eps, x0);
        l.c = u0 - l.a[0] * x0[0] - l.a[1] * x0[1];
        return l;
    };
    auto hfun = [eps](const std::vector<double>& x) { return eps * std::min(x[0], x[1]); };
    smooth_ = std::make_shared<SmoothedConvex>(smooth_convex(oracle, hfun));
}

double GEps::operator()(const Spectrum& lambda) const {
    if (static_cast<int>(lambda.size()) != spec_.n)
        throw std::invalid_argument("GEps: wrong spectrum size");
    if (spec_.n >= 3) {
        if (!in_cone(ConeId::gamma_inf(spec_), lambda))
            throw cone_error("GEps: spectrum outside Gamma_inf", 0);
        double acc = 0.0;
        for (double fi : f_inf_branches(spec_, lambda)) acc += std::pow(fi, -power_);
        return std::pow(acc, -1.0 / power_);
    }
    const SmoothedConvex& sm = *smooth_;
    Spectrum swapped{lambda[1], lambda[0]};
    return 0.5 * (-sm(lambda) - sm(swapped));
}

double g_eps(const OperatorSpec& spec, double eps, const Spectrum& lambda) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const GEps>> cache;
    std::ostringstream key;
    key << spec.to_string() << "@" << eps;
    std::shared_ptr<const GEps> g;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key.str());
        if (it != cache.end()) g = it->second;
    }
    if (!g) {
        g = std::make_shared<GEps>(spec, eps);
        std::lock_guard<std::mutex> lock(mu);
        cache.emplace(key.str(), g);
    }
    return (*g)(lambda);
}

} // namespace hessianlab
