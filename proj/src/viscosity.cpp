#include "hessianlab/viscosity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hessianlab {

namespace {

/// Periodic offsets d (grid steps per axis) with |d*h| <= r, one minimal
/// image per displacement; second member is the squared length |xi|^2.
std::vector<std::pair<std::vector<int>, double>> offsets_within(const TorusGrid& g, double r) {
    const int axes = g.axes();
    const double h = g.h();
    const int reach = std::min(g.N / 2, static_cast<int>(std::floor(r / h)));
    std::vector<std::pair<std::vector<int>, double>> out;
    std::vector<int> d(static_cast<std::size_t>(axes), -reach);
    for (;;) {
        double len2 = 0.0;
        for (int a = 0; a < axes; ++a) {
            double x = d[static_cast<std::size_t>(a)] * h;
            len2 += x * x;
        }
        if (len2 <= r * r) out.emplace_back(d, len2);
        int a = axes - 1;
        for (; a >= 0; --a) {
            if (++d[static_cast<std::size_t>(a)] <= reach) break;
            d[static_cast<std::size_t>(a)] = -reach;
        }
        if (a < 0) break;
    }
    return out;
}

/// min over points and axes of the discrete second difference of
/// psi(z) + |z|^2/eps; the |z|^2 term contributes exactly 2/eps.
double convexity_certificate(const ScalarField& psi, double eps) {
    const TorusGrid& g = psi.grid;
    const double h2 = g.h() * g.h();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < g.points(); ++p)
        for (int a = 0; a < g.axes(); ++a) {
            double d2 = (psi[g.shift(p, a, 1)] - 2.0 * psi[p] + psi[g.shift(p, a, -1)]) / h2;
            worst = std::min(worst, d2 + 2.0 / eps);
        }
    return worst;
}

} // namespace

ConvolutionReport sup_convolution(const ScalarField& phi, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("sup_convolution: eps must be positive");
    const TorusGrid& g = phi.grid;
    double lo = phi.v[0], hi = phi.v[0];
    for (double v : phi.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    ConvolutionReport rep;
    rep.eps = eps;
    rep.search_radius = std::sqrt(eps * (hi - lo)) + g.h();
    rep.field = ScalarField(g);
    auto offs = offsets_within(g, rep.search_radius);
    // flatten: per offset the penalty |xi|^2/eps and per-axis step counts
    const int axes = g.axes();
    const int N = g.N;
    std::vector<double> pen(offs.size());
    std::vector<int> step(offs.size() * static_cast<std::size_t>(axes));
    for (std::size_t o = 0; o < offs.size(); ++o) {
        pen[o] = offs[o].second / eps;
        for (int a = 0; a < axes; ++a)
            step[o * static_cast<std::size_t>(axes) + static_cast<std::size_t>(a)] =
                offs[o].first[static_cast<std::size_t>(a)];
    }
    std::vector<std::size_t> stride(static_cast<std::size_t>(axes));
    stride[static_cast<std::size_t>(axes - 1)] = 1;
    for (int a = axes - 2; a >= 0; --a)
        stride[static_cast<std::size_t>(a)] =
            stride[static_cast<std::size_t>(a + 1)] * static_cast<std::size_t>(N);
    std::vector<int> idx(static_cast<std::size_t>(axes), 0);
    for (std::size_t p = 0; p < g.points(); ++p) {
        double best = -std::numeric_limits<double>::infinity();
        const int* s = step.data();
        for (std::size_t o = 0; o < offs.size(); ++o, s += axes) {
            std::size_t q = 0;
            for (int a = 0; a < axes; ++a) {
                int i = idx[static_cast<std::size_t>(a)] + s[a];
                if (i < 0) i += N;
                else if (i >= N) i -= N;
                q += stride[static_cast<std::size_t>(a)] * static_cast<std::size_t>(i);
            }
            double cand = phi.v[q] + eps - pen[o];
            if (cand > best) best = cand;
        }
        rep.field[p] = best;
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < N) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    rep.semiconvexity = convexity_certificate(rep.field, eps);
    return rep;
}

ConvolutionReport inf_convolution(const ScalarField& phi, double eps) {
    ScalarField neg = -1.0 * phi;
    ConvolutionReport rep = sup_convolution(neg, eps);
    for (double& v : rep.field.v) v = -v;
    return rep;
}

namespace {

ConeId required_cone(const OperatorSpec& spec, ConeMode mode) {
    return mode == ConeMode::f_on_gamma ? ConeId::gamma_k(spec.k) : ConeId::gamma_inf(spec);
}

std::vector<Spectrum> spectra_of(const OperatorSpec& spec, const HermitianField& chi,
                                 const ScalarField& u, DiffMethod method) {
    if (chi.grid != u.grid) throw std::invalid_argument("viscosity: field grids differ");
    if (chi.grid.n != spec.n) throw std::invalid_argument("viscosity: operator dimension mismatch");
    HermitianField form = ddc(u, method);
    for (std::size_t i = 0; i < form.m.size(); ++i) form.m[i] += chi.m[i];
    return eigenvalues(form);
}

} // namespace

SubsolutionReport check_subsolution(const OperatorSpec& spec, ConeMode mode,
                                    const HermitianField& chi, const ScalarField& u,
                                    const ScalarField& rhs, DiffMethod method) {
    if (rhs.grid != u.grid) throw std::invalid_argument("viscosity: field grids differ");
    std::vector<Spectrum> lam = spectra_of(spec, chi, u, method);
    ConeId cone = required_cone(spec, mode);
    SubsolutionReport rep;
    rep.mode = mode;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t p = 0; p < lam.size(); ++p) {
        if (!in_cone(cone, lam[p])) {
            rep.violations.push_back(p);
            continue;
        }
        any = true;
        double value = mode == ConeMode::f_on_gamma
                           ? eval_f(spec, lam[p])
                           : eval_f_inf(spec, lam[p])
                                 .value_or(std::numeric_limits<double>::infinity());
        rep.worst_margin = std::min(rep.worst_margin, value - rhs[p]);
    }
    if (!any) rep.worst_margin = 0.0;
    rep.delta0 = rep.violations.empty() ? std::max(0.0, rep.worst_margin) : 0.0;
    return rep;
}

SubsolutionReport check_supersolution(const OperatorSpec& spec, const HermitianField& chi,
                                      const ScalarField& u, const ScalarField& rhs,
                                      DiffMethod method) {
    if (rhs.grid != u.grid) throw std::invalid_argument("viscosity: field grids differ");
    std::vector<Spectrum> lam = spectra_of(spec, chi, u, method);
    ConeId cone = ConeId::gamma_k(spec.k);
    SubsolutionReport rep;
    rep.mode = ConeMode::f_on_gamma;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t p = 0; p < lam.size(); ++p) {
        if (!in_cone(cone, lam[p])) continue; // first branch of the disjunction
        any = true;
        double margin = rhs[p] - eval_f(spec, lam[p]);
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < 0.0) rep.violations.push_back(p);
    }
    if (!any) rep.worst_margin = 0.0;
    rep.delta0 = rep.violations.empty() ? std::max(0.0, rep.worst_margin) : 0.0;
    return rep;
}

} // namespace hessianlab
