#include "hessianlab/solver.hpp"

#include <cmath>
#include <limits>

namespace hessianlab {

namespace {

/// Real trigonometric basis for the trial family: one cos and one sin field
/// per integer frequency vector k with 0 < |k|_inf <= cutoff, one
/// representative per {k, -k} pair.
std::vector<ScalarField> trial_basis(const TorusGrid& g, int cutoff) {
    const int axes = g.axes();
    std::vector<ScalarField> basis;
    std::vector<int> k(static_cast<std::size_t>(axes), -cutoff);
    for (;;) {
        bool zero = true, lead_positive = false;
        for (int a = 0; a < axes; ++a) {
            int v = k[static_cast<std::size_t>(a)];
            if (v != 0) {
                if (zero) lead_positive = v > 0;
                zero = false;
            }
        }
        if (!zero && lead_positive) {
            ScalarField c(g), s(g);
            for (std::size_t p = 0; p < g.points(); ++p) {
                std::vector<double> x = g.coords(p);
                double phase = 0.0;
                for (int a = 0; a < axes; ++a)
                    phase += 2.0 * M_PI * k[static_cast<std::size_t>(a)] *
                             x[static_cast<std::size_t>(a)];
                c[p] = std::cos(phase);
                s[p] = std::sin(phase);
            }
            basis.push_back(std::move(c));
            basis.push_back(std::move(s));
        }
        int a = axes - 1;
        for (; a >= 0; --a) {
            if (++k[static_cast<std::size_t>(a)] <= cutoff) break;
            k[static_cast<std::size_t>(a)] = -cutoff;
        }
        if (a < 0) break;
    }
    return basis;
}

} // namespace

SupSlopeResult estimate_sup_slope(const OperatorSpec& spec, const HermitianField& chi,
                                  const ScalarField& G, int mode_cutoff, int budget) {
    const TorusGrid& g = chi.grid;
    if (G.grid != g) throw std::invalid_argument("estimate_sup_slope: field grids differ");
    if (mode_cutoff < 0 || budget < 1)
        throw std::invalid_argument("estimate_sup_slope: bad trial-family parameters");

    ConeId cone = ConeId::gamma_k(spec.k);
    SupSlopeResult out;
    auto objective = [&](const ScalarField& u) -> double {
        ++out.evaluations;
        HermitianField A = ddc(u, DiffMethod::spectral);
        for (std::size_t i = 0; i < A.m.size(); ++i) A.m[i] += chi.m[i];
        std::vector<Spectrum> lam = eigenvalues(A);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < g.points(); ++p) {
            if (!in_cone(cone, lam[p])) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, std::exp(-G[p]) * eval_f(spec, lam[p]));
        }
        return worst;
    };

    std::vector<ScalarField> basis = trial_basis(g, mode_cutoff);
    std::vector<double> coeff(basis.size(), 0.0);
    ScalarField u(g);
    out.best_u = u;
    out.e_c_upper = objective(u);
    if (!std::isfinite(out.e_c_upper))
        throw solver_error("estimate_sup_slope: zero trial infeasible");

    double step = 0.25;
    while (step > 1e-5 && out.evaluations < budget) {
        bool improved = false;
        for (std::size_t j = 0; j < basis.size() && out.evaluations < budget; ++j) {
            for (double sgn : {1.0, -1.0}) {
                ScalarField trial = u;
                for (std::size_t p = 0; p < g.points(); ++p)
                    trial[p] += sgn * step * basis[j][p];
                double val = objective(trial);
                if (val < out.e_c_upper - 1e-14) {
                    out.e_c_upper = val;
                    coeff[j] += sgn * step;
                    u = std::move(trial);
                    out.best_u = u;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return out;
}

} // namespace hessianlab
