#include "hessianlab/solver.hpp"
#include "hessianlab/regmax.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace hessianlab {

namespace {

using cplx = std::complex<double>;

double vec_norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Right-preconditioned restarted GMRES; solves A x = b with x = M y.
template <class ApplyA, class ApplyM>
std::vector<double> gmres(const ApplyA& A, const ApplyM& M, const std::vector<double>& b,
                          double rtol, int maxit, int restart) {
    const std::size_t P = b.size();
    std::vector<double> x(P, 0.0);
    double bnorm = vec_norm2(b);
    if (bnorm == 0.0) return x;
    int done = 0;
    while (done < maxit) {
        std::vector<double> r = b;
        if (done > 0) {
            std::vector<double> Ax = A(x);
            for (std::size_t i = 0; i < P; ++i) r[i] -= Ax[i];
        }
        double beta = vec_norm2(r);
        if (beta <= rtol * bnorm) break;
        int m = std::min(restart, maxit - done);
        std::vector<std::vector<double>> V;
        V.reserve(static_cast<std::size_t>(m) + 1);
        {
            std::vector<double> v0 = r;
            for (double& v : v0) v /= beta;
            V.push_back(std::move(v0));
        }
        std::vector<std::vector<double>> H; // H[j] has j+2 entries
        std::vector<double> cs, sn, g{beta};
        int used = 0;
        for (int j = 0; j < m; ++j) {
            std::vector<double> w = A(M(V[static_cast<std::size_t>(j)]));
            std::vector<double> h(static_cast<std::size_t>(j) + 2, 0.0);
            for (int i = 0; i <= j; ++i) {
                h[static_cast<std::size_t>(i)] = vec_dot(w, V[static_cast<std::size_t>(i)]);
                for (std::size_t p = 0; p < P; ++p)
                    w[p] -= h[static_cast<std::size_t>(i)] * V[static_cast<std::size_t>(i)][p];
            }
            h[static_cast<std::size_t>(j) + 1] = vec_norm2(w);
            // Givens update
            for (int i = 0; i < j; ++i) {
                double t = cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] +
                           sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1];
                h[static_cast<std::size_t>(i) + 1] =
                    -sn[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] +
                    cs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i) + 1];
                h[static_cast<std::size_t>(i)] = t;
            }
            double denom = std::hypot(h[static_cast<std::size_t>(j)],
                                      h[static_cast<std::size_t>(j) + 1]);
            double c = denom == 0.0 ? 1.0 : h[static_cast<std::size_t>(j)] / denom;
            double s = denom == 0.0 ? 0.0 : h[static_cast<std::size_t>(j) + 1] / denom;
            cs.push_back(c);
            sn.push_back(s);
            h[static_cast<std::size_t>(j)] = denom;
            h[static_cast<std::size_t>(j) + 1] = 0.0;
            g.push_back(-s * g[static_cast<std::size_t>(j)]);
            g[static_cast<std::size_t>(j)] *= c;
            H.push_back(h);
            used = j + 1;
            if (h[static_cast<std::size_t>(j)] != 0.0 &&
                std::fabs(g[static_cast<std::size_t>(j) + 1]) <= rtol * bnorm)
                break;
            if (h[static_cast<std::size_t>(j)] == 0.0) break; // lucky breakdown
            if (j + 1 < m) {
                std::vector<double> vn = w;
                double nn = vec_norm2(vn);
                if (nn == 0.0) break;
                for (double& v : vn) v /= nn;
                V.push_back(std::move(vn));
            }
        }
        // back substitution
        std::vector<double> y(static_cast<std::size_t>(used), 0.0);
        for (int i = used - 1; i >= 0; --i) {
            double s = g[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < used; ++k)
                s -= H[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                     y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(i)] = s / H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        }
        std::vector<double> z(P, 0.0);
        for (int i = 0; i < used; ++i)
            for (std::size_t p = 0; p < P; ++p)
                z[p] += y[static_cast<std::size_t>(i)] * V[static_cast<std::size_t>(i)][p];
        std::vector<double> Mz = M(z);
        for (std::size_t p = 0; p < P; ++p) x[p] += Mz[p];
        done += used;
        if (used == 0) break;
    }
    return x;
}

struct State {
    ScalarField phi;
    double c = 0.0;
    std::vector<Spectrum> lam;
    std::vector<double> fval, rhs, gsum;
    ScalarField R;
    double res_linf = 0.0;
    double min_margin = 0.0;
    bool feasible = false;
    std::vector<cplx> W; // points * n * n, d f / d A
};

void validate_problem(const ProblemSpec& pb) {
    if (pb.chi.grid != pb.G.grid) throw std::invalid_argument("solve_periodic: field grids differ");
    if (pb.chi.grid.n != pb.op.n)
        throw std::invalid_argument("solve_periodic: operator dimension mismatch");
    if (pb.monotone_beta < 0.0)
        throw std::invalid_argument("solve_periodic: monotone beta must be positive");
}

/// Evaluate residual, margins and (optionally) the gradient matrices W.
void eval_state(const ProblemSpec& pb, State& s, bool want_jacobian) {
    const TorusGrid& g = pb.chi.grid;
    const int n = g.n;
    HermitianField A = ddc(s.phi, pb.diff);
    for (std::size_t i = 0; i < A.m.size(); ++i) A.m[i] += pb.chi.m[i];
    s.lam = eigenvalues(A);
    ConeId cone = ConeId::gamma_k(pb.op.k);
    s.feasible = true;
    for (const Spectrum& l : s.lam)
        if (!in_cone(cone, l)) {
            s.feasible = false;
            return;
        }
    const std::size_t P = g.points();
    s.fval.resize(P);
    s.rhs.resize(P);
    s.gsum.assign(P, 0.0);
    s.R = ScalarField(g);
    s.min_margin = std::numeric_limits<double>::infinity();
    if (want_jacobian) s.W.assign(P * static_cast<std::size_t>(n * n), 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        s.fval[p] = eval_f(pb.op, s.lam[p]);
        s.rhs[p] = pb.monotone_beta > 0.0 ? std::exp(pb.G[p] + pb.monotone_beta * s.phi[p])
                                          : std::exp(pb.G[p] + s.c);
        s.R[p] = s.fval[p] - s.rhs[p];
        s.min_margin = std::min(s.min_margin, cone_margin(cone, s.lam[p]));
        if (!want_jacobian) continue;
        Spectrum grad = grad_f(pb.op, s.lam[p]);
        for (double gv : grad) s.gsum[p] += gv;
        cplx* W = s.W.data() + p * static_cast<std::size_t>(n * n);
        if (n == 1) {
            W[0] = grad[0];
        } else {
            double l1 = s.lam[p][0], l2 = s.lam[p][1];
            double scale = std::max({1.0, std::fabs(l1), std::fabs(l2)});
            if (l2 - l1 < 1e-12 * scale) {
                double avg = 0.5 * (grad[0] + grad[1]);
                W[0] = avg;
                W[3] = avg;
            } else {
                // W = g2 I + (g1 - g2) P1, P1 = (A - l2)/(l1 - l2)
                double w1 = (grad[0] - grad[1]) / (l1 - l2);
                W[0] = grad[1] + w1 * (A.at(p, 0, 0) - l2);
                W[1] = w1 * A.at(p, 0, 1);
                W[2] = w1 * A.at(p, 1, 0);
                W[3] = grad[1] + w1 * (A.at(p, 1, 1) - l2);
            }
        }
    }
    s.res_linf = norm_linf(s.R);
}

SolveResult newton_attempt(const ProblemSpec& pb, ScalarField phi_init, bool infeasible_is_arg_error) {
    auto t0 = std::chrono::steady_clock::now();
    const TorusGrid& g = pb.chi.grid;
    const std::size_t P = g.points();
    const int n = g.n;
    const bool monotone = pb.monotone_beta > 0.0;

    State s;
    s.phi = std::move(phi_init);
    if (!monotone) {
        double m0 = mean(s.phi);
        for (double& v : s.phi.v) v -= m0;
    }
    s.c = 0.0;
    eval_state(pb, s, true);
    if (!s.feasible) {
        if (infeasible_is_arg_error)
            throw std::invalid_argument("solve_periodic: initial field leaves the cone");
        throw solver_error("solve_periodic: initial field leaves the cone");
    }
    if (!monotone) {
        // start c from the integral balance of the current state
        double fm = 0.0, em = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            fm += s.fval[p];
            em += std::exp(pb.G[p]);
        }
        s.c = std::log(fm / em);
        eval_state(pb, s, true);
    }

    SolveResult out;
    out.residual_history.push_back(s.res_linf);
    out.cone_margin_history.push_back(s.min_margin);

    const std::size_t dim = monotone ? P : P + 1;
    for (int iter = 0; iter < pb.max_newton_steps; ++iter) {
        if (s.res_linf <= pb.residual_linf) break;

        double kappa = 0.0;
        for (std::size_t p = 0; p < P; ++p) kappa += s.gsum[p];
        kappa /= static_cast<double>(P);
        double rhs_mean = 0.0;
        for (std::size_t p = 0; p < P; ++p) rhs_mean += s.rhs[p];
        rhs_mean /= static_cast<double>(P);

        auto applyJ = [&](const std::vector<double>& x) {
            ScalarField dphi(g);
            std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(P), dphi.v.begin());
            HermitianField B = ddc(dphi, pb.diff);
            std::vector<double> y(dim, 0.0);
            for (std::size_t p = 0; p < P; ++p) {
                const cplx* W = s.W.data() + p * static_cast<std::size_t>(n * n);
                double tr = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        tr += (W[i * n + j] * B.at(p, j, i)).real();
                y[p] = tr;
                if (monotone)
                    y[p] -= pb.monotone_beta * s.rhs[p] * dphi[p];
                else
                    y[p] -= s.rhs[p] * x[P];
            }
            if (!monotone) y[P] = mean(dphi);
            return y;
        };
        auto applyM = [&](const std::vector<double>& r) {
            ScalarField rf(g);
            std::copy(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(P), rf.v.begin());
            double rm = mean(rf);
            ScalarField u = quarter_laplacian_inverse(rf);
            std::vector<double> y(dim, 0.0);
            double scale = static_cast<double>(n) / kappa;
            if (monotone) {
                double shift = -rm / (pb.monotone_beta * rhs_mean);
                for (std::size_t p = 0; p < P; ++p) y[p] = scale * u[p] + shift;
            } else {
                for (std::size_t p = 0; p < P; ++p) y[p] = scale * u[p] + r[P];
                y[P] = -rm / rhs_mean;
            }
            return y;
        };

        std::vector<double> b(dim, 0.0);
        for (std::size_t p = 0; p < P; ++p) b[p] = -s.R[p];
        if (!monotone) b[P] = -mean(s.phi);
        std::vector<double> step_vec = gmres(applyJ, applyM, b, 1e-8, 400, 80);

        ScalarField dphi(g);
        std::copy(step_vec.begin(), step_vec.begin() + static_cast<std::ptrdiff_t>(P),
                  dphi.v.begin());
        double dc = monotone ? 0.0 : step_vec[P];

        double step = 1.0;
        State trial;
        for (;;) {
            trial.phi = s.phi;
            for (std::size_t p = 0; p < P; ++p) trial.phi[p] += step * dphi[p];
            trial.c = s.c + step * dc;
            eval_state(pb, trial, false);
            bool margin_ok = trial.feasible && trial.min_margin >= 0.5 * s.min_margin;
            bool armijo = trial.feasible && trial.res_linf <= (1.0 - 1e-4 * step) * s.res_linf;
            if (margin_ok && armijo) break;
            step *= 0.5;
            if (step < std::ldexp(1.0, -30)) {
                std::ostringstream what;
                what << "solve_periodic: damping underflow at residual " << s.res_linf
                     << " (iteration " << iter << ")";
                throw solver_error(what.str());
            }
        }
        s.phi = std::move(trial.phi);
        s.c = trial.c;
        if (!monotone) {
            double m0 = mean(s.phi); // exact gauge move, residual unchanged
            for (double& v : s.phi.v) v -= m0;
        }
        eval_state(pb, s, true);
        out.residual_history.push_back(s.res_linf);
        out.damping_history.push_back(step);
        out.cone_margin_history.push_back(s.min_margin);
    }
    if (s.res_linf > pb.residual_linf)
        throw solver_error("solve_periodic: no convergence within the Newton step budget");

    out.phi = s.phi;
    out.c = s.c;
    out.phi_sup = s.phi;
    double sup = *std::max_element(s.phi.v.begin(), s.phi.v.end());
    for (double& v : out.phi_sup.v) v -= sup;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

} // namespace

SolveResult solve_periodic(const ProblemSpec& problem, const ScalarField* phi0) {
    validate_problem(problem);
    const TorusGrid& g = problem.chi.grid;
    if (phi0 && phi0->grid != g)
        throw std::invalid_argument("solve_periodic: initial field grid mismatch");
    ScalarField start = phi0 ? *phi0 : ScalarField(g);
    try {
        return newton_attempt(problem, start, true);
    } catch (const solver_error&) {
        // continuation in the G amplitude, warm-started stage to stage
        ScalarField warm = start;
        SolveResult last;
        for (double sfrac : {0.25, 0.5, 0.75, 1.0}) {
            ProblemSpec stage = problem;
            stage.G = sfrac * problem.G;
            last = newton_attempt(stage, warm, false);
            warm = last.phi;
        }
        return last;
    }
}

ScalarField glue_subsolutions(const std::vector<GlueChart>& cover) {
    if (cover.empty()) throw std::invalid_argument("glue_subsolutions: empty cover");
    const TorusGrid& g = cover[0].v.grid;
    const std::size_t P = g.points();
    for (const GlueChart& ch : cover) {
        if (ch.v.grid != g) throw std::invalid_argument("glue_subsolutions: grid mismatch");
        if (ch.mask.size() != P) throw std::invalid_argument("glue_subsolutions: bad mask size");
        if (!(ch.eps > 0.0)) throw std::invalid_argument("glue_subsolutions: eps must be positive");
    }
    for (std::size_t p = 0; p < P; ++p) {
        bool covered = false;
        for (const GlueChart& ch : cover) covered = covered || ch.mask[p];
        if (!covered)
            throw glue_error("glue_subsolutions: point not covered by any chart", 0, {p});
    }
    // each chart must be dominated by the rest of the cover on its boundary,
    // otherwise the glued field would inherit the chart's cutoff there
    for (std::size_t a = 0; a < cover.size(); ++a) {
        const GlueChart& ch = cover[a];
        std::vector<std::size_t> bad;
        for (std::size_t p = 0; p < P; ++p) {
            if (!ch.mask[p]) continue;
            bool boundary = false;
            for (int ax = 0; ax < g.axes() && !boundary; ++ax)
                boundary = !ch.mask[g.shift(p, ax, 1)] || !ch.mask[g.shift(p, ax, -1)];
            if (!boundary) continue;
            double best_other = -std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < cover.size(); ++b)
                if (b != a && cover[b].mask[p])
                    best_other = std::max(best_other, cover[b].v[p] - cover[b].eps);
            if (!(ch.v[p] + ch.eps <= best_other)) bad.push_back(p);
        }
        if (!bad.empty())
            throw glue_error("glue_subsolutions: chart not dominated on its boundary", a,
                             std::move(bad));
    }
    ScalarField w(g);
    std::vector<double> t;
    MollifierWeights mw;
    for (std::size_t p = 0; p < P; ++p) {
        t.clear();
        mw.eps.clear();
        for (const GlueChart& ch : cover)
            if (ch.mask[p]) {
                t.push_back(ch.v[p]);
                mw.eps.push_back(ch.eps);
            }
        w[p] = t.size() == 1 ? t[0] : reg_max(t, mw);
    }
    return w;
}

} // namespace hessianlab
