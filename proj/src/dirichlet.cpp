#include "hessianlab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>

namespace hessianlab {

namespace {

using cplx = std::complex<double>;

/// ddc stencil on the uniform box grid: for each offset in {-1,0,1}^{2n} the
/// constant complex matrix dB/du(offset) at unit 1/h^2.  Real axes of z_i are
/// (2i, 2i+1); mixed derivatives use the 4-corner form.
std::map<std::vector<int>, std::vector<cplx>> ddc_stencil(int n) {
    const int axes = 2 * n;
    std::map<std::vector<int>, std::vector<cplx>> out;
    auto add = [&](const std::vector<int>& off, int i, int j, cplx w) {
        auto& m = out[off];
        if (m.empty()) m.assign(static_cast<std::size_t>(n * n), 0.0);
        m[static_cast<std::size_t>(i * n + j)] += w;
    };
    auto second = [&](int a, int b, int i, int j, cplx w) {
        std::vector<int> off(static_cast<std::size_t>(axes), 0);
        if (a == b) {
            off[static_cast<std::size_t>(a)] = 1;
            add(off, i, j, w);
            off[static_cast<std::size_t>(a)] = -1;
            add(off, i, j, w);
            off[static_cast<std::size_t>(a)] = 0;
            add(off, i, j, -2.0 * w);
        } else {
            for (int sa : {1, -1})
                for (int sb : {1, -1}) {
                    off[static_cast<std::size_t>(a)] = sa;
                    off[static_cast<std::size_t>(b)] = sb;
                    add(off, i, j, 0.25 * static_cast<double>(sa * sb) * w);
                }
        }
    };
    const cplx I(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            second(2 * i, 2 * j, i, j, 0.25);
            second(2 * i + 1, 2 * j + 1, i, j, 0.25);
            if (i != j) {
                second(2 * i, 2 * j + 1, i, j, 0.25 * I);
                second(2 * i + 1, 2 * j, i, j, -0.25 * I);
            }
        }
    return out;
}

/// One interior row: B_p(u) = cst + sum_k weight[k] * u[col[k]], where the
/// columns are interior rows and each weight is an n x n complex matrix.
struct Row {
    std::size_t point = 0;               // flat grid index
    std::vector<std::ptrdiff_t> col;     // interior row indices
    std::vector<std::vector<cplx>> weight;
    std::vector<cplx> cst;
    double rhs = 0.0;
};

} // namespace

std::vector<double> DirichletResult::point(const std::vector<int>& idx) const {
    std::vector<double> x(idx.size());
    double h = 2.0 * radius / (M - 1);
    for (std::size_t a = 0; a < idx.size(); ++a) x[a] = -radius + idx[a] * h;
    return x;
}

std::size_t DirichletResult::index(const std::vector<int>& idx) const {
    std::size_t p = 0;
    for (int v : idx) p = p * static_cast<std::size_t>(M) + static_cast<std::size_t>(v);
    return p;
}

DirichletResult solve_dirichlet_ball(
    const OperatorSpec& spec, double radius,
    const std::function<double(const std::vector<double>&)>& boundary,
    const std::function<double(const std::vector<double>&)>& rhs, int M) {
    if (spec.n < 1 || spec.n > 2)
        throw std::invalid_argument("solve_dirichlet_ball: n must be 1 or 2");
    if (!(radius > 0.0))
        throw std::invalid_argument("solve_dirichlet_ball: radius must be positive");
    if (M == 0) M = spec.n == 1 ? 33 : 13;
    if (M < 5) throw std::invalid_argument("solve_dirichlet_ball: M too small");

    const int n = spec.n;
    const int nn = n * n;
    const int axes = 2 * n;
    const double h = 2.0 * radius / (M - 1);
    std::size_t P = 1;
    for (int a = 0; a < axes; ++a) P *= static_cast<std::size_t>(M);

    auto unflatten = [&](std::size_t p) {
        std::vector<int> idx(static_cast<std::size_t>(axes));
        for (int a = axes - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(p % static_cast<std::size_t>(M));
            p /= static_cast<std::size_t>(M);
        }
        return idx;
    };
    auto coord = [&](const std::vector<int>& idx) {
        std::vector<double> x(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) x[a] = -radius + idx[a] * h;
        return x;
    };

    DirichletResult out;
    out.n = n;
    out.M = M;
    out.radius = radius;
    out.interior.assign(P, 0);
    out.values.assign(P, 0.0);

    std::vector<std::ptrdiff_t> row_of(P, -1);
    std::vector<std::size_t> solve_points;
    double rhs_inf = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < P; ++p) {
        std::vector<double> x = coord(unflatten(p));
        double r2 = 0.0;
        for (double xi : x) r2 += xi * xi;
        if (std::sqrt(r2) < radius * (1.0 - 1e-12)) {
            out.interior[p] = 1;
            row_of[p] = static_cast<std::ptrdiff_t>(solve_points.size());
            solve_points.push_back(p);
            rhs_inf = std::min(rhs_inf, rhs(x));
        } else {
            // data points report the boundary value at their radial projection
            double r = std::sqrt(r2);
            std::vector<double> xs = x;
            if (r > 0.0)
                for (double& xi : xs) xi *= radius / r;
            else
                xs[0] = radius;
            out.values[p] = boundary(xs);
        }
    }
    if (solve_points.empty())
        throw std::invalid_argument("solve_dirichlet_ball: no interior points at this M");
    if (!(rhs_inf > 0.0))
        throw std::invalid_argument("solve_dirichlet_ball: rhs must be positive on the ball");

    // Effective stencils.  A neighbor outside the ball is replaced by the
    // Lagrange extrapolation along its ray through the sphere crossing at
    // parameter theta in (0,1]; the third node is the opposite neighbor (or
    // the opposite crossing when that neighbor is outside too), so the ghost
    // is exact on quadratics and the seed's A |x|^2 term passes through
    // the discrete operator as exactly A * identity.
    auto sten = ddc_stencil(n);
    std::vector<Row> rows;
    rows.reserve(solve_points.size());
    for (std::size_t p : solve_points) {
        std::vector<int> idx = unflatten(p);
        std::vector<double> xp = coord(idx);
        double c0 = -radius * radius;
        for (double xi : xp) c0 += xi * xi;

        Row row;
        row.point = p;
        row.cst.assign(static_cast<std::size_t>(nn), 0.0);
        row.rhs = rhs(xp);
        std::map<std::ptrdiff_t, std::vector<cplx>> cols;
        auto add_col = [&](std::ptrdiff_t r, const std::vector<cplx>& mat, double w) {
            auto& m = cols[r];
            if (m.empty()) m.assign(static_cast<std::size_t>(nn), 0.0);
            for (int e = 0; e < nn; ++e)
                m[static_cast<std::size_t>(e)] += mat[static_cast<std::size_t>(e)] * w;
        };
        const double inv_h2 = 1.0 / (h * h);
        std::vector<int> nbi(idx.size());
        for (const auto& [off, mat] : sten) {
            bool center = true;
            double a = 0.0, b = 0.0;
            std::vector<double> xq(xp.size());
            for (std::size_t e = 0; e < idx.size(); ++e) {
                nbi[e] = idx[e] + off[e];
                double d = off[e] * h;
                xq[e] = xp[e] + d;
                a += d * d;
                b += 2.0 * xp[e] * d;
                center = center && off[e] == 0;
            }
            if (center) {
                add_col(row_of[p], mat, inv_h2);
                continue;
            }
            double rq = 0.0;
            for (double xi : xq) rq += xi * xi;
            if (std::sqrt(rq) < radius * (1.0 - 1e-12)) {
                std::size_t q = 0;
                for (int v : nbi) q = q * static_cast<std::size_t>(M) + static_cast<std::size_t>(v);
                add_col(row_of[q], mat, inv_h2);
                continue;
            }
            double disc = std::sqrt(b * b - 4.0 * a * c0);
            double theta = (-b + disc) / (2.0 * a);   // forward crossing
            double theta2 = (b + disc) / (2.0 * a);   // backward crossing
            std::vector<double> xc(xp.size());
            for (std::size_t e = 0; e < xp.size(); ++e) xc[e] = xp[e] + theta * off[e] * h;
            double gc = boundary(xc);
            double t0;
            double val0 = 0.0;
            std::ptrdiff_t col0 = -1;
            bool opp_inside = theta2 > 1.0;
            if (opp_inside) {
                t0 = -1.0;
                std::size_t q = 0;
                for (std::size_t e = 0; e < idx.size(); ++e) {
                    int v = idx[e] - off[e];
                    q = q * static_cast<std::size_t>(M) + static_cast<std::size_t>(v);
                }
                col0 = row_of[q];
            } else {
                t0 = -theta2;
                for (std::size_t e = 0; e < xp.size(); ++e)
                    xc[e] = xp[e] - theta2 * off[e] * h;
                val0 = boundary(xc);
            }
            double L0 = (1.0 - theta) / (t0 * (t0 - theta));
            double Lp = (1.0 - t0) * (1.0 - theta) / (t0 * theta);
            double Lg = (1.0 - t0) / ((theta - t0) * theta);
            if (opp_inside)
                add_col(col0, mat, inv_h2 * L0);
            else
                for (int e = 0; e < nn; ++e)
                    row.cst[static_cast<std::size_t>(e)] +=
                        mat[static_cast<std::size_t>(e)] * (inv_h2 * L0 * val0);
            add_col(row_of[p], mat, inv_h2 * Lp);
            for (int e = 0; e < nn; ++e)
                row.cst[static_cast<std::size_t>(e)] +=
                    mat[static_cast<std::size_t>(e)] * (inv_h2 * Lg * gc);
        }
        for (int i = 0; i < n; ++i) row.cst[static_cast<std::size_t>(i * n + i)] += 1.0; // chi = I
        for (auto& [c, m] : cols) {
            row.col.push_back(c);
            row.weight.push_back(std::move(m));
        }
        rows.push_back(std::move(row));
    }

    const std::size_t R = rows.size();
    ConeId cone = ConeId::gamma_k(spec.k);
    std::vector<cplx> Bmat(static_cast<std::size_t>(nn));
    auto spectrum_at = [&](const Row& row, const std::vector<double>& w) {
        Bmat = row.cst;
        for (std::size_t k = 0; k < row.col.size(); ++k) {
            double uv = w[static_cast<std::size_t>(row.col[k])];
            for (int e = 0; e < nn; ++e)
                Bmat[static_cast<std::size_t>(e)] += row.weight[k][static_cast<std::size_t>(e)] * uv;
        }
        return hermitian_eigenvalues(Bmat.data(), n);
    };

    // quadratic subsolution seed A(|x|^2 - r^2) + radial boundary extension,
    // A doubled until the discrete spectrum is cone-feasible everywhere
    std::vector<double> u(R, 0.0);
    double A = 0.25;
    bool feasible = false;
    for (int tries = 0; tries < 60 && !feasible; ++tries) {
        A *= 2.0;
        for (std::size_t r = 0; r < R; ++r) {
            std::vector<double> x = coord(unflatten(rows[r].point));
            double r2 = 0.0;
            for (double xi : x) r2 += xi * xi;
            std::vector<double> xs = x;
            double rr = std::sqrt(r2);
            if (rr > 0.0)
                for (double& xi : xs) xi *= radius / rr;
            else
                xs[0] = radius;
            u[r] = A * (r2 - radius * radius) + boundary(xs);
        }
        feasible = true;
        for (std::size_t r = 0; r < R && feasible; ++r)
            feasible = in_cone(cone, spectrum_at(rows[r], u));
    }
    if (!feasible)
        throw solver_error("solve_dirichlet_ball: quadratic seed never became cone-feasible");
    out.initial_A = A;

    auto residual = [&](const std::vector<double>& w, Eigen::VectorXd& F, double& linf,
                        bool& cone_ok) {
        linf = 0.0;
        cone_ok = true;
        for (std::size_t r = 0; r < R; ++r) {
            Spectrum lam = spectrum_at(rows[r], w);
            if (!in_cone(cone, lam)) {
                cone_ok = false;
                return;
            }
            F(static_cast<Eigen::Index>(r)) = eval_f(spec, lam) - rows[r].rhs;
            linf = std::max(linf, std::fabs(F(static_cast<Eigen::Index>(r))));
        }
    };

    Eigen::VectorXd F(static_cast<Eigen::Index>(R));
    double res = 0.0;
    bool ok = true;
    residual(u, F, res, ok);
    const double target = 1e-9, required = 1e-6;
    for (int iter = 0; iter < 80 && res > target; ++iter) {
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t r = 0; r < R; ++r) {
            Spectrum lam = spectrum_at(rows[r], u); // Bmat now holds A at this row
            Spectrum grad = grad_f(spec, lam);
            std::vector<cplx> W(static_cast<std::size_t>(nn), 0.0);
            if (n == 1) {
                W[0] = grad[0];
            } else {
                double l1 = lam[0], l2 = lam[1];
                double scale = std::max({1.0, std::fabs(l1), std::fabs(l2)});
                if (l2 - l1 < 1e-12 * scale) {
                    double avg = 0.5 * (grad[0] + grad[1]);
                    W[0] = avg;
                    W[3] = avg;
                } else {
                    double w1 = (grad[0] - grad[1]) / (l1 - l2);
                    W[0] = grad[1] + w1 * (Bmat[0] - l2);
                    W[1] = w1 * Bmat[1];
                    W[2] = w1 * Bmat[2];
                    W[3] = grad[1] + w1 * (Bmat[3] - l2);
                }
            }
            for (std::size_t k = 0; k < rows[r].col.size(); ++k) {
                double d = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        d += (W[static_cast<std::size_t>(i * n + j)] *
                              rows[r].weight[k][static_cast<std::size_t>(j * n + i)])
                                 .real();
                trip.emplace_back(static_cast<int>(r), static_cast<int>(rows[r].col[k]), d);
            }
        }
        Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(R));
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw solver_error("solve_dirichlet_ball: singular linearization");
        Eigen::VectorXd step = lu.solve(-F);

        double s = 1.0;
        std::vector<double> trial(R);
        bool accepted = false;
        while (!accepted) {
            for (std::size_t r = 0; r < R; ++r)
                trial[r] = u[r] + s * step(static_cast<Eigen::Index>(r));
            Eigen::VectorXd Ft(static_cast<Eigen::Index>(R));
            double rt = 0.0;
            bool okt = true;
            residual(trial, Ft, rt, okt);
            if (okt && rt <= (1.0 - 1e-4 * s) * res) {
                u = trial;
                F = Ft;
                res = rt;
                accepted = true;
            } else {
                s *= 0.5;
                if (s < std::ldexp(1.0, -30)) break; // stalled, accept current u
            }
        }
        if (!accepted) break;
    }
    if (res > required) throw solver_error("solve_dirichlet_ball: no convergence");

    for (std::size_t r = 0; r < R; ++r) out.values[rows[r].point] = u[r];
    out.residual_linf = res;
    return out;
}

} // namespace hessianlab
