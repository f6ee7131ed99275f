#pragma once

#include "hessianlab/symfunc.hpp"
#include "hessianlab/torusgrid.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessianlab {

/// Periodic problem f(lambda[chi + ddc phi]) = e^{G + c}.  Fixed-G mode
/// treats c as an unknown closed by mean(phi) = 0; monotone mode uses
/// G(x, phi) = G0(x) + beta*phi with beta > 0 and c fixed at 0.
struct ProblemSpec {
    OperatorSpec op;
    HermitianField chi;
    ScalarField G;
    double monotone_beta = 0.0; // 0 = fixed-G mode
    double residual_linf = 1e-9;
    int max_newton_steps = 60;
    DiffMethod diff = DiffMethod::spectral;
};

struct SolveResult {
    ScalarField phi;        // mean-zero gauge
    ScalarField phi_sup;    // sup-normalized copy, sup = 0
    double c = 0.0;
    std::vector<double> residual_history; // L-inf per accepted iteration
    std::vector<double> damping_history;
    std::vector<double> cone_margin_history; // min distance of lambda to the cone boundary
    double wall_seconds = 0.0;
};

class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

SolveResult solve_periodic(const ProblemSpec& problem, const ScalarField* phi0 = nullptr);

/// Dirichlet problem for f(lambda[I + ddc u]) = rhs on the ball |x| < r in
/// R^{2n}, boundary values prescribed on the sphere; fd2 Newton on the grid
/// points inside the ball, initialized from a quadratic subsolution
/// A(|x|^2 - r^2) + boundary extension with A doubled until cone-feasible.
struct DirichletResult {
    int n = 1;
    int M = 0;        // samples per real axis over [-r, r]
    double radius = 0.0;
    std::vector<double> values;  // M^{2n}, boundary/exterior filled from data
    std::vector<char> interior;  // 1 on interior solve points
    double residual_linf = 0.0;
    double initial_A = 0.0; // accepted quadratic-subsolution coefficient

    std::vector<double> point(const std::vector<int>& idx) const;
    std::size_t index(const std::vector<int>& idx) const;
};

DirichletResult solve_dirichlet_ball(
    const OperatorSpec& spec, double radius,
    const std::function<double(const std::vector<double>&)>& boundary,
    const std::function<double(const std::vector<double>&)>& rhs, int M = 0);

/// Certified upper bound on e^c from e^c = inf_u max e^{-G} f(lambda[chi+ddc u]):
/// every cone-feasible trial u bounds e^c from above.  Derivative-free
/// coordinate descent over truncated Fourier coefficients.
struct SupSlopeResult {
    double e_c_upper = 0.0;
    ScalarField best_u;
    int evaluations = 0;
};

SupSlopeResult estimate_sup_slope(const OperatorSpec& spec, const HermitianField& chi,
                                  const ScalarField& G, int mode_cutoff, int budget);

/// One chart of a subsolution cover.
struct GlueChart {
    std::vector<char> mask; // Omega_alpha as grid-point membership
    ScalarField v;
    double eps = 0.0;
};

class glue_error : public std::runtime_error {
public:
    glue_error(const std::string& what, std::size_t chart, std::vector<std::size_t> points)
        : std::runtime_error(what), chart(chart), points(std::move(points)) {}
    std::size_t chart;
    std::vector<std::size_t> points;
};

/// w = M_eps{v_alpha : x in Omega_alpha}; requires every chart to be
/// dominated by another on its own boundary (checked, failure -> glue_error).
ScalarField glue_subsolutions(const std::vector<GlueChart>& cover);

} // namespace hessianlab
