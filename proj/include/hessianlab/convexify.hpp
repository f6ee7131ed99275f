#pragma once

#include "hessianlab/symfunc.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace hessianlab {

/// l(x) = c + a . x
struct Affine {
    double c = 0.0;
    std::vector<double> a;

    double operator()(const std::vector<double>& x) const;
};

/// Axis-aligned open box in R^d, d <= 2.
struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const std::vector<double>& x, double margin = 0.0) const;
    double diameter() const;
    double min_width() const;
};

/// Strictly convex function given by evaluation plus a supporting affine
/// at any interior query point (u >= l_x0, equality only at x0).
struct ConvexOracle {
    Box domain;
    std::function<double(const std::vector<double>&)> eval;
    std::function<Affine(const std::vector<double>&)> supporting_affine;
};

/// Thrown when the smoothing construction cannot proceed; witness is the
/// sample point where the obstruction was observed.
class construction_error : public std::runtime_error {
public:
    construction_error(const std::string& what, std::vector<double> witness_)
        : std::runtime_error(what), witness(std::move(witness_)) {}
    std::vector<double> witness;
};

/// Sublevel section S_t(x0) = { u < l_x0 + t } with a sampled diameter.
struct SectionInfo {
    Affine l;
    double t = 0.0;
    double diameter = 0.0;
    std::function<bool(const std::vector<double>&)> contains;
};

SectionInfo section(const ConvexOracle& u, const std::vector<double>& x0, double t);

/// Smooth strictly convex interpolant built from local quadratics
/// v_j = l_{x_j} + 3 t_j / 4 + q_j |x - x_j|^2 glued by reg_max with
/// widths eps_j; D^2 v_j >= eps_j I holds because eps_j <= 2 q_j.
class SmoothedConvex {
public:
    Box domain;
    std::vector<std::vector<double>> seeds;
    std::vector<Affine> affines;
    std::vector<double> levels;  // section levels t_j
    std::vector<double> margins; // gluing widths eps_j
    std::vector<double> quads;   // quadratic coefficients q_j
    std::vector<double> radii;   // sampled outer radius of S_{t_j}

    double operator()(const std::vector<double>& x) const;

    /// Rebuilds the spatial seed index; called after adding seeds.
    void build_index();

    /// Indices of all seeds whose section can reach x (radius query on the
    /// spatial index).
    void candidate_seeds(const std::vector<double>& x, std::vector<int>& out) const;

private:
    struct RadiusClass {
        double cell = 1.0;
        std::vector<std::pair<long long, std::vector<int>>> cells; // sorted by key
    };
    std::vector<RadiusClass> classes_;
};

/// Glues an interpolant with u <= result <= u + h and positive definite
/// Hessian; h must be positive on the closed domain, d <= 2.
SmoothedConvex smooth_convex(const ConvexOracle& u,
                             const std::function<double(const std::vector<double>&)>& h);

/// Central-difference Hessian eigenvalues at x, step = min box width / 512.
std::vector<double> discrete_hessian_eigs(const SmoothedConvex& f, const std::vector<double>& x);

/// f_inf(lambda) + (eps/n) sum_i arctan(sum_{k != i} lambda_k).
double f_tilde_eps(const OperatorSpec& spec, double eps, const Spectrum& lambda);

/// Smooth, symmetric, monotone regularization of f_inf with
/// (1 - eps) f_inf <= g_eps <= f_inf + (pi/2) eps.  For n = 2 this runs
/// the full convexification pipeline of f_tilde_eps on a compact box;
/// for n >= 3 a soft-min power mean of the f_inf branches stands in.
class GEps {
public:
    GEps(const OperatorSpec& spec, double eps, double box_lo = 0.25, double box_hi = 1.75);

    double operator()(const Spectrum& lambda) const;

    const OperatorSpec& spec() const { return spec_; }
    double eps() const { return eps_; }

private:
    OperatorSpec spec_;
    double eps_;
    double power_ = 0.0; // n >= 3 surrogate exponent
    std::shared_ptr<const SmoothedConvex> smooth_; // n = 2 pipeline
};

/// Convenience wrapper over a process-wide cache of GEps objects built on
/// the default box.
double g_eps(const OperatorSpec& spec, double eps, const Spectrum& lambda);

} // namespace hessianlab
