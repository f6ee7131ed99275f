#pragma once

#include "hessianlab/symfunc.hpp"
#include "hessianlab/torusgrid.hpp"

#include <cstddef>
#include <vector>

namespace hessianlab {

/// Result of a sup/inf convolution pass over a torus field.
struct ConvolutionReport {
    double eps = 0.0;
    ScalarField field;
    double search_radius = 0.0;
    /// min over grid points and axes of the discrete second difference of
    /// field(z) + |z|^2/eps (sup) resp. -field(z) + |z|^2/eps (inf); the
    /// shifted function is convex along lines, so this stays >= -1e-10.
    double semiconvexity = 0.0;
};

/// Which operator/cone pair a subsolution check runs against.
enum class ConeMode { f_on_gamma, f_inf_on_gamma_inf };

struct SubsolutionReport {
    ConeMode mode = ConeMode::f_on_gamma;
    /// min over admissible grid points of (operator - rhs) for subsolutions,
    /// (rhs - operator) for supersolutions.
    double worst_margin = 0.0;
    /// subsolution: points whose spectrum leaves the required cone;
    /// supersolution: points where the viscosity disjunction fails.
    std::vector<std::size_t> violations;
    /// largest certified margin, max(0, worst_margin); 0 when violations exist
    double delta0 = 0.0;
};

/// phi^eps(z) = max over offsets |xi| <= r* of phi(z+xi) + eps - |xi|^2/eps,
/// r* = sqrt(eps * osc(phi)) + h (farther offsets cannot attain the max).
ConvolutionReport sup_convolution(const ScalarField& phi, double eps);

/// phi_eps(z) = min ... - eps + |xi|^2/eps; satisfies (-phi)^eps = -(phi_eps)
/// exactly.
ConvolutionReport inf_convolution(const ScalarField& phi, double eps);

/// Pointwise margins of u as a discrete viscosity subsolution of
/// operator(lambda[chi + ddc u]) >= rhs; second-order differences stand in
/// for touching test functions.
SubsolutionReport check_subsolution(const OperatorSpec& spec, ConeMode mode,
                                    const HermitianField& chi, const ScalarField& u,
                                    const ScalarField& rhs,
                                    DiffMethod method = DiffMethod::fd2);

/// Supersolution check: at every point either lambda leaves Gamma, or
/// f(lambda) <= rhs; margins reported, never thresholded here.
SubsolutionReport check_supersolution(const OperatorSpec& spec, const HermitianField& chi,
                                      const ScalarField& u, const ScalarField& rhs,
                                      DiffMethod method = DiffMethod::fd2);

} // namespace hessianlab
