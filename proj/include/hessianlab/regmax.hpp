#pragma once

#include <vector>

namespace hessianlab {

/// The epsilon-vector of the regularized maximum.
struct MollifierWeights {
    std::vector<double> eps;
};

/// The fixed 1-D bump s -> exp(-1/(1-s^2)) on (-1,1), scaled to integral 1.
/// Normalization constant precomputed by 256-node Gauss-Legendre quadrature.
double mollifier(double s);

/// Integral of the normalized bump over (-1, s].
double mollifier_cdf(double s);

/// Gauss-Legendre nodes/weights on [-1,1], cached per order.
struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};
const QuadRule& gauss_legendre(int order);

/// Regularized maximum M_eps(t). Dominated coordinates (drop rule) are
/// removed first; the remaining active set is integrated by tensor-product
/// Gauss-Legendre quadrature with `nodes` points per axis when it has at
/// most 4 coordinates, and by an equivalent 1-D layer-cake quadrature of
/// the mollifier CDFs otherwise.
double reg_max(const std::vector<double>& t, const MollifierWeights& eps, int nodes = 32);

/// Gradient of M_eps; components in [0,1] summing to 1.
std::vector<double> reg_max_grad(const std::vector<double>& t, const MollifierWeights& eps,
                                 int nodes = 32);

} // namespace hessianlab
