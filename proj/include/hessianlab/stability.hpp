#pragma once

#include "hessianlab/solver.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hessianlab {

/// Non-increasing u >= 0 sampled at sorted abscissae, with the constants of
/// the extinction hypothesis t*u(s+t) <= B0*u(s)^{1+mu} for s >= s0.
struct DeGiorgiInput {
    std::vector<std::pair<double, double>> samples; // (s, u(s)), s ascending
    double B0 = 1.0;
    double mu = 1.0;
    double s0 = 0.0;

    double value(double s) const; // linear interpolation, clamped at the ends
};

/// s0 + 2*B0*u(s0)^mu / (1 - 2^{-mu}): past this point u vanishes whenever
/// the hypothesis holds.
double de_giorgi_bound(const DeGiorgiInput& input);

struct DeGiorgiReport {
    bool hypothesis_holds = false;
    std::optional<double> extinction_observed; // first sample abscissa with u = 0
};

DeGiorgiReport de_giorgi_verify(const DeGiorgiInput& input);

struct StabilityRecord {
    double nu = 0.0;
    double amplitude = 0.0;
    double lhs = 0.0;   // |phi1 - phi2|_Linf, mean-zero gauge
    double rhs1 = 0.0;  // |e^G1 - e^G2|_Linf
    double rhs2 = 0.0;  // |phi1 - phi2|_L1 ^ (nu/(1+nu))
    double C = 0.0;     // lhs / (rhs1 + rhs2), 0 at amplitude 0
};

/// Solves the base problem and one perturbed problem per amplitude
/// (G = G_base + a * shape) and assembles the stability comparison records.
/// nu <= 0 selects the default 0.4 (n = 1) / 0.3 (n = 2); valid range (0, 1/n).
std::vector<StabilityRecord> stability_experiment(const OperatorSpec& spec,
                                                  const HermitianField& chi,
                                                  const ScalarField& G_base,
                                                  const ScalarField& shape,
                                                  const std::vector<double>& amplitudes,
                                                  double nu = 0.0);

struct UniquenessReport {
    double max_phi_dist = 0.0; // worst pairwise Linf distance, mean-zero gauge
    double max_c_dist = 0.0;
    std::vector<std::size_t> failed_seeds; // non-convergent, excluded from stats
};

UniquenessReport uniqueness_experiment(const ProblemSpec& problem,
                                       const std::vector<ScalarField>& seeds);

} // namespace hessianlab
