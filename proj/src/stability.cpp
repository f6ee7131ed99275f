#include "hessianlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hessianlab {

double DeGiorgiInput::value(double s) const {
    if (samples.empty()) throw std::invalid_argument("de_giorgi: no samples");
    if (s <= samples.front().first) return samples.front().second;
    if (s >= samples.back().first) return samples.back().second;
    auto it = std::upper_bound(samples.begin(), samples.end(), s,
                               [](double v, const auto& pr) { return v < pr.first; });
    auto lo = std::prev(it);
    double t = (s - lo->first) / (it->first - lo->first);
    return lo->second + t * (it->second - lo->second);
}

double de_giorgi_bound(const DeGiorgiInput& input) {
    if (!(input.mu > 0.0)) throw std::invalid_argument("de_giorgi_bound: mu must be positive");
    if (!(input.B0 > 0.0)) throw std::invalid_argument("de_giorgi_bound: B0 must be positive");
    double u0 = input.value(input.s0);
    return input.s0 + 2.0 * input.B0 * std::pow(u0, input.mu) / (1.0 - std::pow(2.0, -input.mu));
}

DeGiorgiReport de_giorgi_verify(const DeGiorgiInput& input) {
    DeGiorgiReport rep;
    const auto& s = input.samples;
    if (s.empty()) return rep;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i].first < s[i - 1].first || s[i].second > s[i - 1].second + 1e-12 ||
            s[i].second < 0.0)
            return rep; // not a sorted non-increasing nonnegative sample set
    }
    rep.hypothesis_holds = true;
    for (std::size_t i = 0; i < s.size() && rep.hypothesis_holds; ++i) {
        if (s[i].first < input.s0) continue;
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            double t = s[j].first - s[i].first;
            if (t <= 0.0) continue;
            if (t * s[j].second > input.B0 * std::pow(s[i].second, 1.0 + input.mu) + 1e-12) {
                rep.hypothesis_holds = false;
                break;
            }
        }
    }
    for (const auto& pr : s)
        if (pr.second == 0.0) {
            rep.extinction_observed = pr.first;
            break;
        }
    return rep;
}

std::vector<StabilityRecord> stability_experiment(const OperatorSpec& spec,
                                                  const HermitianField& chi,
                                                  const ScalarField& G_base,
                                                  const ScalarField& shape,
                                                  const std::vector<double>& amplitudes,
                                                  double nu) {
    if (G_base.grid != chi.grid || shape.grid != chi.grid)
        throw std::invalid_argument("stability_experiment: field grids differ");
    if (nu <= 0.0) nu = spec.n == 1 ? 0.4 : 0.3;
    if (!(nu < 1.0 / spec.n))
        throw std::invalid_argument("stability_experiment: nu outside (0, 1/n)");

    ProblemSpec base;
    base.op = spec;
    base.chi = chi;
    base.G = G_base;
    SolveResult r1 = solve_periodic(base);

    std::vector<StabilityRecord> records;
    for (double a : amplitudes) {
        ProblemSpec pert = base;
        for (std::size_t p = 0; p < pert.G.v.size(); ++p) pert.G[p] += a * shape[p];
        SolveResult r2;
        try {
            r2 = solve_periodic(pert, &r1.phi);
        } catch (const solver_error& e) {
            throw solver_error("stability_experiment at amplitude " + std::to_string(a) + ": " +
                               e.what());
        }
        StabilityRecord rec;
        rec.nu = nu;
        rec.amplitude = a;
        ScalarField dphi = r1.phi - r2.phi;
        ScalarField dg(G_base.grid);
        for (std::size_t p = 0; p < dg.v.size(); ++p)
            dg[p] = std::exp(base.G[p]) - std::exp(pert.G[p]);
        rec.lhs = norm_linf(dphi);
        rec.rhs1 = norm_linf(dg);
        rec.rhs2 = std::pow(norm_l1(dphi), nu / (1.0 + nu));
        rec.C = rec.rhs1 + rec.rhs2 > 0.0 ? rec.lhs / (rec.rhs1 + rec.rhs2) : 0.0;
        records.push_back(rec);
    }
    return records;
}

UniquenessReport uniqueness_experiment(const ProblemSpec& problem,
                                       const std::vector<ScalarField>& seeds) {
    UniquenessReport rep;
    std::vector<SolveResult> results;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        try {
            results.push_back(solve_periodic(problem, &seeds[i]));
        } catch (const solver_error&) {
            rep.failed_seeds.push_back(i);
        }
    }
    for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j) {
            rep.max_phi_dist = std::max(rep.max_phi_dist,
                                        norm_linf(results[i].phi - results[j].phi));
            rep.max_c_dist = std::max(rep.max_c_dist, std::fabs(results[i].c - results[j].c));
        }
    return rep;
}

} // namespace hessianlab
