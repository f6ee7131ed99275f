#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hessianlab/viscosity.hpp"

#include <cmath>
#include <random>

using namespace hessianlab;

namespace {

constexpr double TWO_PI = 2.0 * M_PI;

std::mt19937_64 rng(4242);

ScalarField random_field(const TorusGrid& g, double amp) {
    std::uniform_real_distribution<double> d(-amp, amp);
    ScalarField f(g);
    for (double& v : f.v) v = d(rng);
    return f;
}

/// Unrestricted reference: max over every grid offset with the minimal-image
/// squared displacement.
ScalarField brute_sup(const ScalarField& phi, double eps) {
    const TorusGrid& g = phi.grid;
    ScalarField out(g);
    for (std::size_t p = 0; p < g.points(); ++p) {
        double best = -1e300;
        for (std::size_t q = 0; q < g.points(); ++q) {
            auto cp = g.coords(p), cq = g.coords(q);
            double len2 = 0.0;
            for (int a = 0; a < g.axes(); ++a) {
                double d = std::fabs(cp[a] - cq[a]);
                d = std::min(d, 1.0 - d);
                len2 += d * d;
            }
            best = std::max(best, phi[q] + eps - len2 / eps);
        }
        out[p] = best;
    }
    return out;
}

} // namespace

TEST_CASE("sup/inf convolution of a constant field") {
    for (int n : {1, 2}) {
        TorusGrid g(n, 8);
        ScalarField c(g, 1.25);
        ConvolutionReport up = sup_convolution(c, 0.3);
        ConvolutionReport dn = inf_convolution(c, 0.3);
        for (std::size_t p = 0; p < g.points(); ++p) {
            CHECK(up.field[p] == doctest::Approx(1.55).epsilon(1e-15));
            CHECK(dn.field[p] == doctest::Approx(0.95).epsilon(1e-15));
        }
        CHECK(up.semiconvexity >= -1e-10);
        CHECK(dn.semiconvexity >= -1e-10);
    }
    CHECK_THROWS_AS(sup_convolution(ScalarField(TorusGrid(1, 8)), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(inf_convolution(ScalarField(TorusGrid(1, 8)), -1.0), std::invalid_argument);
}

TEST_CASE("sup convolution dominates phi + eps and is monotone in eps") {
    for (int n : {1, 2}) {
        TorusGrid g(n, n == 1 ? 32 : 8);
        for (int trial = 0; trial < 3; ++trial) {
            ScalarField phi = random_field(g, 0.5);
            ConvolutionReport r1 = sup_convolution(phi, 0.05);
            ConvolutionReport r2 = sup_convolution(phi, 0.2);
            for (std::size_t p = 0; p < g.points(); ++p) {
                CHECK(r1.field[p] >= phi[p] + 0.05);
                CHECK(r2.field[p] >= r1.field[p]);
            }
        }
    }
}

TEST_CASE("restricted search radius matches the brute-force reference") {
    TorusGrid g(1, 128);
    ScalarField phi(g);
    for (std::size_t p = 0; p < g.points(); ++p) phi[p] = std::sin(TWO_PI * g.coords(p)[0]);
    ConvolutionReport rep = sup_convolution(phi, 0.05);
    ScalarField want = brute_sup(phi, 0.05);
    for (std::size_t p = 0; p < g.points(); ++p) CHECK(rep.field[p] == want[p]);

    TorusGrid g2(1, 64);
    ScalarField psi = random_field(g2, 0.3);
    ConvolutionReport rep2 = sup_convolution(psi, 0.08);
    ScalarField want2 = brute_sup(psi, 0.08);
    for (std::size_t p = 0; p < g2.points(); ++p) CHECK(rep2.field[p] == want2[p]);
}

TEST_CASE("duality (-phi)^eps = -(phi_eps) holds exactly") {
    for (int n : {1, 2}) {
        TorusGrid g(n, n == 1 ? 64 : 10);
        for (int trial = 0; trial < 3; ++trial) {
            ScalarField phi = random_field(g, 1.0);
            ScalarField neg = -1.0 * phi;
            ConvolutionReport a = sup_convolution(neg, 0.07);
            ConvolutionReport b = inf_convolution(phi, 0.07);
            for (std::size_t p = 0; p < g.points(); ++p) CHECK(a.field[p] == -b.field[p]);
        }
    }
}

TEST_CASE("semiconvexity certificate on rough random fields") {
    for (int n : {1, 2}) {
        TorusGrid g(n, n == 1 ? 128 : 12);
        for (double eps : {0.02, 0.1, 0.5}) {
            ScalarField phi = random_field(g, 1.0);
            CHECK(sup_convolution(phi, eps).semiconvexity >= -1e-10);
            CHECK(inf_convolution(phi, eps).semiconvexity >= -1e-10);
        }
    }
}

TEST_CASE("subsolution margins for the flat model") {
    TorusGrid g(2, 8);
    OperatorSpec q = OperatorSpec::quotient(2, 1, 2);
    HermitianField chi = HermitianField::scaled_identity(g, 1.0);
    ScalarField u(g, 0.0);

    // f_inf(1,1) = min(1,1) = 1
    SubsolutionReport r = check_subsolution(q, ConeMode::f_inf_on_gamma_inf, chi, u,
                                            ScalarField(g, 0.5));
    CHECK(r.violations.empty());
    CHECK(r.worst_margin == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.delta0 == doctest::Approx(0.5).epsilon(1e-12));

    SubsolutionReport bad = check_subsolution(q, ConeMode::f_inf_on_gamma_inf, chi, u,
                                              ScalarField(g, 2.0));
    CHECK(bad.worst_margin == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(bad.delta0 == 0.0);

    // sigma_k-root mode on Gamma_k: f(1,1) = sigma_2(1,1)^(1/2) = 1
    SubsolutionReport rf = check_subsolution(OperatorSpec::sigma_root(2, 2),
                                             ConeMode::f_on_gamma, chi, u, ScalarField(g, 0.25));
    CHECK(rf.violations.empty());
    CHECK(rf.worst_margin == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("cone violations are reported pointwise") {
    TorusGrid g(2, 8);
    OperatorSpec q = OperatorSpec::quotient(2, 1, 2);
    HermitianField chi = HermitianField::scaled_identity(g, 1.0);
    // push the first eigenvalue negative on half the grid
    for (std::size_t p = 0; p < g.points(); ++p)
        if (p % 2 == 0) chi.set(p, 0, 0, -2.0);
    ScalarField u(g, 0.0);
    SubsolutionReport r = check_subsolution(q, ConeMode::f_inf_on_gamma_inf, chi, u,
                                            ScalarField(g, 0.5));
    CHECK(r.violations.size() == g.points() / 2);
    CHECK(r.delta0 == 0.0);
    for (std::size_t v : r.violations) CHECK(v % 2 == 0);
}

TEST_CASE("supersolution disjunction") {
    TorusGrid g(2, 8);
    OperatorSpec q = OperatorSpec::quotient(2, 1, 2);
    HermitianField chi = HermitianField::scaled_identity(g, 1.0);
    ScalarField u(g, 0.0);
    // f(lambda[chi]) = sigma_2/sigma_1 (1,1) = 1/2
    SubsolutionReport ok = check_supersolution(q, chi, u, ScalarField(g, 2.0));
    CHECK(ok.violations.empty());
    CHECK(ok.worst_margin == doctest::Approx(1.5).epsilon(1e-12));

    SubsolutionReport bad = check_supersolution(q, chi, u, ScalarField(g, 0.25));
    CHECK(bad.violations.size() == g.points());
    CHECK(bad.delta0 == 0.0);
}

TEST_CASE("checker tracks a smooth non-constant field") {
    TorusGrid g(1, 64);
    OperatorSpec s1 = OperatorSpec::sigma_root(1, 1);
    HermitianField chi = HermitianField::scaled_identity(g, 1.0);
    ScalarField u(g);
    for (std::size_t p = 0; p < g.points(); ++p) u[p] = 0.01 * std::cos(TWO_PI * g.coords(p)[0]);
    // lambda = 1 + (1/4)(u_xx + u_yy); worst at x = 0 where u_xx = -0.01(2pi)^2
    double expect = 1.0 - 0.0025 * TWO_PI * TWO_PI;
    for (auto method : {DiffMethod::spectral, DiffMethod::fd2}) {
        SubsolutionReport r =
            check_subsolution(s1, ConeMode::f_on_gamma, chi, u, ScalarField(g, 0.0), method);
        CHECK(r.violations.empty());
        CHECK(r.worst_margin == doctest::Approx(expect).epsilon(1e-3));
    }
}
