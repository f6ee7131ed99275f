#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hessianlab/convexify.hpp"

#include <cmath>
#include <random>

using namespace hessianlab;

namespace {

std::mt19937_64 rng(4242);

ConvexOracle paraboloid(std::vector<double> center, double half_width) {
    ConvexOracle u;
    int d = static_cast<int>(center.size());
    u.domain.lo.resize(static_cast<std::size_t>(d));
    u.domain.hi.resize(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        u.domain.lo[static_cast<std::size_t>(a)] = center[static_cast<std::size_t>(a)] - half_width;
        u.domain.hi[static_cast<std::size_t>(a)] = center[static_cast<std::size_t>(a)] + half_width;
    }
    u.eval = [center](const std::vector<double>& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
        return s;
    };
    u.supporting_affine = [center, &u_eval = u.eval](const std::vector<double>& x0) {
        Affine l;
        l.a.resize(x0.size());
        double s = 0.0;
        for (std::size_t i = 0; i < x0.size(); ++i) {
            l.a[i] = 2.0 * (x0[i] - center[i]);
            s += (x0[i] - center[i]) * (x0[i] - center[i]);
        }
        l.c = s;
        for (std::size_t i = 0; i < x0.size(); ++i) l.c -= l.a[i] * x0[i];
        return l;
    };
    return u;
}

} // namespace

TEST_CASE("section of the paraboloid is a disc of radius sqrt(t)") {
    ConvexOracle u = paraboloid({0.0, 0.0}, 1.0);
    SectionInfo s = section(u, {0.0, 0.0}, 0.01);
    CHECK(s.diameter == doctest::Approx(0.2).epsilon(0.1));
    CHECK(s.contains({0.05, 0.05}));
    CHECK(!s.contains({0.2, 0.0}));

    SectionInfo tiny = section(u, {0.0, 0.0}, 0.0001);
    CHECK(tiny.diameter == doctest::Approx(0.02).epsilon(0.1));

    // shifted paraboloid: same radii around the shifted center
    ConvexOracle v = paraboloid({0.3, -0.2}, 1.0);
    SectionInfo sv = section(v, {0.3, -0.2}, 0.01);
    CHECK(sv.diameter == doctest::Approx(0.2).epsilon(0.1));
    CHECK(sv.contains({0.35, -0.2}));
    CHECK(!sv.contains({0.0, 0.0}));

    CHECK_THROWS_AS(section(u, {1.0, 0.0}, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(section(u, {0.0, 0.0}, -0.1), std::invalid_argument);
}

TEST_CASE("sections shrink as t decreases") {
    ConvexOracle u = paraboloid({0.1, 0.2}, 1.0);
    for (std::size_t trial = 0; trial < 5; ++trial) {
        std::uniform_real_distribution<double> d(-0.5, 0.5);
        std::vector<double> x0{d(rng), d(rng)};
        double t = 0.05;
        double big = section(u, x0, t).diameter;
        double small = section(u, x0, t / 10.0).diameter;
        CHECK(small < big);
        CHECK(small > 0.0);
    }
}

TEST_CASE("smooth_convex on the paraboloid: sandwich and convexity") {
    ConvexOracle u = paraboloid({0.0, 0.0}, 1.0);
    auto h = [](const std::vector<double>&) { return 0.1; };
    SmoothedConvex s = smooth_convex(u, h);

    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            std::vector<double> x{-1.0 + (i + 0.5) / 32.0, -1.0 + (j + 0.5) / 32.0};
            double gap = s(x) - u.eval(x);
            CHECK(gap >= 0.0);
            CHECK(gap <= 0.1);
        }
    // discrete Hessian positive definite at interior samples
    for (int i = 1; i < 32; ++i)
        for (int j = 1; j < 32; ++j) {
            std::vector<double> x{-1.0 + i / 16.0, -1.0 + j / 16.0};
            CHECK(discrete_hessian_eigs(s, x)[0] > 0.0);
        }
}

TEST_CASE("smooth_convex handles a kinked strictly convex function") {
    ConvexOracle u;
    u.domain = Box{{-0.5, -0.5}, {0.5, 0.5}};
    u.eval = [](const std::vector<double>& x) {
        double r = std::hypot(x[0], x[1]);
        return r + r * r;
    };
    u.supporting_affine = [](const std::vector<double>& x0) {
        Affine l;
        l.a.assign(2, 0.0);
        double r = std::hypot(x0[0], x0[1]);
        if (r > 0.0) {
            l.a[0] = x0[0] / r + 2.0 * x0[0];
            l.a[1] = x0[1] / r + 2.0 * x0[1];
        }
        l.c = r + r * r - l.a[0] * x0[0] - l.a[1] * x0[1];
        return l;
    };
    auto h = [](const std::vector<double>&) { return 0.05; };
    SmoothedConvex s = smooth_convex(u, h);
    for (int i = 0; i < 48; ++i)
        for (int j = 0; j < 48; ++j) {
            std::vector<double> x{-0.5 + (i + 0.5) / 48.0, -0.5 + (j + 0.5) / 48.0};
            double gap = s(x) - u.eval(x);
            CHECK(gap >= 0.0);
            CHECK(gap <= 0.05);
        }
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            std::vector<double> x{-0.35 + i * 0.1, -0.35 + j * 0.1};
            CHECK(discrete_hessian_eigs(s, x)[0] > 0.0);
        }
}

TEST_CASE("smooth_convex with a huge budget is cheap and still valid") {
    ConvexOracle u;
    u.domain = Box{{-1.0, -1.0}, {1.0, 1.0}};
    u.eval = [](const std::vector<double>& x) {
        return x[0] * x[0] + 0.5 * x[1] * x[1] + 0.2 * x[0] * x[1];
    };
    u.supporting_affine = [](const std::vector<double>& x0) {
        Affine l;
        l.a = {2.0 * x0[0] + 0.2 * x0[1], x0[1] + 0.2 * x0[0]};
        l.c = x0[0] * x0[0] + 0.5 * x0[1] * x0[1] + 0.2 * x0[0] * x0[1] - l.a[0] * x0[0] -
              l.a[1] * x0[1];
        return l;
    };
    auto h = [](const std::vector<double>&) { return 10.0; };
    SmoothedConvex s = smooth_convex(u, h);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            std::vector<double> x{-1.0 + (i + 0.5) / 8.0, -1.0 + (j + 0.5) / 8.0};
            double gap = s(x) - u.eval(x);
            CHECK(gap >= 0.0);
            CHECK(gap <= 10.0);
        }
}

TEST_CASE("smooth_convex rejects a function flat along a line") {
    ConvexOracle u;
    u.domain = Box{{-1.0, -1.0}, {1.0, 1.0}};
    u.eval = [](const std::vector<double>& x) { return x[0] * x[0]; };
    u.supporting_affine = [](const std::vector<double>& x0) {
        Affine l;
        l.a = {2.0 * x0[0], 0.0};
        l.c = -x0[0] * x0[0];
        return l;
    };
    auto h = [](const std::vector<double>&) { return 0.1; };
    try {
        smooth_convex(u, h);
        FAIL("expected construction_error");
    } catch (const construction_error& e) {
        CHECK(e.witness.size() == 2);
    }
}

TEST_CASE("f_tilde_eps values and sandwich") {
    OperatorSpec q = OperatorSpec::quotient(2, 1, 2);
    CHECK(f_tilde_eps(q, 0.0, {2.0, 5.0}) == doctest::Approx(2.0).epsilon(1e-14));
    // 2 + 0.05 (atan 5 + atan 2)
    CHECK(f_tilde_eps(q, 0.1, {2.0, 5.0}) == doctest::Approx(2.12403).epsilon(1e-4));
    CHECK_THROWS_AS(f_tilde_eps(q, 0.1, {-1.0, 0.5}), cone_error);
    CHECK_THROWS_AS(f_tilde_eps(OperatorSpec::sigma_root(2, 2), 0.1, {1.0, 1.0}),
                    std::invalid_argument);

    std::uniform_real_distribution<double> d(0.05, 4.0);
    for (OperatorSpec spec : {q, OperatorSpec::quotient(2, 1, 3), OperatorSpec::quotient(3, 1, 3)}) {
        for (int trial = 0; trial < 300; ++trial) {
            Spectrum lam(static_cast<std::size_t>(spec.n));
            for (double& x : lam) x = d(rng);
            if (!in_cone(ConeId::gamma_inf(spec), lam)) continue;
            double eps = 0.2;
            double ft = f_tilde_eps(spec, eps, lam);
            double fi = eval_f_inf(spec, lam).value;
            CHECK(ft >= fi - 1e-12);
            CHECK(ft <= fi + 0.5 * M_PI * eps + 1e-12);
        }
    }
}

TEST_CASE("g_eps for n = 2: sandwich, symmetry, monotonicity, concavity") {
    OperatorSpec q = OperatorSpec::quotient(2, 1, 2);
    const double eps = 0.2;
    GEps g(q, eps);

    std::uniform_real_distribution<double> d(0.3, 1.7);
    for (int trial = 0; trial < 1000; ++trial) {
        Spectrum lam{d(rng), d(rng)};
        double v = g(lam);
        double fi = std::min(lam[0], lam[1]);
        CHECK(v >= (1.0 - eps) * fi - 1e-9);
        CHECK(v <= fi + 0.5 * M_PI * eps + 1e-9);
        CHECK(g(Spectrum{lam[1], lam[0]}) == v); // exact symmetrization
    }
    for (int trial = 0; trial < 100; ++trial) {
        Spectrum lam{d(rng), d(rng)};
        if (lam[0] > 1.55 || lam[1] > 1.55) continue;
        double base = g(lam);
        for (std::size_t i = 0; i < 2; ++i) {
            Spectrum up = lam;
            up[i] += 0.1;
            CHECK(g(up) >= base - 1e-9);
        }
    }
    for (int trial = 0; trial < 100; ++trial) {
        Spectrum a{d(rng), d(rng)}, b{d(rng), d(rng)};
        Spectrum mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
        CHECK(g(mid) >= 0.5 * (g(a) + g(b)) - 1e-8);
    }
    // growing along rays (the divergence direction, restricted to the box)
    CHECK(g(Spectrum{1.4, 1.4}) > g(Spectrum{0.7, 0.7}));
    CHECK_THROWS_AS(g(Spectrum{3.0, 3.0}), std::domain_error);
}

TEST_CASE("g_eps soft-min surrogate for n >= 3") {
    OperatorSpec q = OperatorSpec::quotient(2, 1, 3);
    const double eps = 0.3;
    GEps g(q, eps);
    std::uniform_real_distribution<double> d(0.1, 3.0);
    int tested = 0;
    for (int trial = 0; trial < 3000 && tested < 1000; ++trial) {
        Spectrum lam{d(rng), d(rng), d(rng)};
        if (!in_cone(ConeId::gamma_inf(q), lam)) continue;
        ++tested;
        double v = g(lam);
        double fi = eval_f_inf(q, lam).value;
        CHECK(v >= (1.0 - eps) * fi - 1e-12);
        CHECK(v <= fi + 0.5 * M_PI * eps + 1e-12);
        Spectrum perm{lam[2], lam[0], lam[1]};
        CHECK(g(perm) == doctest::Approx(v).epsilon(1e-12));
        for (std::size_t i = 0; i < 3; ++i) {
            Spectrum up = lam;
            up[i] += 0.1;
            CHECK(g(up) >= v - 1e-12);
        }
    }
    CHECK(tested == 1000);
    // divergence along rays
    Spectrum base{1.0, 1.5, 2.0};
    CHECK(g(Spectrum{10.0, 15.0, 20.0}) > 5.0 * g(base));
    CHECK(g(Spectrum{100.0, 150.0, 200.0}) > 5.0 * g(Spectrum{10.0, 15.0, 20.0}));
    // concavity along sampled segments
    for (int trial = 0; trial < 200; ++trial) {
        Spectrum a{d(rng), d(rng), d(rng)}, b{d(rng), d(rng), d(rng)};
        if (!in_cone(ConeId::gamma_inf(q), a) || !in_cone(ConeId::gamma_inf(q), b)) continue;
        Spectrum mid(3);
        for (std::size_t i = 0; i < 3; ++i) mid[i] = 0.5 * (a[i] + b[i]);
        CHECK(g(mid) >= 0.5 * (g(a) + g(b)) - 1e-8);
    }
    CHECK_THROWS_AS(g(Spectrum{-1.0, 1.0, 1.0}), cone_error);

    // cached wrapper agrees with a directly built object
    CHECK(g_eps(q, eps, base) == doctest::Approx(g(base)).epsilon(1e-15));
}
