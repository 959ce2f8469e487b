#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "halfheat/kernels.hpp"
#include "halfheat/quadrature.hpp"

using namespace halfheat;

TEST_CASE("free kernel normalizes to one") {
    for (double t : {0.05, 0.3, 1.7}) {
        auto q = integrate_adaptive([&](double y) { return gauss1(y, t); }, -40.0,
                                    40.0, 1e-12);
        CHECK(q.value == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("half-space kernel conserves mass") {
    for (double xn : {0.0, 0.4, 2.0}) {
        auto q = integrate_adaptive(
            [&](double y) { return gauss1(xn - y, 0.3) + gauss1(xn + y, 0.3); }, 0.0,
            50.0, 1e-12);
        CHECK(q.value == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("reflection bounds: Gamma <= G <= 2 Gamma") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.0, 2.0);
    for (int N = 1; N <= 3; ++N) {
        for (int s = 0; s < 200; ++s) {
            Point x, y;
            x.dim = y.dim = N;
            for (int i = 0; i + 1 < N; ++i) {
                x.c[i] = u(rng);
                y.c[i] = u(rng);
            }
            x.xn() = pos(rng);
            y.xn() = pos(rng);
            const double t = 0.05 + pos(rng);
            Point d;
            d.dim = N;
            for (int i = 0; i < N; ++i) d.c[i] = x.c[i] - y.c[i];
            const double gam = gauss_kernel(d, t);
            const double g = green_neumann(x, y, t);
            CHECK(g >= gam * (1.0 - 1e-14));
            CHECK(g <= 2.0 * gam * (1.0 + 1e-14));
        }
    }
}

TEST_CASE("boundary kernel agrees with the zero-height limit") {
    Point x = Point::make2(0.3, 0.8);
    Point y = Point::make2(-0.5, 0.0);
    const double t = 0.4;
    CHECK(green_boundary(x, &y.c[0], t) ==
          doctest::Approx(green_neumann(x, y, t)).epsilon(1e-14));
}

TEST_CASE("kernel self-test defects are tiny") {
    for (int N = 1; N <= 3; ++N) {
        SelftestReport rep = semigroup_selftest(N, 99, 40);
        CHECK(rep.max_semigroup_defect < 1e-6);
        CHECK(rep.max_mass_defect < 1e-8);
        CHECK(rep.max_bound_violation <= 1e-14);
    }
}

TEST_CASE("semigroup action on an atom is the kernel itself") {
    MeasureSpec mu;
    mu.N = 2;
    mu.kappa = 3.0;
    Atom a;
    a.x = Point::make2(0.5, 1.0);
    a.mass = 0.25;
    mu.atoms.push_back(a);
    Point x = Point::make2(-0.2, 0.4);
    const double t = 0.7;
    CHECK(semigroup_apply(mu, x, t) ==
          doctest::Approx(3.0 * 0.25 * green_neumann(x, a.x, t)).epsilon(1e-13));
}

TEST_CASE("Gaussian-growth data evolves by the closed form") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 1.0;
    DensityComponent d;
    d.kind = DensityKind::GaussianGrowth;
    d.lambda = 0.3;
    mu.densities.push_back(d);
    const double t = 0.5;  // 4*lambda*t = 0.6 < 1
    Point x = Point::make1(0.7);
    const double got = semigroup_apply(mu, x, t);
    const double a = 1.0 - 4.0 * 0.3 * t;
    const double expected = std::pow(a, -0.5) * std::exp(0.3 * 0.49 / a);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));

    // independent quadrature oracle
    auto q = integrate_adaptive(
        [&](double y) {
            const double pre = std::pow(4.0 * M_PI * t, -0.5);
            const double lam = 0.3 * y * y;
            return pre * (std::exp(-(0.7 - y) * (0.7 - y) / (4.0 * t) + lam) +
                          std::exp(-(0.7 + y) * (0.7 + y) / (4.0 * t) + lam));
        },
        0.0, 60.0, 1e-12);
    CHECK(got == doctest::Approx(q.value).epsilon(1e-9));
}

TEST_CASE("Gaussian-growth data diverges past the window") {
    MeasureSpec mu;
    mu.N = 1;
    DensityComponent d;
    d.kind = DensityKind::GaussianGrowth;
    d.lambda = 1.0;
    mu.densities.push_back(d);
    Point x = Point::make1(0.0);
    CHECK_THROWS_AS(semigroup_apply(mu, x, 0.25), DivergenceError);
    CHECK_THROWS_AS(semigroup_apply(mu, x, 0.3), DivergenceError);
    CHECK(semigroup_apply(mu, x, 0.2) > 1.0);
}

TEST_CASE("constant strip closed form matches quadrature") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 2.0;
    DensityComponent d;
    d.kind = DensityKind::ConstantStrip;
    d.height = 0.3;
    d.value = 1.5;
    mu.densities.push_back(d);
    const double t = 0.12;
    Point x = Point::make1(0.4);
    const double got = semigroup_apply(mu, x, t);
    auto q = integrate_adaptive(
        [&](double y) { return gauss1(0.4 - y, t) + gauss1(0.4 + y, t); }, 0.0, 0.3,
        1e-12);
    CHECK(got == doctest::Approx(2.0 * 1.5 * q.value).epsilon(1e-10));
}

TEST_CASE("power-log density: generic quadrature path against an oracle") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 1.0;
    DensityComponent d;
    d.kind = DensityKind::PowerLog;
    d.A = 1.0;
    d.B = 0.0;
    d.r0 = 1.0;
    mu.densities.push_back(d);
    const double t = 0.2;
    Point x = Point::make1(0.5);
    const double got = semigroup_apply(mu, x, t);
    auto q = integrate_adaptive(
        [&](double y) { return (gauss1(0.5 - y, t) + gauss1(0.5 + y, t)) * y; }, 0.0,
        1.0, 1e-12);
    CHECK(got == doctest::Approx(q.value).epsilon(1e-7));
}

TEST_CASE("empty measure evolves to zero") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 0.0;
    CHECK(semigroup_apply(mu, Point::make1(0.5), 0.3) == 0.0);
}
