#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "halfheat/lifespan.hpp"
#include "halfheat/volterra.hpp"

using namespace halfheat;

namespace {

// independent series oracle for erf on [0, 3]
double erf_series(double x) {
    double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        const double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 / std::sqrt(M_PI) * sum;
}

MeasureSpec strip_measure(double kappa, double h, double c, int N = 1) {
    MeasureSpec mu;
    mu.N = N;
    mu.kappa = kappa;
    DensityComponent d;
    d.kind = DensityKind::ConstantStrip;
    d.height = h;
    d.value = c;
    mu.densities.push_back(d);
    return mu;
}

MeasureSpec boundary_atom(double kappa) {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = kappa;
    Atom a;
    a.x = Point::make1(0.0);
    a.mass = 1.0;
    mu.atoms.push_back(a);
    return mu;
}

double linear_abel_error(double dt) {
    std::vector<double> times;
    auto w = solve_linear_abel([](double) { return 1.0; }, 1.0, dt, &times);
    const double exact = std::exp(1.0) * (1.0 + erf_series(1.0));  // e*erfc(-1)
    return std::abs(w.back() - exact);
}

}  // namespace

TEST_CASE("linear Abel problem matches e^t erfc(-sqrt(t))") {
    CHECK(linear_abel_error(1e-3) < 1e-4);
}

TEST_CASE("linear Abel discretization converges with order >= 1") {
    const double e1 = linear_abel_error(4e-3);
    const double e2 = linear_abel_error(2e-3);
    const double e3 = linear_abel_error(1e-3);
    const double order1 = std::log2(e1 / e2);
    const double order2 = std::log2(e2 / e3);
    CHECK(order1 >= 1.0);
    CHECK(order2 >= 1.0);
}

TEST_CASE("zero data stays zero to the horizon") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 0.0;
    SolverControls c;
    c.horizon = 0.5;
    SolveOutcome out = solve_scalar(mu, 1.5, c);
    CHECK(out.status == SolveStatus::ReachedHorizon);
    for (double w : out.trace.sup_values) CHECK(w == 0.0);
}

TEST_CASE("subcritical boundary atom blows up in finite time") {
    SolverControls c;
    c.horizon = 1.0;
    SolveOutcome out = solve_scalar(boundary_atom(1.0), 1.5, c);
    CHECK(out.status == SolveStatus::BlowUp);
    CHECK(out.T_est > 0.01);
    CHECK(out.T_est < 0.5);
    // trace is increasing near the end
    const auto& s = out.trace.sup_values;
    REQUIRE(s.size() > 10);
    CHECK(s[s.size() - 1] > s[s.size() - 5]);
}

TEST_CASE("supercritical boundary atom yields instant blow-up evidence") {
    SolverControls c;
    c.horizon = 1.0;
    SolveOutcome out = solve_scalar(boundary_atom(1.0), 2.5, c);
    CHECK(out.status == SolveStatus::InstantBlowUpEvidence);
    CHECK(out.T_est < 1e-5);
}

TEST_CASE("blow-up estimator recovers a synthetic profile exactly") {
    const double p = 1.5, T = 0.7;
    BoundaryTrace tr;
    for (int i = 1; i <= 60; ++i) {
        const double t = T * (1.0 - std::pow(2.0, -i / 4.0));
        tr.times.push_back(t);
        tr.sup_values.push_back(std::pow(T - t, -1.0 / (2.0 * (p - 1.0))));
        tr.values.push_back({tr.sup_values.back()});
    }
    BlowupEstimate est = estimate_blowup_time(tr, p);
    CHECK(est.blown_up);
    CHECK(est.model_fit_ok);
    CHECK(est.T_est == doctest::Approx(T).epsilon(1e-2));
}

TEST_CASE("flat traces are not classified as blow-up") {
    BoundaryTrace tr;
    for (int i = 1; i <= 50; ++i) {
        tr.times.push_back(0.01 * i);
        tr.sup_values.push_back(1.0 + 0.001 * i);
        tr.values.push_back({tr.sup_values.back()});
    }
    CHECK_FALSE(estimate_blowup_time(tr, 1.5).blown_up);
}

TEST_CASE("parabolic rescaling maps life spans by 1/theta") {
    struct Case {
        double p, theta;
    } cases[] = {{1.3, 2.0}, {1.5, 0.5}, {1.5, 4.0}, {1.7, 2.5}, {1.6, 0.8}};
    for (const auto& cs : cases) {
        CAPTURE(cs.p);
        CAPTURE(cs.theta);
        SolverControls c;
        c.horizon = 4.0;
        c.dt0 = 1e-4;
        c.dt_min = 1e-12;
        SolveOutcome base = solve_scalar(boundary_atom(1.0), cs.p, c);
        REQUIRE(base.status == SolveStatus::BlowUp);
        const double expo = 1.0 / (2.0 * (cs.p - 1.0)) - 0.5;
        const double kappa_theta = std::pow(cs.theta, expo);
        // rescale the discretization with the problem so the comparison sees
        // only scale-breaking defects, not the (fixed-mesh) truncation error
        SolverControls c2 = c;
        c2.horizon = c.horizon / cs.theta;
        c2.dt0 = c.dt0 / cs.theta;
        c2.dt_min = c.dt_min / cs.theta;
        c2.w_max = c.w_max * std::pow(cs.theta, 1.0 / (2.0 * (cs.p - 1.0)));
        SolveOutcome scaled = solve_scalar(boundary_atom(kappa_theta), cs.p, c2);
        REQUIRE(scaled.status == SolveStatus::BlowUp);
        CHECK(scaled.T_est * cs.theta ==
              doctest::Approx(base.T_est).epsilon(0.02));
    }
}

TEST_CASE("laterally uniform 2-D data reproduces the scalar trace") {
    MeasureSpec mu1 = strip_measure(1.0, 0.1, 1.0, 1);
    MeasureSpec mu2 = strip_measure(1.0, 0.1, 1.0, 2);
    SolverControls c;
    c.horizon = 0.5;
    SolveOutcome s1 = solve_scalar(mu1, 1.5, c);
    SolverControls cg = c;
    cg.grid_nodes = 64;
    cg.box_halfwidth = 11.0;
    SolveOutcome s2 = solve_grid(mu2, 1.5, cg);
    REQUIRE(s1.trace.size() == s2.trace.size());
    for (std::size_t i = 0; i < s1.trace.size(); ++i) {
        CHECK(s2.trace.times[i] == doctest::Approx(s1.trace.times[i]).epsilon(1e-14));
        CHECK(s2.trace.sup_values[i] ==
              doctest::Approx(s1.trace.sup_values[i]).epsilon(1e-9));
    }
}

TEST_CASE("grid solver rejects an undersized lateral box") {
    MeasureSpec mu = strip_measure(1.0, 0.1, 1.0, 2);
    SolverControls c;
    c.horizon = 1.0;
    c.grid_nodes = 32;
    c.box_halfwidth = 2.0;
    CHECK_THROWS_AS(solve_grid(mu, 1.5, c), ConfigError);
}

TEST_CASE("capped Picard iterates are monotone and match marching") {
    MeasureSpec mu = strip_measure(0.5, 0.1, 1.0);
    SolverControls c;
    c.horizon = 1.0;
    auto levels = picard_minimal(mu, 1.5, 1.0, 64, 200, c);
    REQUIRE(!levels.empty());
    // monotone in k within each cap level
    for (const auto& lvl : levels) {
        for (std::size_t k = 1; k + 1 < lvl.iterates.size(); ++k) {
            const auto& a = lvl.iterates[k].sup_values;
            const auto& b = lvl.iterates[k + 1].sup_values;
            for (std::size_t i = 0; i < a.size(); ++i)
                CHECK(b[i] >= a[i] - 1e-12);
        }
    }
    // monotone in the cap level n
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        const auto& a = levels[l].iterates.back().sup_values;
        const auto& b = levels[l + 1].iterates.back().sup_values;
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] >= a[i] - 1e-12);
    }
    // stabilized iterate agrees with the adaptive marching solution
    SolveOutcome march = solve_scalar(mu, 1.5, c);
    REQUIRE(march.status == SolveStatus::ReachedHorizon);
    const auto& fix = levels.back().iterates.back();
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < fix.times.size(); ++i) {
        const double t = fix.times[i];
        if (t < 0.05) continue;  // skip the startup layer
        // interpolate the marching trace at t
        const auto& ts = march.trace.times;
        auto it = std::lower_bound(ts.begin(), ts.end(), t);
        if (it == ts.begin() || it == ts.end()) continue;
        const std::size_t j = std::size_t(it - ts.begin());
        const double a = march.trace.sup_values[j - 1];
        const double b = march.trace.sup_values[j];
        const double frac = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
        const double wm = a + frac * (b - a);
        worst = std::max(worst, std::abs(wm - fix.sup_values[i]));
        scale = std::max(scale, std::abs(wm));
    }
    REQUIRE(scale > 0.0);
    CHECK(worst / scale < 0.01);
}

TEST_CASE("interior reconstruction dominates the linear part and meets the trace") {
    MeasureSpec mu = strip_measure(1.0, 0.1, 1.0);
    SolverControls c;
    c.horizon = 0.5;
    SolveOutcome out = solve_scalar(mu, 1.5, c);
    REQUIRE(out.status == SolveStatus::ReachedHorizon);
    const double t = 0.3;
    // u >= S(t)mu in the interior
    for (double xn : {0.0, 0.2, 1.0}) {
        const Point x = Point::make1(xn);
        const double u = interior_eval(out, mu, x, t, 1.5);
        CHECK(u >= semigroup_apply(mu, x, t) * (1.0 - 1e-10));
    }
    // at the boundary the reconstruction reproduces the trace value
    const auto& ts = out.trace.times;
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    const std::size_t j = std::size_t(it - ts.begin());
    const double u0 = interior_eval(out, mu, Point::make1(0.0), ts[j], 1.5);
    CHECK(u0 == doctest::Approx(out.trace.sup_values[j]).epsilon(5e-3));
}

TEST_CASE("forcing divergence caps the Gaussian-growth life span") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 1e-3;
    DensityComponent d;
    d.kind = DensityKind::GaussianGrowth;
    d.lambda = 1.0;
    mu.densities.push_back(d);
    SolverControls c;
    c.horizon = 1.0;
    c.dt0 = 1e-4;
    SolveOutcome out = solve_scalar(mu, 2.0, c);
    CHECK(out.status == SolveStatus::BlowUp);
    CHECK(out.T_est <= 0.25 * 1.001);
    CHECK(out.T_est >= 0.2);
}
