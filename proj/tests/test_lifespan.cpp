#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "halfheat/lifespan.hpp"

using namespace halfheat;

namespace {

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

std::vector<SweepRow> synthetic_rows(const std::vector<double>& kappas,
                                     double (*law)(double)) {
    std::vector<SweepRow> rows;
    for (double k : kappas) {
        SweepRow r;
        r.kappa = k;
        r.T_est = law(k);
        r.T_err = 1e-9 * r.T_est;
        r.status = "blow_up";
        r.usable = true;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_CASE("empty measure never blows up") {
    MeasureSpec mu;
    mu.N = 1;
    mu.kappa = 0.0;
    SolverControls c;
    LifespanResult r = lifespan(mu, 1.5, c, 100.0);
    CHECK(r.infinite);
}

TEST_CASE("interior-delta synthetic law is recovered exactly") {
    auto rows = synthetic_rows({1e2, 1e3, 1e4, 1e5, 1e6},
                               [](double k) { return 0.25 / std::log(k); });
    FitResult f = fit_interior_delta_law(rows, 1.0);
    CHECK(f.ok);
    CHECK(f.value == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(f.residual < 1e-12);
}

TEST_CASE("power-law synthetic table recovers its slope") {
    auto rows = synthetic_rows({1e1, 1e2, 1e3, 1e4},
                               [](double k) { return 3.0 * std::pow(k, -1.5); });
    FitResult f = fit_power_law(rows);
    CHECK(f.ok);
    CHECK(f.value == doctest::Approx(-1.5).epsilon(1e-3));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-3));
}

TEST_CASE("gaussian-limit synthetic table recovers the ceiling") {
    auto rows = synthetic_rows({1e-4, 1e-3, 1e-2, 1e-1},
                               [](double k) { return 0.25 * (1.0 - k); });
    FitResult f = fit_gaussian_limit(rows, 1.0);
    CHECK(f.ok);
    CHECK(f.value == doctest::Approx(0.25).epsilon(1e-3));
    CHECK_FALSE(f.ceiling_violated);
    // a row above 1/(4 lambda) trips the ceiling check
    rows[0].T_est = 0.26;
    CHECK(fit_gaussian_limit(rows, 1.0).ceiling_violated);
}

TEST_CASE("noisy rows are excluded from fits") {
    auto rows = synthetic_rows({1e1, 1e2, 1e3, 1e4, 1e5},
                               [](double k) { return std::pow(k, -1.0); });
    rows[2].T_err = rows[2].T_est;  // relative error 1 > 0.2
    FitResult f = fit_power_law(rows);
    CHECK(f.rows_used == 4);
    CHECK(f.value == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("empty plan produces an empty table") {
    SweepPlan plan;
    plan.base_measure = boundary_atom(1.0);
    plan.p = 1.5;
    plan.N = 1;
    CHECK(sweep(plan).empty());
}

TEST_CASE("sweep rows are deterministic and independent of the worker budget") {
    SweepPlan plan;
    plan.base_measure = boundary_atom(1.0);
    plan.p = 1.5;
    plan.N = 1;
    plan.kappa_values = {0.5, 1.0, 2.0};
    plan.controls.dt0 = 1e-3;
    auto a = sweep(plan, 1);
    auto b = sweep(plan, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].T_est == b[i].T_est);
        CHECK(a[i].T_err == b[i].T_err);
        CHECK(a[i].status == b[i].status);
    }
    // life span is nonincreasing in kappa
    for (std::size_t i = 0; i + 1 < a.size(); ++i) CHECK(a[i + 1].T_est < a[i].T_est);
}

TEST_CASE("sweep plan JSON round-trips and validates") {
    SweepPlan plan;
    plan.base_measure = boundary_atom(1.0);
    plan.p = 1.5;
    plan.N = 1;
    plan.kappa_values = {1.0, 2.0};
    SweepPlan back = SweepPlan::from_json(plan.to_json());
    CHECK(back.p == plan.p);
    CHECK(back.kappa_values == plan.kappa_values);
    plan.kappa_values = {2.0, 1.0};  // not increasing
    CHECK_THROWS_AS(plan.validate(), ConfigError);
}

TEST_CASE("boundary-atom dichotomy matches the critical exponent") {
    SolverControls c;
    c.dt0 = 1e-4;
    c.dt_min = 1e-12;
    auto rows = dichotomy_boundary_delta({1.5, 2.5}, 1, c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].verdict == DichotomyVerdict::Solvable);
    CHECK(rows[1].verdict == DichotomyVerdict::InstantBlowUp);
}

TEST_CASE("csv and svg exports contain the expected frame") {
    auto rows = synthetic_rows({1e1, 1e2}, [](double k) { return 1.0 / k; });
    const std::string csv = sweep_to_csv(rows);
    CHECK(csv.rfind("kappa,T_est,T_err,status", 0) == 0);
    CHECK(csv.find("blow_up") != std::string::npos);
    const std::string svg = sweep_to_svg(rows);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("refinement leaves blow-up estimates consistent") {
    // halving the step budget moves T_est by less than the reported error
    MeasureSpec mu = boundary_atom(1.0);
    SolverControls c;
    c.dt0 = 1e-4;
    c.dt_min = 1e-12;
    LifespanResult coarse = lifespan(mu, 1.5, c, 10.0);
    SolverControls cf = c;
    cf.dt0 = 5e-5;
    cf.dt_min = 5e-13;
    LifespanResult fine = lifespan(mu, 1.5, cf, 10.0);
    CHECK(std::abs(fine.T_est - coarse.T_est) <=
          std::max(coarse.T_err, fine.T_err) + 1e-12);
}
