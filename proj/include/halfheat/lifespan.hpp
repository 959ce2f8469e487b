#pragma once

#include <string>
#include <vector>

#include "halfheat/measure.hpp"
#include "halfheat/volterra.hpp"

namespace halfheat {

struct SweepPlan {
    MeasureSpec base_measure;
    double p = 1.5;
    int N = 1;
    std::vector<double> kappa_values;  // positive, increasing
    SolverControls controls;
    double horizon_cap = 1e4;  // geometric-doubling ceiling

    void validate() const;
    std::string to_json() const;
    static SweepPlan from_json(const std::string& text);
    static SweepPlan load(const std::string& path);
};

struct LifespanResult {
    double T_est = 0.0;
    double T_err = 0.0;
    bool infinite = false;   // no blow-up up to the horizon cap
    bool instant = false;    // estimates collapse to 0 under refinement
    std::vector<double> refinement_trend;  // T_est per refinement level
    std::string error;       // nonempty when the solve failed

    std::string to_json() const;
};

// Runs the boundary solver with geometric horizon doubling; on blow-up before
// the first horizon, refines the mesh to separate finite life span from
// instant blow-up.
LifespanResult lifespan(const MeasureSpec& mu, double p,
                        const SolverControls& controls, double horizon_cap = 1e4);

struct SweepRow {
    double kappa = 0.0;
    double T_est = 0.0;
    double T_err = 0.0;
    std::string status;  // blow_up | horizon | instant | error:<what>
    bool usable = false;
};

std::vector<SweepRow> sweep(const SweepPlan& plan, int workers = 1);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

struct FitResult {
    std::string kind;      // power_law | log_product | constant_limit
    double value = 0.0;    // slope or limit
    double intercept = 0.0;
    double residual = 0.0; // rms residual in the fitted coordinates
    int rows_used = 0;
    bool ok = false;
    bool ceiling_violated = false;  // gaussian fit only

    std::string to_json() const;
};

// Extrapolated limit of (log kappa) * T via a linear fit in 1/log kappa;
// value holds the limit (compare to L^2/4).
FitResult fit_interior_delta_law(const std::vector<SweepRow>& rows, double L);

// Least-squares slope of log T vs log kappa. log_correction c divides T by
// (log kappa)^c first (used for power-log profiles where c = B*2(p-1)/(A(p-1)+1)).
FitResult fit_power_law(const std::vector<SweepRow>& rows, double log_correction = 0.0);

// Limit of T as kappa -> 0 by a linear fit T = limit + b*kappa over the
// smallest half of the rows; also checks the ceiling T <= 1/(4 lambda).
FitResult fit_gaussian_limit(const std::vector<SweepRow>& rows, double lambda);

enum class DichotomyVerdict { Solvable, InstantBlowUp, Indeterminate };

struct DichotomyRow {
    double p = 0.0;
    DichotomyVerdict verdict = DichotomyVerdict::Indeterminate;
    std::vector<double> refinement_trend;
};

// Boundary-atom life span per p; solvable iff the estimate stabilizes under
// mesh refinement (expected: p < 1 + 1/N).
std::vector<DichotomyRow> dichotomy_boundary_delta(const std::vector<double>& p_values,
                                                   int N, const SolverControls& controls);

// single-series line plot, log-log axes
std::string sweep_to_svg(const std::vector<SweepRow>& rows);

}  // namespace halfheat
