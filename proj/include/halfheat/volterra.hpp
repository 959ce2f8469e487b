#pragma once

#include <string>
#include <vector>

#include "halfheat/kernels.hpp"
#include "halfheat/measure.hpp"

namespace halfheat {

struct SolverControls {
    double dt0 = 1e-3;          // initial step
    double dt_min = 1e-9;       // smallest step
    double w_max = 1e8;         // blow-up threshold
    double horizon = 1.0;       // max time
    double tol_newton = 1e-12;  // nonlinear-solve tolerance
    double refine_factor = 0.5; // step-shrink factor near growth
    double growth_cap = 0.10;   // max relative growth per accepted step
    double grow_factor = 1.25;  // step growth when smooth
    int startup_nodes = 8;      // graded nodes inside the first dt0
    double quad_rel_tol = 1e-9;
    // lateral grid (N >= 2)
    double box_halfwidth = 0.0;
    int grid_nodes = 0;
    std::size_t max_steps = 2'000'000;

    void validate() const;
};

struct BoundaryTrace {
    std::vector<double> times;              // strictly increasing
    std::vector<double> sup_values;         // per-time sup norm
    // N=1: values[i] has one entry; N>=2: grid values, row-major
    std::vector<std::vector<double>> values;

    std::size_t size() const { return times.size(); }
    std::string to_csv() const;
};

enum class SolveStatus { ReachedHorizon, BlowUp, InstantBlowUpEvidence };

struct SolveOutcome {
    SolveStatus status = SolveStatus::ReachedHorizon;
    double T_est = 0.0;
    double T_err = 0.0;
    BoundaryTrace trace;
    // diagnostics
    std::size_t steps = 0;
    std::size_t rejected_steps = 0;
    bool forcing_diverged = false;  // stepping hit a forcing-divergence time
    std::string stop_reason;
    SolverControls controls;

    std::string to_json() const;
};

// [S(t)mu] at the boundary point (xprime, 0)
double boundary_forcing(const MeasureSpec& mu, double t, const double* xprime = nullptr);

// N=1 boundary equation w(t) = g(t) + pi^{-1/2} ∫_0^t (t-s)^{-1/2} w(s)^p ds
// by product integration with exact Abel moments.
SolveOutcome solve_scalar(const MeasureSpec& mu, double p, const SolverControls& controls);

// N in {2,3}: same time discretization, lateral convolution applied spectrally
// on the periodized grid.
SolveOutcome solve_grid(const MeasureSpec& mu, double p, const SolverControls& controls);

// u(x,t) reconstructed from the boundary trace
double interior_eval(const SolveOutcome& outcome, const MeasureSpec& mu,
                     const Point& x, double t, double p);

struct PicardLevel {
    int cap_n = 0;                       // the cap value n
    std::vector<BoundaryTrace> iterates; // trace per k (k = 1,2,...)
};

// Capped monotone iterates u_{n,k} on a fixed time mesh (N=1).
std::vector<PicardLevel> picard_minimal(const MeasureSpec& mu, double p,
                                        double horizon, int n_cap, int k_max,
                                        const SolverControls& controls);

struct BlowupEstimate {
    bool blown_up = false;
    double T_est = 0.0;
    double T_err = 0.0;
    bool model_fit_ok = false;  // false: threshold-crossing bracket fallback
};

// Fits sup_w(t) ~ C (T-t)^{-1/(2(p-1))} on the last decade of growth.
BlowupEstimate estimate_blowup_time(const BoundaryTrace& trace, double p);

// Scalar solve of the LINEAR Abel problem w = g + pi^{-1/2} ∫ (t-s)^{-1/2} w ds
// on a uniform mesh; test/oracle entry point for the discretization.
std::vector<double> solve_linear_abel(const std::function<double(double)>& g,
                                      double horizon, double dt,
                                      std::vector<double>* times_out = nullptr);

}  // namespace halfheat
