#pragma once

#include <string>
#include <vector>

#include "halfheat/measure.hpp"
#include "halfheat/types.hpp"

namespace halfheat {

// Orlicz gauge s[log(e+s)]^beta and its inverse (monotone bisection+Newton)
double phi_beta(double s, double beta);
double phi_beta_inv(double y, double beta);
// critical profile s^{-N}[log(e+1/s)]^{-N}
double rho_profile(double s, int N);

struct ConditionParams {
    double p = 1.5;      // exponent, > 1
    double T = 1.0;      // candidate time
    double delta = 0.5;  // slack in (0,1)
    double alpha = 0.0;  // Jensen exponent in (1,p); 0 -> (1+p)/2
    double beta = 1.0;   // Orlicz exponent > 0
    int N = 1;

    void validate() const;
    double lambda() const { return (1.0 - delta) / (4.0 * T); }
    double alpha_or_default() const { return alpha > 0.0 ? alpha : 0.5 * (1.0 + p); }
};

enum class Verdict { Pass, Fail, Indeterminate };

struct ConditionReport {
    std::string functional_name;
    double sup_value = 0.0;
    Point arg_sup;
    double arg_sigma = 0.0;       // sigma achieving the worst ratio, if any
    double rhs_shape = 0.0;
    double ratio = 0.0;
    Verdict verdict_hint = Verdict::Indeterminate;
    bool hypothesis_unverified = false;
    std::string to_json() const;
};

// Empirically calibrated stand-ins for the existence-only constants.
struct CalibrationConstants {
    std::string version = "v1";
    double gamma1 = 1.0;  // necessary (upper) threshold
    double gamma2 = 1.0;  // sufficient, subcritical ball average
    double gamma3 = 1.0;  // sufficient, strip split
    double gamma4 = 1.0;  // sufficient, critical Orlicz
    static CalibrationConstants defaults();
    static CalibrationConstants load(const std::string& path);
    std::string to_json() const;
};

ConditionReport necessary_thm11(const MeasureSpec& mu, const ConditionParams& params,
                                const CalibrationConstants& cal = CalibrationConstants::defaults());

ConditionReport necessary_smoothing(const MeasureSpec& mu, const ConditionParams& params,
                                    const std::vector<double>& t_grid);

ConditionReport sufficient_thm13(const MeasureSpec& mu, const ConditionParams& params,
                                 const CalibrationConstants& cal = CalibrationConstants::defaults());

std::pair<ConditionReport, ConditionReport> sufficient_thm14(
    const MeasureSpec& mu, const ConditionParams& params,
    const CalibrationConstants& cal = CalibrationConstants::defaults());

std::pair<ConditionReport, ConditionReport> sufficient_thm15(
    const MeasureSpec& mu, const ConditionParams& params,
    const CalibrationConstants& cal = CalibrationConstants::defaults());

struct BracketControls {
    double T_lo = 1e-4;
    double T_hi = 1e2;
    int points = 25;
};

struct LifespanBracket {
    double T_lower = 0.0;                 // certified-solvable up to here
    double T_upper = 0.0;                 // necessary condition fails from here
    bool has_upper = false;
    bool indeterminate = false;
};

LifespanBracket lifespan_bracket(const MeasureSpec& mu, double p, int N,
                                 const BracketControls& controls,
                                 const CalibrationConstants& cal = CalibrationConstants::defaults());

}  // namespace halfheat
