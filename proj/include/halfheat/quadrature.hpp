#pragma once

#include <functional>

namespace halfheat {

struct QuadResult {
    double value = 0.0;
    double abs_err = 0.0;
    bool converged = true;
};

// Globally adaptive Gauss-Kronrod 7-15 on [a,b]. Refines the worst panel
// until abs_err <= max(abs_tol, rel_tol*|value|) or the panel budget runs out.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double rel_tol = 1e-9,
                              double abs_tol = 1e-14, int max_panels = 4000);

// Same, but throws AccuracyError when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, double rel_tol = 1e-9,
                          double abs_tol = 1e-14, int max_panels = 4000);

}  // namespace halfheat
