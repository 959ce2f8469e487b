#pragma once

#include <string>

#include "halfheat/measure.hpp"
#include "halfheat/types.hpp"

namespace halfheat {

// Gauss kernel (4*pi*t)^{-N/2} exp(-|x|^2 / 4t)
double gauss_kernel(const Point& x, double t);
// 1-D building block
double gauss1(double dx, double t);

// Half-space Neumann Green function, Gamma_N(x-y,t) + Gamma_N(x-y*,t)
double green_neumann(const Point& x, const Point& y, double t);

// Boundary form 2(4*pi*t)^{-1/2} exp(-x_N^2/4t) Gamma_{N-1}(x'-y',t).
// yprime has N-1 entries (ignored for N=1).
double green_boundary(const Point& x, const double* yprime, double t);

struct QuadControls {
    double rel_tol = 1e-9;
};

// [S(t)mu](x) = ∫_D G(x,y,t) dmu(y). Closed forms for atoms, full
// Gaussian-growth profiles and constant strips; adaptive quadrature otherwise.
// Throws DivergenceError when a Gaussian-growth component has 4*lambda*t >= 1.
double semigroup_apply(const MeasureSpec& mu, const Point& x, double t,
                       const QuadControls& qc = {});

struct SelftestReport {
    int N = 1;
    int samples = 0;
    double max_semigroup_defect = 0.0;   // relative
    double max_mass_defect = 0.0;        // |∫ G dy - 1|
    double max_bound_violation = 0.0;    // Gamma <= G <= 2 Gamma slack
    std::string to_json() const;
};

SelftestReport semigroup_selftest(int N, unsigned seed, int samples);

}  // namespace halfheat
