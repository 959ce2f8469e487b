#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "halfheat/types.hpp"

namespace halfheat {

enum class DensityKind { PowerLog, GaussianGrowth, BoundedDecay, ConstantStrip, TabulatedGrid };

// One parametric density on D. Every component carries an optional normal-band
// restriction [xn_lo, xn_hi) used by the strip decomposition.
struct DensityComponent {
    DensityKind kind = DensityKind::ConstantStrip;

    // power_log: |y|^A [log(e+1/|y|)]^{-B} on B_+(0, r0)
    double A = 0.0;
    double B = 0.0;
    double r0 = 1.0;
    // gaussian_growth: exp(lambda * y_N^2) on D
    double lambda = 0.0;
    // bounded_decay: (1+|y|)^{-A} on D (reuses A)
    // constant_strip: value c on {0 <= y_N <= h}
    double height = 0.0;
    double value = 0.0;
    // tabulated_grid: multilinear interpolation of nonnegative samples on an
    // axis-aligned box, zero outside
    std::vector<double> grid_min, grid_max;
    std::vector<int> grid_n;
    std::vector<double> samples;

    double xn_lo = 0.0;
    double xn_hi = std::numeric_limits<double>::infinity();

    // pointwise density at y (0 outside the support / band), without kappa
    double eval(const Point& y) const;
    // true when the density depends on y_N only (laterally uniform)
    bool laterally_uniform() const {
        return kind == DensityKind::GaussianGrowth || kind == DensityKind::ConstantStrip;
    }
    bool band_restricted() const {
        return xn_lo > 0.0 || std::isfinite(xn_hi);
    }
    void validate(int N) const;
};

struct Atom {
    Point x;
    double mass = 0.0;
};

struct MeasureSpec {
    int N = 1;
    double kappa = 1.0;
    std::vector<Atom> atoms;
    std::vector<DensityComponent> densities;

    void validate() const;
    bool empty() const { return kappa == 0.0 || (atoms.empty() && densities.empty()); }
    // total pointwise density (kappa included), atoms excluded
    double density_at(const Point& y) const;
    bool has_atoms() const;
    bool has_densities() const { return !densities.empty(); }

    std::string to_json() const;
    static MeasureSpec from_json(const std::string& text);
    static MeasureSpec load(const std::string& path);
};

struct BallQuery {
    Point center;
    double sigma = 1.0;    // radius > 0
    double lambda = 0.0;   // weight exp(-lambda y_N^2)
};

// mu(B(center,sigma) ∩ D); the weight is ignored
double ball_mass(const MeasureSpec& mu, const BallQuery& q, double rel_tol = 1e-9);

// (1/|B|) ∫_{B∩D} exp(-lambda y_N^2) dmu, normalized by the FULL N-ball volume
double weighted_ball_average(const MeasureSpec& mu, const BallQuery& q, double rel_tol = 1e-9);

// Phi_beta^{-1}[ (1/|B|) ∫_{B∩D} Phi_beta(T^{1/(2(p-1))} mu2(y)) dy ] with
// p = 1 + 1/N. mu2 must be density-only.
double orlicz_ball_average(const MeasureSpec& mu2, const Point& center, double sigma,
                           double beta, double T, double rel_tol = 1e-9);

// L^alpha ball average [ (1/|B|) ∫_{B∩D} mu2(y)^alpha dy ]^{1/alpha}; density-only
double lp_ball_average(const MeasureSpec& mu2, const Point& center, double sigma,
                       double alpha, double rel_tol = 1e-9);

MeasureSpec scale(const MeasureSpec& mu, double factor);

// mu1 = mu restricted to {x_N >= sqrt(T)}, mu2 = the complement strip.
// Atoms exactly on the interface go to mu1.
std::pair<MeasureSpec, MeasureSpec> split_strip(const MeasureSpec& mu, double T);

// ∫_{B(center,sigma)∩D} f(y) dy for a pointwise-evaluable f (no kappa applied)
double ball_integral(int N, const Point& center, double sigma,
                     const std::function<double(const Point&)>& f,
                     double rel_tol = 1e-9);

}  // namespace halfheat
