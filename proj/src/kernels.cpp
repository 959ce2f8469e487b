#include "halfheat/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "halfheat/quadrature.hpp"
#include "json.hpp"

namespace halfheat {

double gauss1(double dx, double t) {
    return std::exp(-dx * dx / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
}

double gauss_kernel(const Point& x, double t) {
    if (t <= 0.0) throw ConfigError("gauss_kernel requires t > 0");
    double v = 1.0;
    for (int i = 0; i < x.dim; ++i) v *= gauss1(x.c[i], t);
    return v;
}

double green_neumann(const Point& x, const Point& y, double t) {
    if (t <= 0.0) throw ConfigError("green_neumann requires t > 0");
    double lat = 1.0;
    for (int i = 0; i + 1 < x.dim; ++i) lat *= gauss1(x.c[i] - y.c[i], t);
    return lat * (gauss1(x.xn() - y.xn(), t) + gauss1(x.xn() + y.xn(), t));
}

double green_boundary(const Point& x, const double* yprime, double t) {
    if (t <= 0.0) throw ConfigError("green_boundary requires t > 0");
    const double xn = x.xn();
    double v = 2.0 / std::sqrt(4.0 * M_PI * t) * std::exp(-xn * xn / (4.0 * t));
    for (int i = 0; i + 1 < x.dim; ++i) v *= gauss1(x.c[i] - yprime[i], t);
    return v;
}

namespace {

// half the erf-integral of Gamma_1 over [lo,hi] centered at a
double gauss1_interval(double a, double lo, double hi, double t) {
    const double s = std::sqrt(4.0 * t);
    return 0.5 * (std::erf((a - lo) / s) - std::erf((a - hi) / s));
}

// nested adaptive integration over an axis-aligned box, dims 0..N-1
double box_integral(int N, const double* lo, const double* hi,
                    const std::function<double(const Point&)>& f, double tol,
                    int level = 0, Point* scratch = nullptr) {
    Point pt;
    Point& p = scratch ? *scratch : pt;
    if (!scratch) p.dim = N;
    const int d = level;
    if (lo[d] >= hi[d]) return 0.0;
    auto g = [&](double y) {
        p.c[d] = y;
        if (d + 1 == N) return f(p);
        return box_integral(N, lo, hi, f, tol * 3.0, level + 1, &p);
    };
    return integrate_adaptive(g, lo[d], hi[d], tol, 1e-300, d == 0 ? 2000 : 400)
        .value;
}

double density_semigroup(const DensityComponent& dc, int N, const Point& x,
                         double t, double rel_tol) {
    const double xn = x.xn();
    if (dc.kind == DensityKind::GaussianGrowth) {
        const double q = 1.0 - 4.0 * dc.lambda * t;
        if (q <= 0.0)
            throw DivergenceError("S(t) of Gaussian-growth data diverges: 4*lambda*t >= 1");
        if (!dc.band_restricted()) {
            return std::exp(dc.lambda * xn * xn / q) / std::sqrt(q);
        }
        // laterally uniform, 1-D quadrature on the band
        const double a = q / (4.0 * t);
        const double peak = xn / q;
        const double cut = peak + 14.0 / std::sqrt(a);
        const double lo = dc.xn_lo;
        const double hi = std::min(dc.xn_hi, cut);
        if (hi <= lo) return 0.0;
        auto g = [&](double y) {
            return (gauss1(xn - y, t) + gauss1(xn + y, t)) *
                   std::exp(dc.lambda * y * y);
        };
        return integrate_adaptive(g, lo, hi, rel_tol).value;
    }
    if (dc.kind == DensityKind::ConstantStrip) {
        const double lo = dc.xn_lo;
        const double hi = std::min(dc.height, dc.xn_hi);
        if (hi <= lo) return 0.0;
        return dc.value * (gauss1_interval(xn, lo, hi, t) +
                           gauss1_interval(-xn, lo, hi, t));
    }

    // generic quadrature path
    const double R = 13.5 * std::sqrt(t);
    double lo[3], hi[3];
    for (int i = 0; i + 1 < N; ++i) {
        lo[i] = x.c[i] - R;
        hi[i] = x.c[i] + R;
    }
    lo[N - 1] = std::max({0.0, dc.xn_lo, xn - R});
    hi[N - 1] = std::min(dc.xn_hi, xn + R);
    if (dc.kind == DensityKind::PowerLog) {
        for (int i = 0; i + 1 < N; ++i) {
            lo[i] = std::max(lo[i], -dc.r0);
            hi[i] = std::min(hi[i], dc.r0);
        }
        hi[N - 1] = std::min(hi[N - 1], dc.r0);
    } else if (dc.kind == DensityKind::TabulatedGrid) {
        for (int i = 0; i < N; ++i) {
            lo[i] = std::max(lo[i], dc.grid_min[i]);
            hi[i] = std::min(hi[i], dc.grid_max[i]);
        }
    }
    for (int i = 0; i < N; ++i)
        if (hi[i] <= lo[i]) return 0.0;
    auto f = [&](const Point& y) { return dc.eval(y) * green_neumann(x, y, t); };
    return box_integral(N, lo, hi, f, rel_tol);
}

}  // namespace

double semigroup_apply(const MeasureSpec& mu, const Point& x, double t,
                       const QuadControls& qc) {
    if (t <= 0.0) throw ConfigError("semigroup_apply requires t > 0");
    if (x.dim != mu.N) throw ConfigError("point dimension mismatch");
    if (mu.kappa == 0.0) {
        // still surface divergence for Gaussian-growth components
        for (const auto& d : mu.densities)
            if (d.kind == DensityKind::GaussianGrowth && 4.0 * d.lambda * t >= 1.0)
                throw DivergenceError("S(t) of Gaussian-growth data diverges");
        return 0.0;
    }
    double total = 0.0;
    for (const auto& a : mu.atoms) total += a.mass * green_neumann(x, a.x, t);
    for (const auto& d : mu.densities)
        total += density_semigroup(d, mu.N, x, t, qc.rel_tol);
    return mu.kappa * total;
}

// ---------------------------------------------------------------------------

std::string SelftestReport::to_json() const {
    nlohmann::json j;
    j["N"] = N;
    j["samples"] = samples;
    j["max_semigroup_defect"] = max_semigroup_defect;
    j["max_mass_defect"] = max_mass_defect;
    j["max_bound_violation"] = max_bound_violation;
    return j.dump(2);
}

SelftestReport semigroup_selftest(int N, unsigned seed, int samples) {
    SelftestReport rep;
    rep.N = N;
    rep.samples = samples;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> lat(-2.0, 2.0);
    std::uniform_real_distribution<double> nrm(0.0, 2.0);
    std::uniform_real_distribution<double> tim(0.1, 1.5);

    auto g1n = [](double a, double b, double tau) {
        return gauss1(a - b, tau) + gauss1(a + b, tau);
    };

    for (int s = 0; s < samples; ++s) {
        Point x, z;
        x.dim = z.dim = N;
        for (int i = 0; i + 1 < N; ++i) {
            x.c[i] = lat(rng);
            z.c[i] = lat(rng);
        }
        x.xn() = nrm(rng);
        z.xn() = nrm(rng);
        const double t = tim(rng), u = tim(rng);

        // semigroup identity, dimension-factorized quadrature
        const double R = 14.0 * std::sqrt(std::max(t, u));
        double lhs = 1.0;
        for (int i = 0; i + 1 < N; ++i) {
            const double a = x.c[i], b = z.c[i];
            lhs *= integrate_adaptive(
                       [&](double y) { return gauss1(a - y, t) * gauss1(y - b, u); },
                       std::min(a, b) - R, std::max(a, b) + R, 1e-11)
                       .value;
        }
        lhs *= integrate_adaptive(
                   [&](double y) { return g1n(x.xn(), y, t) * g1n(y, z.xn(), u); },
                   0.0, std::max(x.xn(), z.xn()) + R, 1e-11)
                   .value;
        const double rhs = green_neumann(x, z, t + u);
        rep.max_semigroup_defect =
            std::max(rep.max_semigroup_defect, std::abs(lhs - rhs) / rhs);

        // mass conservation
        double mass = 1.0;
        for (int i = 0; i + 1 < N; ++i) {
            const double a = x.c[i];
            mass *= integrate_adaptive([&](double y) { return gauss1(a - y, t); },
                                       a - R, a + R, 1e-11)
                        .value;
        }
        mass *= integrate_adaptive([&](double y) { return g1n(x.xn(), y, t); },
                                   0.0, x.xn() + R, 1e-11)
                    .value;
        rep.max_mass_defect = std::max(rep.max_mass_defect, std::abs(mass - 1.0));

        // Gamma <= G <= 2 Gamma
        Point diff;
        diff.dim = N;
        for (int i = 0; i < N; ++i) diff.c[i] = x.c[i] - z.c[i];
        const double gam = gauss_kernel(diff, t);
        const double g = green_neumann(x, z, t);
        rep.max_bound_violation = std::max(
            {rep.max_bound_violation, (gam - g) / gam, (g - 2.0 * gam) / gam});
    }
    return rep;
}

}  // namespace halfheat
