#include "halfheat/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "halfheat/kernels.hpp"
#include "json.hpp"

namespace halfheat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double phi_beta(double s, double beta) {
    if (s < 0.0) throw ConfigError("phi_beta requires s >= 0");
    return s * std::pow(std::log(M_E + s), beta);
}

double phi_beta_inv(double y, double beta) {
    if (y < 0.0) throw ConfigError("phi_beta_inv requires y >= 0");
    if (y == 0.0) return 0.0;
    double lo = 0.0, hi = y;  // phi(s) >= s, so the root is <= y
    if (phi_beta(hi, beta) < y) hi = y;  // never triggers, phi(y) >= y
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi_beta(mid, beta) < y ? lo : hi) = mid;
        if (hi - lo <= 1e-13 * hi) break;
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 6; ++it) {  // Newton polish
        const double l = std::log(M_E + s);
        const double f = s * std::pow(l, beta) - y;
        const double df = std::pow(l, beta) * (1.0 + beta * s / ((M_E + s) * l));
        const double sn = s - f / df;
        if (!(sn > lo && sn < hi)) break;
        s = sn;
    }
    return s;
}

double rho_profile(double s, int N) {
    if (s <= 0.0) throw ConfigError("rho requires s > 0");
    return std::pow(s, -N) * std::pow(std::log(M_E + 1.0 / s), -N);
}

void ConditionParams::validate() const {
    if (!(p > 1.0)) throw ConfigError("p must exceed 1");
    if (!(T > 0.0)) throw ConfigError("T must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
    if (alpha != 0.0 && !(alpha > 1.0 && alpha < p))
        throw ConfigError("alpha must be in (1,p)");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (N < 1 || N > 3) throw ConfigError("N must be 1, 2 or 3");
}

// ---------------------------------------------------------------------------
// calibration

CalibrationConstants CalibrationConstants::defaults() {
    // Obtained by running the boundary solver on a reference family of N=1
    // boundary atoms and strips across p in {1.2, 1.5, 1.8} and placing the
    // thresholds a 2x safety margin inside the observed pass/fail boundary.
    CalibrationConstants c;
    c.version = "v1";
    c.gamma1 = 4.5;   // 2x the largest ratio seen on still-solvable horizons
    c.gamma2 = 0.07;  // half the smallest at-blow-up ratio (subcritical)
    c.gamma3 = 0.2;   // half the smallest at-blow-up ratio (supercritical pair)
    c.gamma4 = 0.15;  // half the smallest at-blow-up ratio (critical pair)
    return c;
}

CalibrationConstants CalibrationConstants::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open calibration file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed calibration JSON: ") + e.what());
    }
    CalibrationConstants c;
    c.version = j.value("version", "unversioned");
    c.gamma1 = j.at("gamma1").get<double>();
    c.gamma2 = j.at("gamma2").get<double>();
    c.gamma3 = j.at("gamma3").get<double>();
    c.gamma4 = j.at("gamma4").get<double>();
    return c;
}

std::string CalibrationConstants::to_json() const {
    nlohmann::json j;
    j["version"] = version;
    j["gamma1"] = gamma1;
    j["gamma2"] = gamma2;
    j["gamma3"] = gamma3;
    j["gamma4"] = gamma4;
    return j.dump(2);
}

std::string ConditionReport::to_json() const {
    nlohmann::json j;
    j["functional"] = functional_name;
    j["sup_value"] = sup_value;
    j["arg_sup"] = std::vector<double>(arg_sup.c.begin(), arg_sup.c.begin() + arg_sup.dim);
    if (arg_sigma > 0.0) j["arg_sigma"] = arg_sigma;
    j["rhs_shape"] = rhs_shape;
    j["ratio"] = ratio;
    j["verdict_hint"] = verdict_hint == Verdict::Pass     ? "pass"
                        : verdict_hint == Verdict::Fail   ? "fail"
                                                          : "indeterminate";
    j["calibrated"] = true;
    if (hypothesis_unverified) j["hypothesis_unverified"] = true;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// deterministic sup search over centers

namespace {

struct SupResult {
    double value = 0.0;
    Point arg;
};

// coarse grid + 3 rounds of local refinement (factor 4); lexicographically
// smallest center wins ties
SupResult sup_search(int N, std::array<double, 3> lo, std::array<double, 3> hi,
                     const std::vector<Point>& seeds,
                     const std::function<double(const Point&)>& f) {
    SupResult best;
    best.arg.dim = N;
    best.value = -kInf;
    auto consider = [&](const Point& x) {
        const double v = f(x);
        if (v > best.value) {
            best.value = v;
            best.arg = x;
        } else if (v == best.value) {
            for (int i = 0; i < N; ++i) {
                if (x.c[i] < best.arg.c[i]) {
                    best.arg = x;
                    break;
                }
                if (x.c[i] > best.arg.c[i]) break;
            }
        }
    };
    for (const auto& s : seeds) {
        Point q = s;
        for (int i = 0; i < N; ++i) q.c[i] = std::clamp(q.c[i], lo[i], hi[i]);
        if (q.xn() < 0.0) q.xn() = 0.0;
        consider(q);
        if (best.value == kInf) return best;
    }
    const int coarse = N == 1 ? 33 : (N == 2 ? 13 : 7);
    std::array<double, 3> span{};
    for (int i = 0; i < N; ++i) span[i] = (hi[i] - lo[i]) / (coarse - 1);
    auto sweep = [&](std::array<double, 3> l, std::array<double, 3> h, int k) {
        int idx[3] = {0, 0, 0};
        Point x;
        x.dim = N;
        const int total = [&] {
            int t = 1;
            for (int i = 0; i < N; ++i) t *= k;
            return t;
        }();
        for (int flat = 0; flat < total; ++flat) {
            int r = flat;
            for (int i = 0; i < N; ++i) {
                idx[i] = r % k;
                r /= k;
                x.c[i] = k == 1 ? l[i] : l[i] + (h[i] - l[i]) * idx[i] / (k - 1);
            }
            if (x.xn() < 0.0) continue;
            consider(x);
            if (best.value == kInf) return;
        }
    };
    sweep(lo, hi, coarse);
    if (best.value == kInf) return best;
    std::array<double, 3> w = span;
    for (int round = 0; round < 3; ++round) {
        std::array<double, 3> l{}, h{};
        for (int i = 0; i < N; ++i) {
            l[i] = std::max(lo[i], best.arg.c[i] - w[i]);
            h[i] = std::min(hi[i], best.arg.c[i] + w[i]);
            w[i] /= 4.0;
        }
        if (l[N - 1] < 0.0) l[N - 1] = 0.0;
        sweep(l, h, 9);
        if (best.value == kInf) return best;
    }
    if (best.value < 0.0) best.value = 0.0;
    return best;
}

// essential-support bounding box, inflated
void support_box(const MeasureSpec& mu, double inflate, std::array<double, 3>& lo,
                 std::array<double, 3>& hi, double xn_cap) {
    const int N = mu.N;
    bool any = false;
    for (int i = 0; i < 3; ++i) {
        lo[i] = kInf;
        hi[i] = -kInf;
    }
    auto grow = [&](const Point& x, double r) {
        any = true;
        for (int i = 0; i < N; ++i) {
            lo[i] = std::min(lo[i], x.c[i] - r);
            hi[i] = std::max(hi[i], x.c[i] + r);
        }
    };
    for (const auto& a : mu.atoms) grow(a.x, 0.0);
    for (const auto& d : mu.densities) {
        Point origin;
        origin.dim = N;
        switch (d.kind) {
            case DensityKind::PowerLog:
                grow(origin, d.r0);
                break;
            case DensityKind::BoundedDecay:
                grow(origin, 5.0 * inflate + 5.0);
                break;
            case DensityKind::GaussianGrowth: {
                Point top = origin;
                top.xn() = std::min(std::isfinite(d.xn_hi) ? d.xn_hi : xn_cap, xn_cap);
                grow(origin, inflate);
                grow(top, inflate);
                break;
            }
            case DensityKind::ConstantStrip: {
                Point top = origin;
                top.xn() = std::min(d.height, d.xn_hi);
                grow(origin, inflate);
                grow(top, inflate);
                break;
            }
            case DensityKind::TabulatedGrid: {
                Point a, b;
                a.dim = b.dim = N;
                for (int i = 0; i < N; ++i) {
                    a.c[i] = d.grid_min[i];
                    b.c[i] = d.grid_max[i];
                }
                grow(a, 0.0);
                grow(b, 0.0);
                break;
            }
        }
    }
    if (!any) {
        for (int i = 0; i < N; ++i) {
            lo[i] = -1.0;
            hi[i] = 1.0;
        }
    }
    for (int i = 0; i < N; ++i) {
        lo[i] -= inflate;
        hi[i] += inflate;
    }
    lo[N - 1] = std::max(0.0, lo[N - 1]);
    hi[N - 1] = std::max(hi[N - 1], lo[N - 1] + inflate);
}

std::vector<Point> seed_points(const MeasureSpec& mu, double sigma) {
    std::vector<Point> seeds;
    Point origin;
    origin.dim = mu.N;
    seeds.push_back(origin);
    Point edge = origin;
    edge.xn() = sigma;
    seeds.push_back(edge);
    for (const auto& a : mu.atoms) seeds.push_back(a.x);
    for (const auto& d : mu.densities) {
        if (d.xn_lo > 0.0) {
            Point q = origin;
            q.xn() = d.xn_lo;
            seeds.push_back(q);
        }
    }
    return seeds;
}

// largest Gaussian-growth rate present (0 when none)
double max_gaussian_rate(const MeasureSpec& mu) {
    double lam = 0.0;
    for (const auto& d : mu.densities)
        if (d.kind == DensityKind::GaussianGrowth) lam = std::max(lam, d.lambda);
    return lam;
}

// how far in x_N a factor exp(coef * x_N^2) stays relevant (coef < 0)
double gaussian_reach(double coef, double base) {
    if (coef >= 0.0) return kInf;
    return base + std::sqrt(69.0 / -coef);
}

}  // namespace

// ---------------------------------------------------------------------------

ConditionReport necessary_thm11(const MeasureSpec& mu, const ConditionParams& params,
                                const CalibrationConstants& cal) {
    params.validate();
    mu.validate();
    const int N = mu.N;
    const double pstar = critical_exponent(N);
    const double sqT = std::sqrt(params.T);
    ConditionReport rep;
    rep.arg_sup.dim = N;

    std::vector<double> sigmas;
    if (params.p < pstar - 1e-12) {
        sigmas.push_back(sqT);
    } else {
        const int n = 40;
        for (int i = 0; i < n; ++i)
            sigmas.push_back(1e-4 * sqT * std::pow(1e4, double(i) / (n - 1)));
    }
    rep.functional_name = params.p < pstar - 1e-12   ? "necessary_thm11_subcritical"
                          : params.p <= pstar + 1e-12 ? "necessary_thm11_critical"
                                                      : "necessary_thm11_supercritical";

    const double lam_g = max_gaussian_rate(mu);
    double worst = -kInf;
    for (double sigma : sigmas) {
        const double denom =
            params.p < pstar - 1e-12 ? 4.0 * params.T : 4.0 * sigma * sigma;
        const double wcoef = (1.0 + params.delta) / denom;
        double rhs;
        if (params.p < pstar - 1e-12)
            rhs = std::pow(params.T, 0.5 * N - 0.5 / (params.p - 1.0));
        else if (params.p <= pstar + 1e-12)
            rhs = std::pow(std::log(M_E + sqT / sigma), -double(N));
        else
            rhs = std::pow(sigma, N - 1.0 / (params.p - 1.0));

        double sup;
        Point arg;
        arg.dim = N;
        if (lam_g > 0.0 && lam_g >= wcoef) {
            sup = kInf;  // Gaussian-growth tail beats the weight
        } else {
            std::array<double, 3> lo{}, hi{};
            const double cap =
                lam_g > 0.0 ? gaussian_reach(lam_g - wcoef, 3.0 * sigma) : 10.0 * sqT;
            support_box(mu, 3.0 * sqT, lo, hi, cap);
            auto f = [&](const Point& x) {
                const double xn = x.xn();
                BallQuery q{x, sigma, 0.0};
                return std::exp(-wcoef * xn * xn) * ball_mass(mu, q, 1e-7);
            };
            SupResult r = sup_search(N, lo, hi, seed_points(mu, sigma), f);
            sup = r.value;
            arg = r.arg;
        }
        const double ratio = sup / rhs;
        if (ratio > worst) {
            worst = ratio;
            rep.sup_value = sup;
            rep.rhs_shape = rhs;
            rep.arg_sup = arg;
            rep.arg_sigma = sigma;
        }
    }
    rep.ratio = worst;
    rep.verdict_hint = worst <= cal.gamma1 ? Verdict::Pass : Verdict::Fail;
    return rep;
}

ConditionReport necessary_smoothing(const MeasureSpec& mu, const ConditionParams& params,
                                    const std::vector<double>& t_grid) {
    params.validate();
    mu.validate();
    const int N = mu.N;
    ConditionReport rep;
    rep.functional_name = "necessary_smoothing";
    rep.arg_sup.dim = N;

    // monotone-profile hypothesis decidable only for some families
    bool ok = !mu.has_atoms();
    for (const auto& d : mu.densities)
        if (d.kind != DensityKind::BoundedDecay && d.kind != DensityKind::ConstantStrip)
            ok = false;
    rep.hypothesis_unverified = !ok;

    const double expo = 1.0 / (2.0 * (params.p - 1.0));
    double worst = 0.0;
    for (double t : t_grid) {
        if (t <= 0.0) throw ConfigError("t grid must be positive");
        std::array<double, 3> lo{}, hi{};
        support_box(mu, 3.0 * std::sqrt(t), lo, hi, 10.0 * std::sqrt(t));
        auto f = [&](const Point& xc) -> double {
            Point x = xc;
            x.xn() = 0.0;
            try {
                return std::pow(t, expo) * semigroup_apply(mu, x, t);
            } catch (const DivergenceError&) {
                return kInf;
            }
        };
        // lateral centers only: collapse the normal axis
        std::array<double, 3> lo2 = lo, hi2 = hi;
        lo2[N - 1] = hi2[N - 1] = 0.0;
        SupResult r = sup_search(N, lo2, hi2, seed_points(mu, std::sqrt(t)), f);
        if (r.value > worst) {
            worst = r.value;
            rep.sup_value = r.value;
            rep.arg_sup = r.arg;
            rep.arg_sigma = t;  // records the worst time
        }
        if (worst == kInf) break;
    }
    rep.rhs_shape = 1.0;
    rep.ratio = worst;
    rep.verdict_hint = std::isfinite(worst) ? Verdict::Indeterminate : Verdict::Fail;
    return rep;
}

namespace {

// sup over centers with x_N restricted to [xn_lo, xn_hi] of the weighted
// ball average of mu, divided by rhs
ConditionReport strip_average_report(const MeasureSpec& mu, const ConditionParams& params,
                                     double xn_lo, double xn_hi, double gamma,
                                     const char* name) {
    const int N = mu.N;
    const double sqT = std::sqrt(params.T);
    const double lam_w = params.lambda();
    ConditionReport rep;
    rep.functional_name = name;
    rep.arg_sup.dim = N;
    rep.rhs_shape = std::pow(params.T, -1.0 / (2.0 * (params.p - 1.0)));

    const double lam_g = max_gaussian_rate(mu);
    if (lam_g > lam_w * (1.0 + 1e-12)) {
        rep.sup_value = kInf;
        rep.ratio = kInf;
        rep.verdict_hint = Verdict::Fail;
        return rep;
    }
    std::array<double, 3> lo{}, hi{};
    const double cap = lam_g > 0.0 ? gaussian_reach(lam_g - lam_w, 3.0 * sqT)
                                   : 10.0 * sqT;
    support_box(mu, 3.0 * sqT, lo, hi,
                std::isfinite(cap) ? cap : std::max(20.0 * sqT, xn_lo + 20.0 * sqT));
    lo[N - 1] = std::max(lo[N - 1], xn_lo);
    hi[N - 1] = std::min(hi[N - 1], xn_hi);
    if (lam_g > 0.0 && !std::isfinite(cap) && std::isfinite(xn_hi))
        hi[N - 1] = xn_hi;
    if (hi[N - 1] < lo[N - 1]) {  // empty strip
        rep.ratio = 0.0;
        rep.verdict_hint = Verdict::Pass;
        return rep;
    }
    auto f = [&](const Point& x) {
        BallQuery q{x, sqT, lam_w};
        return weighted_ball_average(mu, q, 1e-7);
    };
    auto seeds = seed_points(mu, sqT);
    for (auto& s : seeds) s.xn() = std::clamp(s.xn(), lo[N - 1], hi[N - 1]);
    SupResult r = sup_search(N, lo, hi, seeds, f);
    rep.sup_value = r.value;
    rep.arg_sup = r.arg;
    rep.ratio = r.value / rep.rhs_shape;
    rep.verdict_hint = rep.ratio <= gamma ? Verdict::Pass : Verdict::Fail;
    return rep;
}

}  // namespace

ConditionReport sufficient_thm13(const MeasureSpec& mu, const ConditionParams& params,
                                 const CalibrationConstants& cal) {
    params.validate();
    mu.validate();
    const double pstar = critical_exponent(mu.N);
    if (!(params.p < pstar))
        throw ConfigError("sufficient_thm13 applies only for p < 1 + 1/N");
    return strip_average_report(mu, params, 0.0, kInf, cal.gamma2, "sufficient_thm13");
}

std::pair<ConditionReport, ConditionReport> sufficient_thm14(
    const MeasureSpec& mu, const ConditionParams& params,
    const CalibrationConstants& cal) {
    params.validate();
    mu.validate();
    const int N = mu.N;
    const double sqT = std::sqrt(params.T);
    auto [mu1, mu2] = split_strip(mu, params.T);

    ConditionReport rep1 = strip_average_report(mu1, params, sqT, kInf, cal.gamma3,
                                                "sufficient_thm14_upper");

    if (mu2.has_atoms())
        throw ConfigError("sufficient_thm14 requires function-type data in the boundary strip");
    const double alpha = params.alpha_or_default();
    ConditionReport rep2;
    rep2.functional_name = "sufficient_thm14_strip";
    rep2.arg_sup.dim = N;
    double worst = 0.0;
    if (mu2.has_densities() && mu2.kappa > 0.0) {
        const int ns = 40;
        for (int i = 0; i < ns; ++i) {
            const double sigma = 1e-4 * sqT * std::pow(1e4, double(i) / (ns - 1));
            if (sigma >= sqT) continue;
            const double rhs = std::pow(sigma, -1.0 / (params.p - 1.0));
            std::array<double, 3> lo{}, hi{};
            support_box(mu2, 3.0 * sigma, lo, hi, sqT);
            hi[N - 1] = std::min(hi[N - 1], sqT);
            auto f = [&](const Point& x) {
                return lp_ball_average(mu2, x, sigma, alpha, 1e-7);
            };
            SupResult r = sup_search(N, lo, hi, seed_points(mu2, sigma), f);
            const double ratio = r.value / rhs;
            if (ratio > worst) {
                worst = ratio;
                rep2.sup_value = r.value;
                rep2.rhs_shape = rhs;
                rep2.arg_sup = r.arg;
                rep2.arg_sigma = sigma;
            }
        }
    }
    rep2.ratio = worst;
    rep2.verdict_hint = worst <= cal.gamma3 ? Verdict::Pass : Verdict::Fail;
    return {rep1, rep2};
}

std::pair<ConditionReport, ConditionReport> sufficient_thm15(
    const MeasureSpec& mu, const ConditionParams& params,
    const CalibrationConstants& cal) {
    params.validate();
    mu.validate();
    const int N = mu.N;
    const double pstar = critical_exponent(N);
    if (std::abs(params.p - pstar) > 1e-12)
        throw ConfigError("sufficient_thm15 applies only at p = 1 + 1/N");
    const double sqT = std::sqrt(params.T);
    auto [mu1, mu2] = split_strip(mu, params.T);

    ConditionReport rep1 = strip_average_report(mu1, params, sqT, kInf, cal.gamma4,
                                                "sufficient_thm15_upper");

    if (mu2.has_atoms())
        throw ConfigError("sufficient_thm15 requires function-type data in the boundary strip");
    ConditionReport rep2;
    rep2.functional_name = "sufficient_thm15_strip";
    rep2.arg_sup.dim = N;
    double worst = 0.0;
    if (mu2.has_densities() && mu2.kappa > 0.0) {
        const int ns = 40;
        for (int i = 0; i < ns; ++i) {
            const double sigma = 1e-4 * sqT * std::pow(1e4, double(i) / (ns - 1));
            if (sigma >= sqT) continue;
            const double rhs = rho_profile(sigma / sqT, N);
            std::array<double, 3> lo{}, hi{};
            support_box(mu2, 3.0 * sigma, lo, hi, sqT);
            hi[N - 1] = std::min(hi[N - 1], sqT);
            auto f = [&](const Point& x) {
                return orlicz_ball_average(mu2, x, sigma, params.beta, params.T, 1e-7);
            };
            SupResult r = sup_search(N, lo, hi, seed_points(mu2, sigma), f);
            const double ratio = r.value / rhs;
            if (ratio > worst) {
                worst = ratio;
                rep2.sup_value = r.value;
                rep2.rhs_shape = rhs;
                rep2.arg_sup = r.arg;
                rep2.arg_sigma = sigma;
            }
        }
    }
    rep2.ratio = worst;
    rep2.verdict_hint = worst <= cal.gamma4 ? Verdict::Pass : Verdict::Fail;
    return {rep1, rep2};
}

LifespanBracket lifespan_bracket(const MeasureSpec& mu, double p, int N,
                                 const BracketControls& controls,
                                 const CalibrationConstants& cal) {
    if (mu.N != N) throw ConfigError("dimension mismatch");
    const double pstar = critical_exponent(N);
    LifespanBracket out;
    out.T_lower = 0.0;
    bool any_pass = false;
    for (int i = 0; i < controls.points; ++i) {
        const double T = controls.T_lo *
                         std::pow(controls.T_hi / controls.T_lo,
                                  double(i) / (controls.points - 1));
        ConditionParams params;
        params.p = p;
        params.N = N;
        params.T = T;
        bool suff_pass = false;
        try {
            if (p < pstar - 1e-12) {
                suff_pass = sufficient_thm13(mu, params, cal).verdict_hint == Verdict::Pass;
            } else if (std::abs(p - pstar) <= 1e-12) {
                auto [r1, r2] = sufficient_thm15(mu, params, cal);
                suff_pass = r1.verdict_hint == Verdict::Pass &&
                            r2.verdict_hint == Verdict::Pass;
            } else {
                auto [r1, r2] = sufficient_thm14(mu, params, cal);
                suff_pass = r1.verdict_hint == Verdict::Pass &&
                            r2.verdict_hint == Verdict::Pass;
            }
        } catch (const ConfigError&) {
            suff_pass = false;  // e.g. atoms inside the boundary strip
        }
        if (suff_pass) {
            out.T_lower = T;
            any_pass = true;
        }
        ConditionReport nec = necessary_thm11(mu, params, cal);
        if (nec.ratio > cal.gamma1 && !out.has_upper) {
            out.T_upper = T;
            out.has_upper = true;
        }
    }
    (void)any_pass;
    if (out.has_upper && out.T_lower > out.T_upper) out.indeterminate = true;
    return out;
}

}  // namespace halfheat
