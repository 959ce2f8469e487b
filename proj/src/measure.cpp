#include "halfheat/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "halfheat/conditions.hpp"
#include "halfheat/quadrature.hpp"
#include "json.hpp"

namespace halfheat {

using nlohmann::json;

double DensityComponent::eval(const Point& y) const {
    const double yn = y.xn();
    if (yn < 0.0) return 0.0;
    if (yn < xn_lo || yn >= xn_hi) return 0.0;
    switch (kind) {
        case DensityKind::PowerLog: {
            const double r = y.norm();
            if (r >= r0) return 0.0;
            if (r <= 0.0) return 0.0;  // measure-zero point, profile may be singular here
            return std::pow(r, A) * std::pow(std::log(M_E + 1.0 / r), -B);
        }
        case DensityKind::GaussianGrowth:
            return std::exp(lambda * yn * yn);
        case DensityKind::BoundedDecay:
            return std::pow(1.0 + y.norm(), -A);
        case DensityKind::ConstantStrip:
            return (yn <= height) ? value : 0.0;
        case DensityKind::TabulatedGrid: {
            const int N = static_cast<int>(grid_n.size());
            double w[3], frac[3];
            int idx[3];
            for (int d = 0; d < N; ++d) {
                if (y.c[d] < grid_min[d] || y.c[d] > grid_max[d]) return 0.0;
                const double h = (grid_max[d] - grid_min[d]) / (grid_n[d] - 1);
                double u = (y.c[d] - grid_min[d]) / h;
                int i = std::min(static_cast<int>(u), grid_n[d] - 2);
                idx[d] = i;
                frac[d] = u - i;
                w[d] = frac[d];
            }
            (void)w;
            // multilinear interpolation
            double acc = 0.0;
            const int corners = 1 << N;
            for (int c = 0; c < corners; ++c) {
                double wt = 1.0;
                int flat = 0, stride = 1;
                for (int d = 0; d < N; ++d) {
                    const int bit = (c >> d) & 1;
                    wt *= bit ? frac[d] : (1.0 - frac[d]);
                    flat += (idx[d] + bit) * stride;
                    stride *= grid_n[d];
                }
                acc += wt * samples[flat];
            }
            return acc;
        }
    }
    return 0.0;
}

void DensityComponent::validate(int N) const {
    if (xn_lo < 0.0 || xn_hi <= xn_lo)
        throw ConfigError("invalid normal band restriction");
    switch (kind) {
        case DensityKind::PowerLog:
            if (r0 <= 0.0 || r0 > 1.0) throw ConfigError("power_log r0 must be in (0,1]");
            if (!(A > -N || (A == -double(N) && B > 1.0)))
                throw ConfigError("power_log profile is not locally integrable "
                                  "(need A > -N, or A = -N with B > 1)");
            break;
        case DensityKind::GaussianGrowth:
            if (lambda <= 0.0) throw ConfigError("gaussian_growth lambda must be > 0");
            break;
        case DensityKind::BoundedDecay:
            if (A <= 0.0) throw ConfigError("bounded_decay A must be > 0");
            break;
        case DensityKind::ConstantStrip:
            if (height <= 0.0 || value < 0.0) throw ConfigError("invalid constant_strip");
            break;
        case DensityKind::TabulatedGrid: {
            if (static_cast<int>(grid_n.size()) != N || grid_min.size() != grid_n.size() ||
                grid_max.size() != grid_n.size())
                throw ConfigError("tabulated_grid shape mismatch");
            std::size_t total = 1;
            for (int d = 0; d < N; ++d) {
                if (grid_n[d] < 2 || grid_max[d] <= grid_min[d])
                    throw ConfigError("tabulated_grid axis invalid");
                total *= grid_n[d];
            }
            if (samples.size() != total) throw ConfigError("tabulated_grid sample count");
            for (double s : samples)
                if (s < 0.0) throw ConfigError("tabulated_grid samples must be nonnegative");
            break;
        }
    }
}

void MeasureSpec::validate() const {
    if (N < 1 || N > 3) throw ConfigError("dimension must be 1, 2 or 3");
    if (kappa < 0.0) throw ConfigError("kappa must be nonnegative");
    for (const auto& a : atoms) {
        if (a.x.dim != N) throw ConfigError("atom dimension mismatch");
        if (a.x.xn() < 0.0) throw ConfigError("atom outside D");
        if (a.mass < 0.0) throw ConfigError("atom mass must be nonnegative");
    }
    for (const auto& d : densities) d.validate(N);
}

double MeasureSpec::density_at(const Point& y) const {
    double s = 0.0;
    for (const auto& d : densities) s += d.eval(y);
    return kappa * s;
}

bool MeasureSpec::has_atoms() const {
    for (const auto& a : atoms)
        if (a.mass > 0.0) return true;
    return false;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const char* kind_name(DensityKind k) {
    switch (k) {
        case DensityKind::PowerLog: return "power_log";
        case DensityKind::GaussianGrowth: return "gaussian_growth";
        case DensityKind::BoundedDecay: return "bounded_decay";
        case DensityKind::ConstantStrip: return "constant_strip";
        case DensityKind::TabulatedGrid: return "tabulated_grid";
    }
    return "?";
}

}  // namespace

std::string MeasureSpec::to_json() const {
    json j;
    j["kappa"] = kappa;
    j["N"] = N;
    j["atoms"] = json::array();
    for (const auto& a : atoms) {
        json ja;
        ja["x"] = std::vector<double>(a.x.c.begin(), a.x.c.begin() + N);
        ja["mass"] = a.mass;
        j["atoms"].push_back(ja);
    }
    j["densities"] = json::array();
    for (const auto& d : densities) {
        json jd;
        jd["kind"] = kind_name(d.kind);
        switch (d.kind) {
            case DensityKind::PowerLog:
                jd["A"] = d.A; jd["B"] = d.B; jd["r0"] = d.r0;
                break;
            case DensityKind::GaussianGrowth:
                jd["lambda"] = d.lambda;
                break;
            case DensityKind::BoundedDecay:
                jd["A"] = d.A;
                break;
            case DensityKind::ConstantStrip:
                jd["h"] = d.height; jd["c"] = d.value;
                break;
            case DensityKind::TabulatedGrid:
                jd["min"] = d.grid_min; jd["max"] = d.grid_max;
                jd["n"] = d.grid_n; jd["samples"] = d.samples;
                break;
        }
        if (d.band_restricted()) {
            jd["xn_range"] = json::array({d.xn_lo, std::isfinite(d.xn_hi)
                                                        ? json(d.xn_hi)
                                                        : json()});
        }
        j["densities"].push_back(jd);
    }
    return j.dump(2);
}

MeasureSpec MeasureSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed measure JSON: ") + e.what());
    }
    MeasureSpec mu;
    mu.kappa = j.at("kappa").get<double>();
    mu.N = j.at("N").get<int>();
    if (j.contains("atoms")) {
        for (const auto& ja : j["atoms"]) {
            Atom a;
            auto xs = ja.at("x").get<std::vector<double>>();
            if (static_cast<int>(xs.size()) != mu.N)
                throw ConfigError("atom coordinate count does not match N");
            a.x.dim = mu.N;
            std::copy(xs.begin(), xs.end(), a.x.c.begin());
            a.mass = ja.at("mass").get<double>();
            mu.atoms.push_back(a);
        }
    }
    if (j.contains("densities")) {
        for (const auto& jd : j["densities"]) {
            DensityComponent d;
            const std::string kind = jd.at("kind").get<std::string>();
            if (kind == "power_log") {
                d.kind = DensityKind::PowerLog;
                d.A = jd.at("A").get<double>();
                d.B = jd.at("B").get<double>();
                d.r0 = jd.value("r0", 1.0);
            } else if (kind == "gaussian_growth") {
                d.kind = DensityKind::GaussianGrowth;
                d.lambda = jd.at("lambda").get<double>();
            } else if (kind == "bounded_decay") {
                d.kind = DensityKind::BoundedDecay;
                d.A = jd.at("A").get<double>();
            } else if (kind == "constant_strip") {
                d.kind = DensityKind::ConstantStrip;
                d.height = jd.at("h").get<double>();
                d.value = jd.at("c").get<double>();
            } else if (kind == "tabulated_grid") {
                d.kind = DensityKind::TabulatedGrid;
                d.grid_min = jd.at("min").get<std::vector<double>>();
                d.grid_max = jd.at("max").get<std::vector<double>>();
                d.grid_n = jd.at("n").get<std::vector<int>>();
                d.samples = jd.at("samples").get<std::vector<double>>();
            } else {
                throw ConfigError("unknown density kind: " + kind);
            }
            if (jd.contains("xn_range")) {
                const auto& r = jd["xn_range"];
                d.xn_lo = r.at(0).get<double>();
                d.xn_hi = r.at(1).is_null() ? std::numeric_limits<double>::infinity()
                                            : r.at(1).get<double>();
            }
            mu.densities.push_back(d);
        }
    }
    mu.validate();
    return mu;
}

MeasureSpec MeasureSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open measure file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

// ---------------------------------------------------------------------------
// ball geometry

double ball_integral(int N, const Point& center, double sigma,
                     const std::function<double(const Point&)>& f,
                     double rel_tol) {
    const double cn = center.xn();
    const double lo = std::max(0.0, cn - sigma);
    const double hi = cn + sigma;
    if (hi <= lo) return 0.0;
    if (N == 1) {
        return integrate_adaptive([&](double y) { return f(Point::make1(y)); }, lo,
                                  hi, rel_tol)
            .value;
    }
    if (N == 2) {
        auto slab = [&](double yn) {
            const double dy = yn - cn;
            const double r2 = sigma * sigma - dy * dy;
            if (r2 <= 0.0) return 0.0;
            const double r = std::sqrt(r2);
            return integrate_adaptive(
                       [&](double y1) { return f(Point::make2(y1, yn)); },
                       center.c[0] - r, center.c[0] + r, rel_tol * 3.0)
                .value;
        };
        return integrate_adaptive(slab, lo, hi, rel_tol).value;
    }
    // N == 3: slice in y_N, polar in the lateral plane
    auto slab = [&](double yn) {
        const double dy = yn - cn;
        const double r2 = sigma * sigma - dy * dy;
        if (r2 <= 0.0) return 0.0;
        const double r = std::sqrt(r2);
        auto ring = [&](double rho) {
            auto ang = [&](double th) {
                return f(Point::make3(center.c[0] + rho * std::cos(th),
                                      center.c[1] + rho * std::sin(th), yn));
            };
            return rho * integrate_adaptive(ang, 0.0, 2.0 * M_PI, rel_tol * 10.0,
                                            1e-14, 600)
                             .value;
        };
        return integrate_adaptive(ring, 0.0, r, rel_tol * 3.0, 1e-14, 600).value;
    };
    return integrate_adaptive(slab, lo, hi, rel_tol, 1e-14, 600).value;
}

namespace {

double weighted_ball_integral(const MeasureSpec& mu, const BallQuery& q,
                              double lambda, double rel_tol) {
    double total = 0.0;
    const double s2 = q.sigma * q.sigma;
    for (const auto& a : mu.atoms) {
        if (a.x.dist2(q.center) < s2) {
            const double yn = a.x.xn();
            total += a.mass * std::exp(-lambda * yn * yn);
        }
    }
    if (!mu.densities.empty()) {
        auto f = [&](const Point& y) {
            double d = 0.0;
            for (const auto& c : mu.densities) d += c.eval(y);
            if (lambda != 0.0) {
                const double yn = y.xn();
                d *= std::exp(-lambda * yn * yn);
            }
            return d;
        };
        total += ball_integral(mu.N, q.center, q.sigma, f, rel_tol);
    }
    return mu.kappa * total;
}

}  // namespace

double ball_mass(const MeasureSpec& mu, const BallQuery& q, double rel_tol) {
    if (q.sigma <= 0.0) throw ConfigError("ball radius must be positive");
    return weighted_ball_integral(mu, q, 0.0, rel_tol);
}

double weighted_ball_average(const MeasureSpec& mu, const BallQuery& q,
                             double rel_tol) {
    if (q.sigma <= 0.0) throw ConfigError("ball radius must be positive");
    return weighted_ball_integral(mu, q, q.lambda, rel_tol) /
           ball_volume(mu.N, q.sigma);
}

double orlicz_ball_average(const MeasureSpec& mu2, const Point& center,
                           double sigma, double beta, double T, double rel_tol) {
    if (mu2.has_atoms())
        throw ConfigError("orlicz_ball_average requires a density-only measure");
    if (sigma <= 0.0) throw ConfigError("ball radius must be positive");
    const double p = critical_exponent(mu2.N);
    const double c_T = std::pow(T, 1.0 / (2.0 * (p - 1.0)));
    auto f = [&](const Point& y) { return phi_beta(c_T * mu2.density_at(y), beta); };
    const double avg =
        ball_integral(mu2.N, center, sigma, f, rel_tol) / ball_volume(mu2.N, sigma);
    return phi_beta_inv(avg, beta);
}

double lp_ball_average(const MeasureSpec& mu2, const Point& center, double sigma,
                       double alpha, double rel_tol) {
    if (mu2.has_atoms())
        throw ConfigError("lp_ball_average requires a density-only measure");
    if (sigma <= 0.0) throw ConfigError("ball radius must be positive");
    auto f = [&](const Point& y) { return std::pow(mu2.density_at(y), alpha); };
    const double avg =
        ball_integral(mu2.N, center, sigma, f, rel_tol) / ball_volume(mu2.N, sigma);
    return std::pow(avg, 1.0 / alpha);
}

MeasureSpec scale(const MeasureSpec& mu, double factor) {
    if (factor < 0.0) throw ConfigError("scale factor must be nonnegative");
    MeasureSpec out = mu;
    out.kappa *= factor;
    return out;
}

std::pair<MeasureSpec, MeasureSpec> split_strip(const MeasureSpec& mu, double T) {
    if (T <= 0.0) throw ConfigError("split level T must be positive");
    const double thresh = std::sqrt(T);
    MeasureSpec upper = mu, lower = mu;
    upper.atoms.clear();
    lower.atoms.clear();
    upper.densities.clear();
    lower.densities.clear();
    for (const auto& a : mu.atoms) {
        // interface atoms go to the closed upper set
        (a.x.xn() >= thresh ? upper : lower).atoms.push_back(a);
    }
    for (const auto& d : mu.densities) {
        DensityComponent up = d, lowc = d;
        up.xn_lo = std::max(d.xn_lo, thresh);
        lowc.xn_hi = std::min(d.xn_hi, thresh);
        if (up.xn_hi > up.xn_lo) upper.densities.push_back(up);
        if (lowc.xn_hi > lowc.xn_lo) lower.densities.push_back(lowc);
    }
    return {upper, lower};
}

}  // namespace halfheat
