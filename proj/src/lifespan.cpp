#include "halfheat/lifespan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace halfheat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SweepPlan::validate() const {
    base_measure.validate();
    if (N != base_measure.N) throw ConfigError("sweep plan dimension mismatch");
    if (!(p > 1.0)) throw ConfigError("p must exceed 1");
    if (kappa_values.empty()) return;  // empty sweep is allowed (empty table)
    double prev = 0.0;
    for (double k : kappa_values) {
        if (!(k > prev)) throw ConfigError("kappa values must be positive and increasing");
        prev = k;
    }
    controls.validate();
    if (!(horizon_cap > 0.0)) throw ConfigError("horizon cap must be positive");
}

std::string SweepPlan::to_json() const {
    nlohmann::json j;
    j["measure"] = nlohmann::json::parse(base_measure.to_json());
    j["p"] = p;
    j["N"] = N;
    j["kappa_values"] = kappa_values;
    j["horizon_cap"] = horizon_cap;
    nlohmann::json c;
    c["dt0"] = controls.dt0;
    c["dt_min"] = controls.dt_min;
    c["w_max"] = controls.w_max;
    c["horizon"] = controls.horizon;
    j["controls"] = c;
    return j.dump(2);
}

SweepPlan SweepPlan::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed sweep plan JSON: ") + e.what());
    }
    SweepPlan plan;
    plan.base_measure = MeasureSpec::from_json(j.at("measure").dump());
    plan.p = j.at("p").get<double>();
    plan.N = j.value("N", plan.base_measure.N);
    plan.kappa_values = j.at("kappa_values").get<std::vector<double>>();
    plan.horizon_cap = j.value("horizon_cap", 1e4);
    if (j.contains("controls")) {
        const auto& c = j["controls"];
        plan.controls.dt0 = c.value("dt0", plan.controls.dt0);
        plan.controls.dt_min = c.value("dt_min", plan.controls.dt_min);
        plan.controls.w_max = c.value("w_max", plan.controls.w_max);
        plan.controls.horizon = c.value("horizon", plan.controls.horizon);
        plan.controls.box_halfwidth = c.value("box_halfwidth", plan.controls.box_halfwidth);
        plan.controls.grid_nodes = c.value("grid_nodes", plan.controls.grid_nodes);
    }
    plan.validate();
    return plan;
}

SweepPlan SweepPlan::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep plan: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string LifespanResult::to_json() const {
    nlohmann::json j;
    j["T_est"] = T_est;
    j["T_err"] = std::isfinite(T_err) ? T_err : -1.0;
    j["infinite"] = infinite;
    j["instant"] = instant;
    j["refinement_trend"] = refinement_trend;
    if (!error.empty()) j["error"] = error;
    return j.dump(2);
}

namespace {

SolveOutcome run_solver(const MeasureSpec& mu, double p, const SolverControls& c) {
    return mu.N == 1 ? solve_scalar(mu, p, c) : solve_grid(mu, p, c);
}

}  // namespace

LifespanResult lifespan(const MeasureSpec& mu, double p,
                        const SolverControls& controls, double horizon_cap) {
    LifespanResult res;
    if (mu.empty()) {
        res.infinite = true;
        res.T_est = horizon_cap;
        res.T_err = kInf;
        return res;
    }
    try {
        SolverControls c = controls;
        SolveOutcome base;
        bool blew_up = false;
        while (c.horizon <= horizon_cap) {
            base = run_solver(mu, p, c);
            if (base.status != SolveStatus::ReachedHorizon) {
                blew_up = true;
                break;
            }
            c.horizon *= 2.0;
        }
        if (!blew_up) {
            res.infinite = true;
            res.T_est = horizon_cap;
            res.T_err = kInf;
            return res;
        }
        // mesh refinement: separate a finite life span (estimate stabilizes)
        // from instant blow-up (estimate keeps collapsing)
        res.refinement_trend.push_back(base.T_est);
        double t_err = base.T_err;
        for (int level = 1; level <= 2; ++level) {
            SolverControls cf = c;
            cf.dt0 = c.dt0 * std::pow(0.5, level);
            cf.dt_min = c.dt_min * std::pow(0.5, level);
            SolveOutcome fine = run_solver(mu, p, cf);
            if (fine.status == SolveStatus::ReachedHorizon) {
                // refined run survived the horizon: keep coarse estimate but
                // widen the error bar to the horizon
                res.refinement_trend.push_back(c.horizon);
                break;
            }
            res.refinement_trend.push_back(fine.T_est);
            t_err = fine.T_err;
        }
        const auto& tr = res.refinement_trend;
        bool collapsing = tr.size() >= 3;
        for (std::size_t i = 0; i + 1 < tr.size() && collapsing; ++i)
            collapsing = tr[i + 1] <= 0.6 * tr[i];
        if (collapsing) {
            res.instant = true;
            res.T_est = 0.0;
            res.T_err = tr.back();
        } else {
            res.T_est = tr.back();
            double spread = 0.0;
            if (tr.size() >= 2) spread = std::abs(tr[tr.size() - 1] - tr[tr.size() - 2]);
            res.T_err = std::max(t_err, spread);
        }
    } catch (const std::exception& e) {
        res.error = e.what();
        res.T_err = kInf;
    }
    return res;
}

std::vector<SweepRow> sweep(const SweepPlan& plan, int workers) {
    plan.validate();
    std::vector<SweepRow> rows(plan.kappa_values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            const double kappa = plan.kappa_values[i];
            MeasureSpec mu = plan.base_measure;
            mu.kappa = kappa;
            LifespanResult r = lifespan(mu, plan.p, plan.controls, plan.horizon_cap);
            SweepRow& row = rows[i];
            row.kappa = kappa;
            row.T_est = r.T_est;
            row.T_err = r.T_err;
            if (!r.error.empty()) {
                row.status = "error:" + r.error;
            } else if (r.infinite) {
                row.status = "horizon";
            } else if (r.instant) {
                row.status = "instant";
            } else {
                row.status = "blow_up";
                row.usable = true;
            }
        }
    };
    const int nw = std::max(1, std::min<int>(workers, int(rows.size())));
    if (nw == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "kappa,T_est,T_err,status\n";
    for (const auto& r : rows)
        out << r.kappa << ',' << r.T_est << ',' << r.T_err << ',' << r.status << '\n';
    return out.str();
}

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["value"] = value;
    j["intercept"] = intercept;
    j["residual"] = residual;
    j["rows_used"] = rows_used;
    j["ok"] = ok;
    if (ceiling_violated) j["ceiling_violated"] = true;
    return j.dump(2);
}

namespace {

bool row_fittable(const SweepRow& r) {
    return r.usable && r.T_est > 0.0 && std::isfinite(r.T_est) &&
           std::isfinite(r.T_err) && r.T_err / r.T_est < 0.2;
}

// least squares y = a + b x; returns (a, b, rms residual)
struct LineFit {
    double a = 0.0, b = 0.0, rms = 0.0;
    int n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.n = int(x.size());
    if (f.n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = f.n * sxx - sx * sx;
    f.b = (f.n * sxy - sx * sy) / det;
    f.a = (sy - f.b * sx) / f.n;
    double ss = 0;
    for (int i = 0; i < f.n; ++i) {
        const double r = y[i] - (f.a + f.b * x[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / f.n);
    return f;
}

}  // namespace

FitResult fit_interior_delta_law(const std::vector<SweepRow>& rows, double L) {
    FitResult out;
    out.kind = "log_product";
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (!row_fittable(r) || r.kappa <= 1.0) continue;
        const double lk = std::log(r.kappa);
        x.push_back(1.0 / lk);
        y.push_back(lk * r.T_est);
    }
    LineFit f = fit_line(x, y);
    out.rows_used = f.n;
    out.value = f.a;  // limit as log(kappa) -> infinity
    out.intercept = f.b;
    out.residual = f.rms;
    out.ok = f.n >= 4;
    (void)L;
    return out;
}

FitResult fit_power_law(const std::vector<SweepRow>& rows, double log_correction) {
    FitResult out;
    out.kind = "power_law";
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (!row_fittable(r)) continue;
        if (log_correction != 0.0 && r.kappa <= M_E) continue;
        double t = r.T_est;
        if (log_correction != 0.0)
            t /= std::pow(std::log(r.kappa), log_correction);
        x.push_back(std::log(r.kappa));
        y.push_back(std::log(t));
    }
    LineFit f = fit_line(x, y);
    out.rows_used = f.n;
    out.value = f.b;  // the exponent
    out.intercept = f.a;
    out.residual = f.rms;
    out.ok = f.n >= 4;
    return out;
}

FitResult fit_gaussian_limit(const std::vector<SweepRow>& rows, double lambda) {
    FitResult out;
    out.kind = "constant_limit";
    std::vector<SweepRow> good;
    for (const auto& r : rows)
        if (row_fittable(r)) good.push_back(r);
    std::sort(good.begin(), good.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.kappa < b.kappa; });
    const double ceiling = 1.0 / (4.0 * lambda);
    for (const auto& r : good)
        if (r.T_est > ceiling * 1.02) out.ceiling_violated = true;
    const std::size_t half = std::max<std::size_t>(2, (good.size() + 1) / 2);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < good.size() && i < half; ++i) {
        x.push_back(good[i].kappa);
        y.push_back(good[i].T_est);
    }
    LineFit f = fit_line(x, y);
    out.rows_used = f.n;
    out.value = f.a;  // extrapolated T at kappa = 0
    out.intercept = f.b;
    out.residual = f.rms;
    out.ok = f.n >= 2 && good.size() >= 4;
    return out;
}

std::vector<DichotomyRow> dichotomy_boundary_delta(const std::vector<double>& p_values,
                                                   int N, const SolverControls& controls) {
    std::vector<DichotomyRow> out;
    for (double p : p_values) {
        MeasureSpec mu;
        mu.N = N;
        mu.kappa = 1.0;
        Atom a;
        a.x.dim = N;
        a.mass = 1.0;
        mu.atoms.push_back(a);
        LifespanResult r = lifespan(mu, p, controls, 1e4);
        DichotomyRow row;
        row.p = p;
        row.refinement_trend = r.refinement_trend;
        if (!r.error.empty()) {
            row.verdict = DichotomyVerdict::Indeterminate;
        } else if (r.infinite) {
            row.verdict = DichotomyVerdict::Solvable;
        } else if (r.instant) {
            row.verdict = DichotomyVerdict::InstantBlowUp;
        } else {
            const auto& tr = r.refinement_trend;
            const bool stable =
                tr.size() >= 2 && tr.back() >= 0.8 * tr[tr.size() - 2];
            row.verdict = stable ? DichotomyVerdict::Solvable
                                 : DichotomyVerdict::Indeterminate;
        }
        out.push_back(row);
    }
    return out;
}

std::string sweep_to_svg(const std::vector<SweepRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.usable && r.kappa > 0.0 && r.T_est > 0.0)
            pts.emplace_back(std::log10(r.kappa), std::log10(r.T_est));
    const int W = 640, H = 420, M = 50;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M
        << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\""
        << H - M << "\" stroke=\"black\"/>\n";
    if (pts.size() >= 2) {
        double xlo = pts[0].first, xhi = pts[0].first;
        double ylo = pts[0].second, yhi = pts[0].second;
        for (const auto& p : pts) {
            xlo = std::min(xlo, p.first);
            xhi = std::max(xhi, p.first);
            ylo = std::min(ylo, p.second);
            yhi = std::max(yhi, p.second);
        }
        if (xhi == xlo) xhi = xlo + 1.0;
        if (yhi == ylo) yhi = ylo + 1.0;
        svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : pts) {
            const double px = M + (p.first - xlo) / (xhi - xlo) * (W - 2 * M);
            const double py = H - M - (p.second - ylo) / (yhi - ylo) * (H - 2 * M);
            svg << px << ',' << py << ' ';
        }
        svg << "\"/>\n";
    }
    svg << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" font-size=\"12\" text-anchor=\"middle\">log10 kappa</text>\n";
    svg << "<text x=\"14\" y=\"" << H / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << H / 2 << ")\">log10 T</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace halfheat
