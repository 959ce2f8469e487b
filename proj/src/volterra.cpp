#include "halfheat/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "halfheat/fft.hpp"
#include "json.hpp"

namespace halfheat {

namespace {

constexpr double kInvSqrtPi = 0.564189583547756286948;  // 1/sqrt(pi)
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Exact moments of the Abel kernel (t-s)^{-1/2} against a linear reconstruction
// on the panel [a,b], t >= b:  ∫_a^b (t-s)^{-1/2} vhat(s) ds = wa*v(a) + wb*v(b).
struct AbelWeights {
    double wa, wb;
};

AbelWeights abel_weights(double a, double b, double t) {
    const double ta = t - a, tb = t - b;
    const double h = b - a;
    const double sa = std::sqrt(ta), sb = std::sqrt(tb);
    const double m0 = 2.0 * h / (sa + sb);  // 2(sqrt(ta)-sqrt(tb)), stable
    const double d32 = h * (ta + sa * sb + tb) / (sa + sb);  // ta^1.5 - tb^1.5
    const double m1 = ta * m0 - (2.0 / 3.0) * d32;  // ∫ (t-s)^{-1/2}(s-a) ds
    AbelWeights w;
    w.wb = m1 / h;
    w.wa = m0 - w.wb;
    return w;
}

// Smallest nonnegative root of w = K + c*w^p (c > 0, p > 1, K >= 0).
// Returns NaN when the physical branch has disappeared (blow-up inside step).
double solve_node(double K, double c, double p, double tol) {
    if (K <= 0.0) return 0.0;
    if (c <= 0.0) return K;
    const double wstar = std::pow(c * p, -1.0 / (p - 1.0));
    const double fmax = wstar * (1.0 - 1.0 / p);
    if (!(K < fmax)) return kNaN;
    double lo = 0.0, hi = wstar;
    // F(w) = w - c w^p - K;  F(lo) <= 0 <= F(hi)
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double F = mid - c * std::pow(mid, p) - K;
        (F < 0.0 ? lo : hi) = mid;
        if (hi - lo <= tol * std::max(1.0, hi)) break;
    }
    double w = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {  // Newton polish
        const double F = w - c * std::pow(w, p) - K;
        const double dF = 1.0 - c * p * std::pow(w, p - 1.0);
        if (dF <= 0.0) break;
        const double step = F / dF;
        const double wn = w - step;
        if (wn < lo || wn > hi) break;
        w = wn;
        if (std::abs(step) <= tol * std::max(1.0, w)) break;
    }
    return w;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

void SolverControls::validate() const {
    if (!(dt_min > 0.0 && dt_min <= dt0)) throw ConfigError("need 0 < dt_min <= dt0");
    if (!(w_max > 1.0)) throw ConfigError("w_max must exceed 1");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(refine_factor > 0.0 && refine_factor < 1.0))
        throw ConfigError("refine_factor must be in (0,1)");
    if (startup_nodes < 1) throw ConfigError("startup_nodes must be >= 1");
}

double boundary_forcing(const MeasureSpec& mu, double t, const double* xprime) {
    Point x;
    x.dim = mu.N;
    for (int i = 0; i + 1 < mu.N; ++i) x.c[i] = xprime ? xprime[i] : 0.0;
    x.xn() = 0.0;
    return semigroup_apply(mu, x, t);
}

std::string BoundaryTrace::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    const bool scalar = !values.empty() && values.front().size() == 1;
    os << (scalar ? "t,sup_w,w\n" : "t,sup_w\n");
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << times[i] << ',' << sup_values[i];
        if (scalar) os << ',' << values[i][0];
        os << '\n';
    }
    return os.str();
}

std::string SolveOutcome::to_json() const {
    nlohmann::json j;
    switch (status) {
        case SolveStatus::ReachedHorizon: j["status"] = "reached_horizon"; break;
        case SolveStatus::BlowUp: j["status"] = "blow_up"; break;
        case SolveStatus::InstantBlowUpEvidence:
            j["status"] = "instant_blow_up_evidence";
            break;
    }
    j["T_est"] = T_est;
    j["T_err"] = T_err;
    j["steps"] = steps;
    j["rejected_steps"] = rejected_steps;
    j["forcing_diverged"] = forcing_diverged;
    j["stop_reason"] = stop_reason;
    j["controls"] = {{"dt0", controls.dt0},
                     {"dt_min", controls.dt_min},
                     {"w_max", controls.w_max},
                     {"horizon", controls.horizon},
                     {"tol_newton", controls.tol_newton},
                     {"refine_factor", controls.refine_factor}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// scalar (N = 1) marching

namespace {

struct ScalarState {
    // node 0 is t = 0 with v mirrored from node 1 (constant first panel)
    std::vector<double> ts{0.0}, ws{0.0}, vs{0.0};
};

// known part of the node equation at time t, and coefficient on the new v
void assemble(const ScalarState& st, double t, double& K_hist, double& c) {
    const std::size_t j = st.ts.size();  // index of the new node
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < j; ++i) {
        const AbelWeights w = abel_weights(st.ts[i], st.ts[i + 1], t);
        acc += w.wa * st.vs[i] + w.wb * st.vs[i + 1];
    }
    const AbelWeights last = abel_weights(st.ts[j - 1], t, t);
    acc += last.wa * st.vs[j - 1];
    K_hist = kInvSqrtPi * acc;
    c = kInvSqrtPi * last.wb;
}

}  // namespace

SolveOutcome solve_scalar(const MeasureSpec& mu, double p,
                          const SolverControls& controls) {
    if (mu.N != 1) throw ConfigError("solve_scalar requires N = 1");
    if (!(p > 1.0)) throw ConfigError("exponent p must exceed 1");
    controls.validate();
    mu.validate();

    SolveOutcome out;
    out.controls = controls;

    ScalarState st;
    auto push = [&](double t, double w) {
        st.ts.push_back(t);
        st.ws.push_back(w);
        st.vs.push_back(std::pow(w, p));
        if (st.ts.size() == 2) {
            st.ws[0] = w;  // constant reconstruction on the first panel
            st.vs[0] = st.vs[1];
        }
    };

    // take one node at time t; returns the solved w or NaN (branch lost),
    // throws DivergenceError through from the forcing
    auto attempt = [&](double t) {
        double K_hist, c;
        assemble(st, t, K_hist, c);
        const double g = boundary_forcing(mu, t);
        return solve_node(g + K_hist, c, p, controls.tol_newton);
    };

    double dt = controls.dt0;
    const double dt_max = std::max(controls.horizon / 64.0, controls.dt0);

    // graded startup mesh inside the first dt0
    {
        const int m = controls.startup_nodes;
        double base = std::min(controls.dt0, controls.horizon);
        bool placed = false;
        while (!placed) {
            bool diverged = false;
            for (int i = 1; i <= m; ++i) {
                const double t = base * double(i) * i / (double(m) * m);
                double w;
                try {
                    w = attempt(t);
                } catch (const DivergenceError&) {
                    diverged = true;
                    break;
                }
                if (std::isnan(w)) {
                    diverged = true;
                    break;
                }
                push(t, w);
            }
            if (!diverged) {
                placed = true;
            } else {
                st = ScalarState{};
                base *= controls.refine_factor;
                if (base < controls.dt_min * m) {
                    // no solution on any startup mesh: the failure time scales
                    // with the mesh, evidence of instant blow-up
                    out.status = SolveStatus::InstantBlowUpEvidence;
                    out.stop_reason = "startup mesh collapsed without a solution";
                    out.T_est = base / controls.refine_factor;
                    out.T_err = out.T_est;
                    return out;
                }
            }
        }
        dt = base * (2.0 * m - 1.0) / (double(m) * m);  // last startup spacing
    }

    std::string reason;
    while (true) {
        if (st.ts.size() > controls.max_steps)
            throw SolverError("step budget exhausted");
        const double t_back = st.ts.back();
        const double w_back = st.ws.back();
        if (t_back >= controls.horizon * (1.0 - 1e-12)) {
            out.status = SolveStatus::ReachedHorizon;
            reason = "reached horizon";
            break;
        }
        double t_new = std::min(t_back + dt, controls.horizon);
        bool reject = false;
        bool diverged = false;
        double w_new = kNaN;
        try {
            w_new = attempt(t_new);
        } catch (const DivergenceError&) {
            diverged = true;
        }
        if (diverged || std::isnan(w_new)) {
            reject = true;
        } else if (w_back > 1e-12 &&
                   w_new > w_back * (1.0 + controls.growth_cap)) {
            reject = true;  // growth cap
        }
        if (reject && dt > controls.dt_min) {
            dt = std::max(dt * controls.refine_factor, controls.dt_min);
            ++out.rejected_steps;
            continue;
        }
        if (reject) {
            // blocked at dt_min: blow-up if the trace actually grew
            out.forcing_diverged = diverged;
            const double smax = *std::max_element(st.ws.begin() + 1, st.ws.end());
            if (smax >= 10.0 * median_of(std::vector<double>(st.ws.begin() + 1,
                                                             st.ws.end())) &&
                smax > 0.0) {
                out.status = SolveStatus::BlowUp;
                reason = diverged ? "stepping blocked by forcing divergence"
                                  : "nonlinear branch lost at minimal step";
                break;
            }
            out.status = SolveStatus::InstantBlowUpEvidence;
            reason = "stepping blocked at minimal step without growth";
            break;
        }
        push(t_new, w_new);
        if (w_new > controls.w_max && dt <= controls.dt_min * 1.01) {
            out.status = SolveStatus::BlowUp;
            reason = "w exceeded w_max at minimal step";
            break;
        }
        if (w_back <= 1e-12 || w_new <= w_back * (1.0 + 0.25 * controls.growth_cap))
            dt = std::min(dt * controls.grow_factor, dt_max);
    }

    out.steps = st.ts.size() - 1;
    out.stop_reason = reason;
    out.trace.times.assign(st.ts.begin() + 1, st.ts.end());
    out.trace.sup_values.assign(st.ws.begin() + 1, st.ws.end());
    out.trace.values.reserve(out.trace.times.size());
    for (std::size_t i = 1; i < st.ws.size(); ++i)
        out.trace.values.push_back({st.ws[i]});
    if (out.status == SolveStatus::BlowUp) {
        BlowupEstimate est = estimate_blowup_time(out.trace, p);
        out.T_est = est.T_est;
        out.T_err = est.T_err;
    } else if (out.status == SolveStatus::InstantBlowUpEvidence) {
        out.T_est = st.ts.back() + dt;
        out.T_err = out.T_est;
    } else {
        out.T_est = controls.horizon;
        out.T_err = 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// lateral-grid (N = 2,3) marching

namespace {

double lateral_extent(const MeasureSpec& mu) {
    double ext = 0.0;
    for (const auto& a : mu.atoms)
        for (int i = 0; i + 1 < mu.N; ++i) ext = std::max(ext, std::abs(a.x.c[i]));
    for (const auto& d : mu.densities) {
        switch (d.kind) {
            case DensityKind::GaussianGrowth:
            case DensityKind::ConstantStrip:
                break;  // laterally uniform
            case DensityKind::PowerLog:
                ext = std::max(ext, d.r0);
                break;
            case DensityKind::TabulatedGrid:
                for (std::size_t i = 0; i + 1 < d.grid_min.size(); ++i)
                    ext = std::max({ext, std::abs(d.grid_min[i]),
                                    std::abs(d.grid_max[i])});
                break;
            case DensityKind::BoundedDecay:
                throw ConfigError(
                    "bounded_decay has slow lateral decay; periodized grid solve "
                    "cannot meet the wrap-around budget");
        }
    }
    return ext;
}

}  // namespace

SolveOutcome solve_grid(const MeasureSpec& mu, double p,
                        const SolverControls& controls) {
    if (mu.N != 2 && mu.N != 3) throw ConfigError("solve_grid requires N in {2,3}");
    if (!(p > 1.0)) throw ConfigError("exponent p must exceed 1");
    controls.validate();
    mu.validate();
    const int dims = mu.N - 1;
    const int n = controls.grid_nodes;
    const double R = controls.box_halfwidth;
    if (n < 4 || (n & (n - 1)) != 0)
        throw ConfigError("grid_nodes must be a power of two >= 4");
    if (R < lateral_extent(mu) + 10.0 * std::sqrt(controls.horizon))
        throw ConfigError("lateral box too small: need half-width >= support + 10*sqrt(horizon)");
    const double L = 2.0 * R;
    const std::size_t total = dims == 1 ? std::size_t(n) : std::size_t(n) * n;

    SolveOutcome out;
    out.controls = controls;

    std::vector<double> lat(n);
    for (int i = 0; i < n; ++i) lat[i] = -R + L * i / n;

    auto forcing_field = [&](double t) {
        std::vector<double> g(total);
        for (std::size_t idx = 0; idx < total; ++idx) {
            double xp[2] = {lat[idx % n], dims == 2 ? lat[idx / n] : 0.0};
            g[idx] = boundary_forcing(mu, t, xp);
        }
        return g;
    };

    std::vector<double> ts{0.0};
    std::vector<std::vector<double>> vs{std::vector<double>(total, 0.0)};
    std::vector<std::vector<double>> ws_hist{std::vector<double>(total, 0.0)};
    std::vector<double> sup{0.0};

    auto vpow = [&](const std::vector<double>& w) {
        std::vector<double> v(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = std::pow(w[i], p);
        return v;
    };

    // endpoint-width smoothing: the contribution of v at node time s is
    // convolved with Gamma_{N-1}(., t-s); the implicit endpoint uses tau = 0.
    auto attempt = [&](double t, std::vector<double>& w_out) -> bool {
        const std::size_t j = ts.size();
        std::vector<double> K;
        try {
            K = forcing_field(t);
        } catch (const DivergenceError&) {
            return false;
        }
        for (std::size_t i = 0; i + 1 < j; ++i) {
            const AbelWeights aw = abel_weights(ts[i], ts[i + 1], t);
            auto ca = gaussian_convolve_periodic(vs[i], dims, n, L, t - ts[i]);
            auto cb = gaussian_convolve_periodic(vs[i + 1], dims, n, L, t - ts[i + 1]);
            for (std::size_t q = 0; q < total; ++q)
                K[q] += kInvSqrtPi * (aw.wa * ca[q] + aw.wb * cb[q]);
        }
        const AbelWeights last = abel_weights(ts[j - 1], t, t);
        auto ca = gaussian_convolve_periodic(vs[j - 1], dims, n, L, t - ts[j - 1]);
        for (std::size_t q = 0; q < total; ++q) K[q] += kInvSqrtPi * last.wa * ca[q];
        const double c = kInvSqrtPi * last.wb;
        w_out.resize(total);
        for (std::size_t q = 0; q < total; ++q) {
            const double w = solve_node(std::max(K[q], 0.0), c, p, controls.tol_newton);
            if (std::isnan(w)) return false;
            w_out[q] = w;
        }
        return true;
    };

    auto push = [&](double t, std::vector<double> w) {
        ts.push_back(t);
        sup.push_back(*std::max_element(w.begin(), w.end()));
        vs.push_back(vpow(w));
        ws_hist.push_back(std::move(w));
        if (ts.size() == 2) vs[0] = vs[1];  // constant first panel
    };

    double dt = controls.dt0;
    const double dt_max = std::max(controls.horizon / 64.0, controls.dt0);

    {
        const int m = controls.startup_nodes;
        double base = std::min(controls.dt0, controls.horizon);
        bool placed = false;
        while (!placed) {
            bool bad = false;
            for (int i = 1; i <= m; ++i) {
                const double t = base * double(i) * i / (double(m) * m);
                std::vector<double> w;
                if (!attempt(t, w)) {
                    bad = true;
                    break;
                }
                push(t, std::move(w));
            }
            if (!bad) {
                placed = true;
            } else {
                ts = {0.0};
                vs = {std::vector<double>(total, 0.0)};
                ws_hist = {std::vector<double>(total, 0.0)};
                sup = {0.0};
                base *= controls.refine_factor;
                if (base < controls.dt_min * m) {
                    out.status = SolveStatus::InstantBlowUpEvidence;
                    out.stop_reason = "startup mesh collapsed without a solution";
                    out.T_est = base / controls.refine_factor;
                    out.T_err = out.T_est;
                    return out;
                }
            }
        }
        dt = base * (2.0 * m - 1.0) / (double(m) * m);
    }

    std::string reason;
    while (true) {
        if (ts.size() > controls.max_steps) throw SolverError("step budget exhausted");
        const double t_back = ts.back();
        const double s_back = sup.back();
        if (t_back >= controls.horizon * (1.0 - 1e-12)) {
            out.status = SolveStatus::ReachedHorizon;
            reason = "reached horizon";
            break;
        }
        const double t_new = std::min(t_back + dt, controls.horizon);
        std::vector<double> w_new;
        bool ok = attempt(t_new, w_new);
        double s_new = ok ? *std::max_element(w_new.begin(), w_new.end()) : kNaN;
        bool reject = !ok || (s_back > 1e-12 &&
                              s_new > s_back * (1.0 + controls.growth_cap));
        if (reject && dt > controls.dt_min) {
            dt = std::max(dt * controls.refine_factor, controls.dt_min);
            ++out.rejected_steps;
            continue;
        }
        if (reject) {
            const double smax = *std::max_element(sup.begin() + 1, sup.end());
            if (smax >= 10.0 * median_of(std::vector<double>(sup.begin() + 1,
                                                             sup.end())) &&
                smax > 0.0) {
                out.status = SolveStatus::BlowUp;
                reason = "stepping blocked at minimal step";
                break;
            }
            out.status = SolveStatus::InstantBlowUpEvidence;
            reason = "stepping blocked at minimal step without growth";
            break;
        }
        push(t_new, std::move(w_new));
        if (sup.back() > controls.w_max && dt <= controls.dt_min * 1.01) {
            out.status = SolveStatus::BlowUp;
            reason = "sup_w exceeded w_max at minimal step";
            break;
        }
        if (s_back <= 1e-12 ||
            sup.back() <= s_back * (1.0 + 0.25 * controls.growth_cap))
            dt = std::min(dt * controls.grow_factor, dt_max);
    }

    out.steps = ts.size() - 1;
    out.stop_reason = reason;
    out.trace.times.assign(ts.begin() + 1, ts.end());
    out.trace.sup_values.assign(sup.begin() + 1, sup.end());
    out.trace.values.assign(ws_hist.begin() + 1, ws_hist.end());
    if (out.status == SolveStatus::BlowUp) {
        BlowupEstimate est = estimate_blowup_time(out.trace, p);
        out.T_est = est.T_est;
        out.T_err = est.T_err;
    } else if (out.status == SolveStatus::InstantBlowUpEvidence) {
        out.T_est = ts.back() + dt;
        out.T_err = out.T_est;
    } else {
        out.T_est = controls.horizon;
        out.T_err = 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------

double interior_eval(const SolveOutcome& outcome, const MeasureSpec& mu,
                     const Point& x, double t, double p) {
    const auto& tr = outcome.trace;
    if (tr.times.empty() || t > tr.times.back())
        throw ConfigError("interior_eval: t beyond the stored trace");
    if (t <= 0.0) throw ConfigError("interior_eval requires t > 0");

    double u = semigroup_apply(mu, x, t);
    const double xn = x.xn();

    // panels: [0, t_1] constant, then [t_i, t_{i+1}] linear; clip at s = t
    std::vector<double> nodes;
    nodes.push_back(0.0);
    for (double s : tr.times) {
        if (s >= t) break;
        nodes.push_back(s);
    }
    const std::size_t m = nodes.size();  // nodes[m-1] < t
    auto vp = [&](std::size_t trace_idx, double tau) {
        // smoothed w^p at a node; for N=1 smoothing is just the exp factor
        if (tau <= 0.0) return (xn == 0.0)
                                   ? std::pow(tr.values[trace_idx][0], p)
                                   : 0.0;
        if (mu.N == 1)
            return std::exp(-xn * xn / (4.0 * tau)) *
                   std::pow(tr.values[trace_idx][0], p);
        // N>=2: smooth the p-th power field
        const int n = outcome.controls.grid_nodes;
        const double R = outcome.controls.box_halfwidth;
        const double d = 2.0 * R / n;
        const int dims = mu.N - 1;
        double acc = 0.0;
        const auto& vals = tr.values[trace_idx];
        for (std::size_t q = 0; q < vals.size(); ++q) {
            double y0 = -R + d * double(q % n);
            double g = std::exp(-(x.c[0] - y0) * (x.c[0] - y0) / (4.0 * tau));
            if (dims == 2) {
                double y1 = -R + d * double(q / n);
                g *= std::exp(-(x.c[1] - y1) * (x.c[1] - y1) / (4.0 * tau));
            }
            acc += g * std::pow(vals[q], p);
        }
        return std::exp(-xn * xn / (4.0 * tau)) * acc *
               std::pow(4.0 * M_PI * tau, -0.5 * dims) * std::pow(d, dims);
    };

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const AbelWeights w = abel_weights(nodes[i], nodes[i + 1], t);
        const std::size_t ia = (i == 0) ? 0 : i - 1;       // trace index of v(a)
        const std::size_t ib = i;                          // trace index of v(b)
        acc += w.wa * vp(ia, t - nodes[i]) + w.wb * vp(ib, t - nodes[i + 1]);
    }
    // partial last panel [nodes[m-1], t]
    {
        const AbelWeights w = abel_weights(nodes[m - 1], t, t);
        const std::size_t ia = (m >= 2) ? m - 2 : 0;
        acc += w.wa * vp(ia, t - nodes[m - 1]);
        // the endpoint value at s = t: interpolate w between the bracketing
        // trace nodes, then take the p-th power; tau = 0 so only xn = 0 sees it
        if (xn == 0.0 && mu.N == 1) {
            // linear interpolation of w at time t
            const auto& tt = tr.times;
            auto it = std::lower_bound(tt.begin(), tt.end(), t);
            double wt;
            if (it == tt.begin()) {
                wt = tr.values[0][0];
            } else if (it == tt.end()) {
                wt = tr.values.back()[0];
            } else {
                const std::size_t hi2 = std::size_t(it - tt.begin());
                const double t1 = tt[hi2 - 1], t2 = tt[hi2];
                const double w1 = tr.values[hi2 - 1][0], w2 = tr.values[hi2][0];
                wt = w1 + (w2 - w1) * (t - t1) / (t2 - t1);
            }
            acc += w.wb * std::pow(wt, p);
        }
    }
    u += kInvSqrtPi * acc;
    return u;
}

// ---------------------------------------------------------------------------
// capped monotone Picard iterates (N = 1)

std::vector<PicardLevel> picard_minimal(const MeasureSpec& mu, double p,
                                        double horizon, int n_cap, int k_max,
                                        const SolverControls& controls) {
    if (mu.N != 1) throw ConfigError("picard_minimal requires N = 1");
    if (!(p > 1.0)) throw ConfigError("exponent p must exceed 1");
    if (n_cap < 1 || k_max < 1) throw ConfigError("invalid Picard parameters");

    // fixed mesh: graded startup inside the first dt0, then uniform dt0
    std::vector<double> ts{0.0};
    const int m = controls.startup_nodes;
    for (int i = 1; i <= m; ++i)
        ts.push_back(std::min(controls.dt0 * double(i) * i / (double(m) * m), horizon));
    while (ts.back() < horizon)
        ts.push_back(std::min(ts.back() + controls.dt0, horizon));
    const std::size_t nn = ts.size();

    std::vector<double> g(nn, 0.0);
    for (std::size_t j = 1; j < nn; ++j) g[j] = boundary_forcing(mu, ts[j]);
    g[0] = g.size() > 1 ? g[1] : 0.0;  // mirrored like the first panel

    std::vector<int> caps;
    for (int c = 1; c < n_cap; c *= 2) caps.push_back(c);
    caps.push_back(n_cap);

    std::vector<PicardLevel> levels;
    for (int cap : caps) {
        PicardLevel lev;
        lev.cap_n = cap;
        std::vector<double> u(g);  // u_{n,1} = S(t)mu at the boundary
        for (int k = 1; k <= k_max; ++k) {
            BoundaryTrace tr;
            tr.times.assign(ts.begin() + 1, ts.end());
            tr.sup_values.assign(u.begin() + 1, u.end());
            for (std::size_t j = 1; j < nn; ++j) tr.values.push_back({u[j]});
            lev.iterates.push_back(tr);
            if (k == k_max) break;
            // next iterate: explicit product integration of min(u,n)^p
            std::vector<double> v(nn);
            for (std::size_t j = 0; j < nn; ++j)
                v[j] = std::pow(std::min(u[j], double(cap)), p);
            v[0] = v.size() > 1 ? v[1] : 0.0;
            std::vector<double> un(nn, 0.0);
            un[0] = g[0];
            double delta = 0.0;
            for (std::size_t j = 1; j < nn; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 <= j - 1; ++i) {
                    const AbelWeights w = abel_weights(ts[i], ts[i + 1], ts[j]);
                    acc += w.wa * v[i] + w.wb * v[i + 1];
                }
                const AbelWeights w = abel_weights(ts[j - 1], ts[j], ts[j]);
                acc += w.wa * v[j - 1] + w.wb * v[j];
                un[j] = g[j] + kInvSqrtPi * acc;
                delta = std::max(delta, std::abs(un[j] - u[j]));
            }
            const double scale = *std::max_element(u.begin(), u.end());
            u.swap(un);
            if (delta <= 1e-12 * std::max(1.0, scale)) {
                BoundaryTrace tr2;
                tr2.times.assign(ts.begin() + 1, ts.end());
                tr2.sup_values.assign(u.begin() + 1, u.end());
                for (std::size_t j = 1; j < nn; ++j) tr2.values.push_back({u[j]});
                lev.iterates.push_back(tr2);
                break;
            }
        }
        levels.push_back(std::move(lev));
    }
    return levels;
}

// ---------------------------------------------------------------------------

BlowupEstimate estimate_blowup_time(const BoundaryTrace& trace, double p) {
    BlowupEstimate est;
    const auto& t = trace.times;
    const auto& s = trace.sup_values;
    if (t.size() < 4) return est;
    const double smax = *std::max_element(s.begin(), s.end());
    const double med = median_of(s);
    if (!(smax >= 10.0 * med) || smax <= 0.0) return est;  // not blown up

    // last decade of growth: trailing run with s >= smax/10
    std::size_t first = s.size();
    for (std::size_t i = s.size(); i-- > 0;) {
        if (s[i] < smax / 10.0) break;
        first = i;
    }
    if (s.size() - first < 3) first = s.size() >= 3 ? s.size() - 3 : 0;

    const double q = 2.0 * (p - 1.0);
    double St = 0, Sy = 0, Stt = 0, Sty = 0;
    std::size_t n = 0;
    for (std::size_t i = first; i < s.size(); ++i) {
        if (s[i] <= 0.0) continue;
        const double y = std::pow(s[i], -q);
        St += t[i];
        Sy += y;
        Stt += t[i] * t[i];
        Sty += t[i] * y;
        ++n;
    }
    est.blown_up = true;
    const double t_last = t.back();
    const double dt_last = t.size() >= 2 ? t[t.size() - 1] - t[t.size() - 2] : 0.0;
    const double det = double(n) * Stt - St * St;
    if (n < 3 || det <= 0.0) {
        est.T_est = t_last + dt_last;
        est.T_err = 4.0 * dt_last;
        return est;
    }
    const double slope = (double(n) * Sty - St * Sy) / det;   // expect < 0
    const double inter = (Sy - slope * St) / double(n);
    if (slope >= 0.0) {
        est.T_est = t_last + dt_last;
        est.T_err = 4.0 * dt_last;
        return est;
    }
    double T = -inter / slope;
    // residuals mapped into time units
    double ss = 0.0;
    for (std::size_t i = first; i < s.size(); ++i) {
        if (s[i] <= 0.0) continue;
        const double y = std::pow(s[i], -q);
        const double r = y - (inter + slope * t[i]);
        ss += r * r;
    }
    const double rms_t = std::sqrt(ss / double(n)) / (-slope);
    est.model_fit_ok = rms_t <= 0.25 * std::max(T - t[first], dt_last);
    if (T < t_last) T = t_last;
    est.T_est = T;
    est.T_err = rms_t + dt_last;
    return est;
}

// ---------------------------------------------------------------------------

std::vector<double> solve_linear_abel(const std::function<double(double)>& g,
                                      double horizon, double dt,
                                      std::vector<double>* times_out) {
    std::vector<double> ts{0.0};
    while (ts.back() < horizon - 1e-15 * horizon)
        ts.push_back(std::min(ts.back() + dt, horizon));
    const std::size_t n = ts.size();
    std::vector<double> w(n);
    w[0] = g(0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < j; ++i) {
            const AbelWeights a = abel_weights(ts[i], ts[i + 1], ts[j]);
            acc += a.wa * w[i] + a.wb * w[i + 1];
        }
        const AbelWeights last = abel_weights(ts[j - 1], ts[j], ts[j]);
        acc += last.wa * w[j - 1];
        const double c = kInvSqrtPi * last.wb;
        w[j] = (g(ts[j]) + kInvSqrtPi * acc) / (1.0 - c);
    }
    if (times_out) *times_out = ts;
    return w;
}

}  // namespace halfheat
