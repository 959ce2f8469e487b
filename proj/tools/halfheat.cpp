#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "halfheat/conditions.hpp"
#include "halfheat/kernels.hpp"
#include "halfheat/lifespan.hpp"
#include "halfheat/measure.hpp"
#include "halfheat/volterra.hpp"

using namespace halfheat;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// parse with a line/column diagnostic on failure
nlohmann::json parse_checked(const std::string& text, const std::string& label) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << "malformed JSON in " << label << " at line " << line << ", column "
            << col << ": " << e.what();
        throw ConfigError(msg.str());
    }
}

MeasureSpec load_measure(const std::string& path) {
    const std::string text = read_file(path);
    parse_checked(text, path);
    return MeasureSpec::from_json(text);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

struct SolverFlags {
    double horizon = 1.0;
    double dt0 = 1e-3;
    double dt_min = 1e-9;
    double w_max = 1e8;
    double box_halfwidth = 0.0;
    int grid_nodes = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--horizon", horizon, "time horizon");
        cmd->add_option("--dt0", dt0, "initial time step");
        cmd->add_option("--dt-min", dt_min, "smallest time step");
        cmd->add_option("--w-max", w_max, "blow-up threshold");
        cmd->add_option("--box-halfwidth", box_halfwidth, "lateral box half-width (N>=2)");
        cmd->add_option("--grid-nodes", grid_nodes, "lateral grid nodes (N>=2)");
    }
    SolverControls to_controls() const {
        SolverControls c;
        c.horizon = horizon;
        c.dt0 = dt0;
        c.dt_min = dt_min;
        c.w_max = w_max;
        c.box_halfwidth = box_halfwidth;
        c.grid_nodes = grid_nodes;
        return c;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"half-space heat equation with nonlinear boundary flux"};
    app.require_subcommand(1);
    std::cout.precision(17);

    // selftest
    auto* selftest = app.add_subcommand("selftest", "kernel identity checks");
    int st_N = 0;
    unsigned st_seed = 12345;
    int st_samples = 100;
    selftest->add_option("--N", st_N, "dimension (default: all of 1,2,3)");
    selftest->add_option("--seed", st_seed, "random seed");
    selftest->add_option("--samples", st_samples, "sample count");

    // solve
    auto* solve = app.add_subcommand("solve", "boundary trace solve");
    std::string sv_measure, sv_out = ".";
    double sv_p = 1.5;
    SolverFlags sv_flags;
    solve->add_option("--measure", sv_measure, "measure JSON path")->required();
    solve->add_option("--p", sv_p, "nonlinearity exponent");
    solve->add_option("--out", sv_out, "output directory");
    sv_flags.attach(solve);

    // lifespan
    auto* life = app.add_subcommand("lifespan", "blow-up time estimate");
    std::string lf_measure;
    double lf_p = 1.5, lf_cap = 1e4;
    SolverFlags lf_flags;
    life->add_option("--measure", lf_measure, "measure JSON path")->required();
    life->add_option("--p", lf_p, "nonlinearity exponent");
    life->add_option("--horizon-cap", lf_cap, "horizon doubling cap");
    lf_flags.attach(life);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "kappa sweep and law fit");
    std::string sw_plan, sw_out = ".";
    int sw_workers = 1;
    bool sw_svg = false;
    sweep_cmd->add_option("--plan", sw_plan, "sweep plan JSON path")->required();
    sweep_cmd->add_option("--out", sw_out, "output directory");
    sweep_cmd->add_option("--workers", sw_workers, "worker budget");
    sweep_cmd->add_flag("--svg", sw_svg, "emit SVG plot");

    // check
    auto* check = app.add_subcommand("check", "solvability condition report");
    std::string ck_measure, ck_cal;
    ConditionParams ck_params;
    check->add_option("--measure", ck_measure, "measure JSON path")->required();
    check->add_option("--p", ck_params.p, "nonlinearity exponent");
    check->add_option("--T", ck_params.T, "candidate time");
    check->add_option("--N", ck_params.N, "dimension");
    check->add_option("--delta", ck_params.delta, "slack parameter");
    check->add_option("--alpha", ck_params.alpha, "Jensen exponent");
    check->add_option("--beta", ck_params.beta, "Orlicz exponent");
    check->add_option("--calibration", ck_cal, "calibration JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (selftest->parsed()) {
            std::vector<int> dims = st_N != 0 ? std::vector<int>{st_N}
                                              : std::vector<int>{1, 2, 3};
            bool ok = true;
            for (int N : dims) {
                SelftestReport rep = semigroup_selftest(N, st_seed, st_samples);
                std::cout << "N=" << N << " " << rep.to_json() << "\n";
                ok = ok && rep.max_semigroup_defect < 1e-6 &&
                     rep.max_mass_defect < 1e-8 && rep.max_bound_violation <= 0.0;
            }
            if (!ok) {
                std::cerr << "selftest defects exceed tolerance\n";
                return 3;
            }
            return 0;
        }
        if (solve->parsed()) {
            MeasureSpec mu = load_measure(sv_measure);
            SolverControls c = sv_flags.to_controls();
            SolveOutcome out = mu.N == 1 ? solve_scalar(mu, sv_p, c)
                                         : solve_grid(mu, sv_p, c);
            write_file(sv_out + "/trace.csv", out.trace.to_csv());
            write_file(sv_out + "/outcome.json", out.to_json());
            std::cout << out.to_json() << "\n";
            return 0;
        }
        if (life->parsed()) {
            MeasureSpec mu = load_measure(lf_measure);
            LifespanResult r = lifespan(mu, lf_p, lf_flags.to_controls(), lf_cap);
            std::cout << r.to_json() << "\n";
            if (!r.error.empty()) return 3;
            return 0;
        }
        if (sweep_cmd->parsed()) {
            const std::string text = read_file(sw_plan);
            nlohmann::json j = parse_checked(text, sw_plan);
            SweepPlan plan = SweepPlan::from_json(text);
            auto rows = sweep(plan, sw_workers);
            write_file(sw_out + "/sweep.csv", sweep_to_csv(rows));
            if (j.contains("fit")) {
                const auto& fj = j["fit"];
                const std::string kind = fj.at("kind").get<std::string>();
                FitResult fit;
                if (kind == "log_product") {
                    fit = fit_interior_delta_law(rows, fj.value("L", 1.0));
                } else if (kind == "power_law") {
                    fit = fit_power_law(rows, fj.value("log_correction", 0.0));
                } else if (kind == "constant_limit") {
                    fit = fit_gaussian_limit(rows, fj.at("lambda").get<double>());
                } else {
                    throw ConfigError("unknown fit kind: " + kind);
                }
                write_file(sw_out + "/fit.json", fit.to_json());
                std::cout << fit.to_json() << "\n";
            } else {
                std::cout << sweep_to_csv(rows);
            }
            if (sw_svg) write_file(sw_out + "/sweep.svg", sweep_to_svg(rows));
            return 0;
        }
        if (check->parsed()) {
            MeasureSpec mu = load_measure(ck_measure);
            ck_params.N = mu.N;
            CalibrationConstants cal = ck_cal.empty()
                                           ? CalibrationConstants::defaults()
                                           : CalibrationConstants::load(ck_cal);
            const double pstar = critical_exponent(mu.N);
            std::vector<std::string> reports;
            reports.push_back(necessary_thm11(mu, ck_params, cal).to_json());
            try {
                if (ck_params.p < pstar - 1e-12) {
                    reports.push_back(sufficient_thm13(mu, ck_params, cal).to_json());
                } else if (std::abs(ck_params.p - pstar) <= 1e-12) {
                    auto [r1, r2] = sufficient_thm15(mu, ck_params, cal);
                    reports.push_back(r1.to_json());
                    reports.push_back(r2.to_json());
                } else {
                    auto [r1, r2] = sufficient_thm14(mu, ck_params, cal);
                    reports.push_back(r1.to_json());
                    reports.push_back(r2.to_json());
                }
            } catch (const ConfigError& e) {
                nlohmann::json skip;
                skip["functional"] = "sufficient";
                skip["skipped"] = e.what();
                reports.push_back(skip.dump(2));
            }
            std::cout << "[\n";
            for (std::size_t i = 0; i < reports.size(); ++i)
                std::cout << reports[i] << (i + 1 < reports.size() ? ",\n" : "\n");
            std::cout << "]\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "solver error (divergent integral): " << e.what() << "\n";
        return 3;
    } catch (const AccuracyError& e) {
        std::cerr << "solver error (accuracy): " << e.what() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
