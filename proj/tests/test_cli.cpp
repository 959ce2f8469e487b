#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

std::string cli_path() {
    const char* p = std::getenv("HALFHEAT_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const std::string out_path = "/tmp/halfheat_cli_test.out";
    const std::string err_path = "/tmp/halfheat_cli_test.err";
    const std::string cmd =
        cli_path() + " " + args + " >" + out_path + " 2>" + err_path;
    const int rc = std::system(cmd.c_str());
    auto slurp = [](const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    return {WEXITSTATUS(rc), slurp(out_path), slurp(err_path)};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("selftest exits cleanly") {
    RunResult r = run_cli("selftest --N 1 --samples 10");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("max_semigroup_defect") != std::string::npos);
}

TEST_CASE("solve on the empty measure reaches the horizon with a zero trace") {
    write_file("/tmp/hh_empty.json", R"({"kappa": 0, "N": 1})");
    RunResult r = run_cli(
        "solve --measure /tmp/hh_empty.json --p 1.5 --horizon 0.5 --out /tmp");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["status"] == "reached_horizon");
    std::ifstream trace("/tmp/trace.csv");
    std::string header, line;
    std::getline(trace, header);
    CHECK(header.rfind("t,sup_w", 0) == 0);
    while (std::getline(trace, line))
        CHECK(line.find(",0") != std::string::npos);
}

TEST_CASE("emitted outcome JSON re-parses") {
    write_file("/tmp/hh_strip.json",
               R"({"kappa":1,"N":1,"densities":[{"kind":"constant_strip","h":0.1,"c":1}]})");
    RunResult r = run_cli(
        "solve --measure /tmp/hh_strip.json --p 1.5 --horizon 0.2 --out /tmp");
    CHECK(r.exit_code == 0);
    std::ifstream in("/tmp/outcome.json");
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = nlohmann::json::parse(ss.str());
    CHECK(j.contains("T_est"));
    CHECK(j.contains("stop_reason"));
}

TEST_CASE("malformed measure JSON exits 2 with a location") {
    write_file("/tmp/hh_bad.json", "{\"kappa\": 1,\n  \"N\": }");
    RunResult r = run_cli("solve --measure /tmp/hh_bad.json --p 1.5");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("line") != std::string::npos);
    CHECK(r.err.find("column") != std::string::npos);
}

TEST_CASE("unknown flags exit 2 with usage text") {
    RunResult r = run_cli("solve --no-such-flag");
    CHECK(r.exit_code == 2);
}

TEST_CASE("missing measure file exits 2") {
    RunResult r = run_cli("solve --measure /tmp/does_not_exist.json --p 1.5");
    CHECK(r.exit_code == 2);
}

TEST_CASE("check emits a parseable report array") {
    write_file("/tmp/hh_strip.json",
               R"({"kappa":1,"N":1,"densities":[{"kind":"constant_strip","h":0.1,"c":1}]})");
    RunResult r = run_cli("check --measure /tmp/hh_strip.json --p 1.5 --T 1");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.is_array());
    CHECK(j.size() >= 2);
    CHECK(j[0].contains("ratio"));
}

TEST_CASE("lifespan reports a finite estimate for a boundary atom") {
    write_file("/tmp/hh_atom.json",
               R"({"kappa":1,"N":1,"atoms":[{"x":[0],"mass":1}]})");
    RunResult r = run_cli("lifespan --measure /tmp/hh_atom.json --p 1.5");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["T_est"].get<double>() > 0.0);
    CHECK_FALSE(j["instant"].get<bool>());
}

TEST_CASE("sweep emits table, fit, and svg") {
    write_file("/tmp/hh_plan.json", R"({
      "measure": {"kappa": 1, "N": 1, "atoms": [{"x": [1], "mass": 1}]},
      "p": 1.5, "N": 1, "kappa_values": [10, 100, 1000, 10000],
      "controls": {"dt0": 1e-3},
      "fit": {"kind": "log_product", "L": 1}})");
    RunResult r = run_cli("sweep --plan /tmp/hh_plan.json --out /tmp --svg");
    CHECK(r.exit_code == 0);
    auto fit = nlohmann::json::parse(r.out);
    CHECK(fit.contains("value"));
    std::ifstream csv("/tmp/sweep.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "kappa,T_est,T_err,status");
    std::ifstream svg("/tmp/sweep.svg");
    CHECK(svg.good());
}
