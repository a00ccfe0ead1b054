#include "dnkpp/dnkpp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace dnkpp;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "dnkpp_unit" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::map<std::string, std::string> read_summary(const fs::path& file) {
    std::map<std::string, std::string> out;
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Line number carried by the ConfigError of a bad config.
int error_line(const std::string& text, std::string* message = nullptr) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        if (message) *message = e.what();
        return e.line();
    }
    return -1;
}

const std::string canon_model = "[model]\nkappa_plus = 2\nkappa_minus = 1\nmortality = 1\n";

}  // namespace

TEST_CASE("defaults of a minimal config", "[cli_runner]") {
    const ScenarioConfig c = parse_config(canon_model + "[kernel.plus]\nfamily = gaussian\nsigma = 1\n");
    CHECK(c.step.dt == 1e-3);
    CHECK(c.stride == 100);
    CHECK(c.params.theta() == 1.0);
    CHECK(c.kernel_minus.family == KernelFamily::gaussian);
    CHECK(c.grid.dimension == 1);
    CHECK(c.direction == std::vector<double>{1.0});
}

TEST_CASE("config rejections carry line numbers", "[cli_runner]") {
    std::string msg;
    CHECK(error_line(canon_model + "[grid]\npoints = 1000\n", &msg) == 6);
    CHECK(msg.find("power of two") != std::string::npos);

    CHECK(error_line(canon_model + "[kernel.plus]\nfamily = exp_poly\np = 1\n", &msg) == 6);
    CHECK(msg.find("q, mu") != std::string::npos);

    CHECK(error_line(canon_model + "[integrator]\ndt = 1e-3\nstrid = 5\n", &msg) == 7);
    CHECK(msg.find("unknown key 'integrator.strid'") != std::string::npos);

    CHECK(error_line(canon_model + "[grid]\ndimension = 3\n", &msg) == 6);
    CHECK(msg.find("dimension") != std::string::npos);

    CHECK(error_line("[modle]\n") == 1);
    CHECK(error_line(canon_model + "kappa_plus = 3\n") == 5);
    CHECK(error_line(canon_model + "[kernel.plus]\nfamily = gaussian\nsigma = 1\nmu = 2\n") == 8);
    CHECK(error_line(canon_model + "[integrator]\ndt = fast\n") == 6);
    CHECK(error_line(canon_model + "[initial]\ntype = profile\n") == 6);
}

TEST_CASE("dispersion summary for the canonical Gaussian", "[cli_runner]") {
    const fs::path out = scratch("dispersion");
    ScenarioConfig c = parse_config(canon_model + "[kernel.plus]\nfamily = gaussian\nsigma = 1\n");
    std::ostringstream log;
    RunContext ctx{out, 1, 1, &log};
    CHECK(run_dispersion(c, ctx) == 0);
    const auto s = read_summary(out / "summary.txt");
    CHECK(std::stod(s.at("dispersion.lambda_star")) == Approx(0.798).margin(1e-3));
    CHECK(std::stod(s.at("dispersion.c_star")) == Approx(2.19).margin(5e-3));
    CHECK(s.at("dispersion.class") == "V");
    CHECK(s.at("dispersion.j_at_c_star") == "2");
    CHECK(s.at("command") == "dispersion");
    CHECK(s.count("assumption.A1_kappa_gt_m"));
    CHECK(s.at("status") == "pass");
    CHECK(fs::exists(out / "dispersion.csv"));
    CHECK(slurp(out / "dispersion.csv").rfind("lambda,G\n", 0) == 0);
}

TEST_CASE("verify comparison exits cleanly", "[cli_runner]") {
    const fs::path out = scratch("verify");
    std::ostringstream log;
    CHECK(run_verify("comparison", RunContext{out, 3, 2, &log}) == 0);
    CHECK(log.str().find("[PASS] comparison") != std::string::npos);
    const auto s = read_summary(out / "summary.txt");
    CHECK(s.at("verify.comparison.passed") == "true");
    CHECK(std::stod(s.at("verify.comparison.max_violation")) <= 1e-9);
    CHECK_THROWS_AS(run_verify("nonsense", RunContext{out, 3, 1, &log}), InvalidArgument);
}

TEST_CASE("wave below the minimal speed is an error", "[cli_runner]") {
    const fs::path out = scratch("wave");
    ScenarioConfig c = parse_config(canon_model + "[kernel.plus]\nfamily = gaussian\nsigma = 1\n[wave]\nspeed_factor = 0.9\n");
    std::ostringstream log;
    try {
        run_wave(c, RunContext{out, 1, 1, &log});
        FAIL("expected rejection");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("no wave below minimal speed") != std::string::npos);
    }
}

TEST_CASE("same seed gives identical files", "[cli_runner]") {
    const std::string text = canon_model +
                             "[grid]\nhalf_length = 20\npoints = 256\n"
                             "[integrator]\nhorizon = 0.5\nstride = 100\n"
                             "[initial]\ntype = bump\nwidth = 2\n";
    const ScenarioConfig c = parse_config(text);
    std::ostringstream log;
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    CHECK(run_simulate(c, RunContext{a, 7, 1, &log}) == 0);
    CHECK(run_simulate(c, RunContext{b, 7, 4, &log}) == 0);
    for (const char* f : {"snapshots.csv", "summary.txt"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "snapshots.csv").rfind("t,x1,u\n", 0) == 0);
    const auto s = read_summary(a / "summary.txt");
    CHECK(s.at("integrator.dt") == "0.001");
    CHECK(s.at("seed") == "7");
}
