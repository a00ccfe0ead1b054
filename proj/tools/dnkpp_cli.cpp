// dnkpp: command line front end for the doubly nonlocal Fisher-KPP lab.
//
//   dnkpp simulate   --config FILE [--out DIR] [--seed N] [--threads N]
//   dnkpp dispersion --config FILE ...
//   dnkpp wave       --config FILE ...
//   dnkpp front      --config FILE ...
//   dnkpp verify SUITE [--out DIR] [--seed N] [--threads N]
//
// Exit status: 0 all checks passed, 1 a check failed, 2 usage or runtime error.

#include "dnkpp/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c, bool need_config) {
    auto* opt = app->add_option("--config", c.config, "scenario file (sectioned key = value)");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory (overrides [output] directory)");
    app->add_option("--seed", c.seed, "random seed (overrides [output] seed)");
    app->add_option("--threads", c.threads, "worker threads; results do not depend on it")->check(CLI::Range(1u, 1024u));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"doubly nonlocal Fisher-KPP numerical lab"};
    app.require_subcommand(1);

    Common common;
    std::string suite;
    auto* sim = app.add_subcommand("simulate", "integrate the equation and write snapshots");
    auto* disp = app.add_subcommand("dispersion", "minimal speed from the dispersion relation");
    auto* wave = app.add_subcommand("wave", "traveling wave profile at a given speed");
    auto* front = app.add_subcommand("front", "track a level set and estimate its speed");
    auto* verify = app.add_subcommand("verify", "run a named verification suite");
    for (auto* s : {sim, disp, wave, front}) add_common(s, common, true);
    add_common(verify, common, false);
    verify->add_option("suite", suite, "suite name or 'all'")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        dnkpp::RunContext ctx;
        ctx.threads = common.threads;
        if (verify->parsed()) {
            ctx.seed = common.seed.value_or(1);
            ctx.out_dir = common.out.empty() ? "out/verify" : common.out;
            return dnkpp::run_verify(suite, ctx);
        }
        dnkpp::ScenarioConfig cfg = dnkpp::load_config(common.config);
        if (common.seed) cfg.seed = *common.seed;
        if (!common.out.empty()) cfg.output_dir = common.out;
        ctx.seed = cfg.seed;
        ctx.out_dir = cfg.output_dir;
        if (sim->parsed()) return dnkpp::run_simulate(cfg, ctx);
        if (disp->parsed()) return dnkpp::run_dispersion(cfg, ctx);
        if (wave->parsed()) return dnkpp::run_wave(cfg, ctx);
        if (front->parsed()) return dnkpp::run_front(cfg, ctx);
    } catch (const dnkpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
