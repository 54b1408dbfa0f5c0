// kdvlab: command-line driver for the generalized KdV laboratory.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "kdvlab/cli.hpp"

namespace {

struct GlobalOptions {
    std::string config;
    std::string out = "out";
    long long seed = -1;  // -1: take the seed from the config
    bool verbose = false;
};

int run(const std::string& command, const GlobalOptions& g)
{
    const bool strict_nl = command != "validate-nl";
    kdv::ExperimentConfig cfg;
    try {
        if (!g.config.empty()) cfg = kdv::load_config(g.config, strict_nl);
        if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
        if (cfg.scenario_given && command != "validate-nl" && command != kdv::scenario_name(cfg.scenario))
            throw kdv::SchemaError(std::string("config scenario '") + kdv::scenario_name(cfg.scenario) +
                                   "' does not match command '" + command + "'");
    } catch (const kdv::SchemaError& e) {
        std::cerr << "kdvlab: schema error: " << e.what() << '\n';
        return kdv::exit_schema;
    }

    kdv::RunContext ctx(g.out, g.verbose);
    kdv::RunReport rep;
    int status = kdv::exit_ok;
    std::string error;
    try {
        kdv::run_scenario(command, cfg, ctx, rep);
    } catch (const std::exception& e) {
        status = kdv::exit_code_for(e);
        error = e.what();
        const char* kind = status == kdv::exit_regime ? "regime failure" :
                           status == kdv::exit_schema ? "invalid input" : "numerical failure";
        std::cerr << "kdvlab: " << kind << ": " << e.what() << '\n';
    }
    for (const auto& w : rep.warnings) std::cerr << "kdvlab: warning: " << w << '\n';
    kdv::write_manifest(ctx, cfg, rep, g.config, status, error);
    if (g.verbose)
        for (const auto& [k, v] : rep.summary) std::cerr << "  " << k << " = " << v << '\n';
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical laboratory for generalized KdV equations with small dispersion"};
    app.set_version_flag("--version", kdv::version_string);
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory for CSV files and manifest.json");
    app.add_option("--seed", g.seed, "seed for randomized property suites (overrides run.seed)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose", g.verbose, "progress and timings on stderr");

    const std::pair<const char*, const char*> commands[] = {
        {"validate-nl", "check admissibility of the nonlinearity and tabulate g, g', g2"},
        {"profile", "solitary-wave profiles and moments"},
        {"collide", "two-soliton interaction model: sigma dynamics, corrections, phase shifts"},
        {"simulate", "pseudo-spectral PDE run from superposed solitons"},
        {"perturb", "perturbed one-phase dynamics, long-wave tail and critical time"},
        {"validate", "moment identities, weak residual orders and balance-law drifts"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kdv::exit_usage;
    }
    for (const auto* sub : app.get_subcommands())
        return run(sub->get_name(), g);
    return kdv::exit_usage;
}
