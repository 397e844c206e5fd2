// qform — quantized-consensus formation control: simulation, analysis and
// perception-contract fitting from the command line.

#include "qform/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"quantized-consensus formation control toolkit"};
    app.fallthrough();  // global flags may follow the subcommand
    app.require_subcommand(1);

    std::string config_path;
    qform::harness::Options opt;
    std::uint64_t seed_flag = 0;
    int runs_flag = 0;

    app.add_option("--config", config_path, "run configuration (JSON)")->required();
    auto* seed_opt = app.add_option("--seed", seed_flag, "override run.seed");
    auto* runs_opt = app.add_option("--runs", runs_flag, "override run.n_runs");
    app.add_option("--out", opt.out_dir, "directory for output files")->capture_default_str();
    app.add_flag("--quiet", opt.quiet, "suppress non-essential output");

    auto* simulate = app.add_subcommand("simulate", "run seeded formation simulations, write traces + summary");
    auto* bound = app.add_subcommand("bound", "print the expected-convergence-time bound and its spreads");
    auto* check_init = app.add_subcommand("check-init", "report membership of formation.initial in the start sets");
    auto* sample = app.add_subcommand("sample-perception", "draw synthetic (true, perceived) sample pairs");
    auto* fit = app.add_subcommand("fit", "fit quantizer parameters from a sample CSV");
    auto* verify = app.add_subcommand("verify", "run the lockstep and contract-invariance equivalence suites");

    std::string samples_path;
    std::vector<double> p_list;
    fit->add_option("--samples", samples_path, "sample CSV (default: output.samples_path)");
    fit->add_option("--p", p_list, "percentiles to fit (default: 0.99 0.9)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : qform::harness::kConfigError;
    }

    if (*seed_opt) opt.seed = seed_flag;
    if (*runs_opt) opt.runs = runs_flag;

    try {
        const qform::RunConfig cfg = qform::load_run_config(config_path);
        if (*simulate) return qform::harness::cmd_simulate(cfg, opt, std::cout, std::cerr);
        if (*bound) return qform::harness::cmd_bound(cfg, opt, std::cout, std::cerr);
        if (*check_init) return qform::harness::cmd_check_init(cfg, opt, std::cout, std::cerr);
        if (*sample) return qform::harness::cmd_sample_perception(cfg, opt, std::cout, std::cerr);
        if (*fit)
            return qform::harness::cmd_fit(cfg, opt,
                                           samples_path.empty() ? std::nullopt
                                                                : std::optional<std::string>(samples_path),
                                           p_list, std::cout, std::cerr);
        if (*verify) return qform::harness::cmd_verify(cfg, opt, std::cout, std::cerr);
    } catch (const qform::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return qform::harness::kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qform::harness::kFailure;
    }
    return qform::harness::kConfigError;
}
