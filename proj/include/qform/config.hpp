#pragma once

#include "qform/analysis.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qform {

// A problem with the run configuration (malformed file, violated invariant).
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// On-disk run description (versioned JSON). See README for the schema.
struct RunConfig {
    int schema_version = 1;

    // formation
    int n_agents = 0;
    std::vector<PolarVec> targets;                   // possibly off-grid; snapped at build time
    std::optional<std::vector<PolarVec>> initial;    // fixed initial state, if given
    double d_min = 1.0, d_max = 16.0;

    // quantizer
    double a = 2.0;
    int M = 8;
    double omega = 0.618;
    formation::AngularLift lift = formation::AngularLift::Canonical;

    // graph
    std::string topology = "chain";
    std::vector<std::pair<int, int>> edges;  // 0-based (1-based in the file)

    // perception
    std::string perception_kind = "exact";
    std::string perception_params_json = "{}";

    // run
    std::uint64_t seed = 1;
    std::int64_t max_steps = 1'000'000;
    int n_runs = 1;

    // output
    std::string trace_path = "trace.csv";
    std::string summary_path = "summary.json";
    std::string samples_path = "samples.csv";
    std::string fit_path = "fit.csv";
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Cross-validates the config and assembles the runnable scenario. Off-grid
// targets are snapped with a warning on `warn`; violated invariants throw
// ConfigError naming the condition.
analysis::Scenario build_scenario(const RunConfig& cfg, std::ostream* warn = nullptr);

// Perception scenario list for `sample-perception`: the base pinhole setup
// plus optional per-environment noise levels.
struct SampleSpec {
    std::vector<pinhole::SynthScenario> envs;
    int n_samples = 10000;
};
SampleSpec build_sample_spec(const RunConfig& cfg);

}  // namespace qform
