#pragma once

#include "qform/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qform::harness {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // invariant / acceptance failure
inline constexpr int kConfigError = 2;

struct Options {
    std::optional<std::uint64_t> seed;  // overrides run.seed
    std::optional<int> runs;            // overrides run.n_runs
    std::string out_dir = ".";
    bool quiet = false;
};

int cmd_simulate(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);
int cmd_bound(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);
int cmd_check_init(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);
int cmd_sample_perception(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);
int cmd_fit(const RunConfig& cfg, const Options& opt, const std::optional<std::string>& samples_path,
            const std::vector<double>& p_list, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);

// Equivalence suites behind `verify`, reusable from tests.
struct VerifyReport {
    int lockstep_pass = 0, lockstep_total = 0;        // indexed trace == integer trace
    int pc_pass = 0, pc_total = 0;                    // in-cell noise leaves traces unchanged
    bool ok() const { return lockstep_pass == lockstep_total && pc_pass == pc_total; }
};
VerifyReport run_verify_suites(const analysis::Scenario& scenario, int n_seeds, std::int64_t steps);

}  // namespace qform::harness
