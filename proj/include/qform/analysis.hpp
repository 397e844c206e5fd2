#pragma once

#include "qform/formation.hpp"
#include "qform/gossip.hpp"
#include "qform/quantizer.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace qform::analysis {

struct SafetySpec {
    double d_min = 1.0;
    double d_max = 16.0;

    void validate() const {
        if (!(d_min > 0.0) || !(d_min < d_max)) throw std::invalid_argument("safety: need 0 < d_min < d_max");
    }
};

// Every inter-neighbor distance strictly inside (d_min, d_max).
bool is_safe(const FormationState& y, const SafetySpec& spec);

// Initial states whose index deviations sum to zero (radially exactly,
// angularly modulo M), so that the paired averaging can settle on the target.
bool is_convergent_init(const FormationState& y0, const formation::TargetFormation& targets,
                        const QuantizerConfig& cfg);

// Open interval (lo, hi) of radial index deviations that keeps every agent
// safe for all time. All membership checks run on integer indices, never on
// floating ratios.
struct SafeWindow {
    std::int64_t lo, hi;
    std::int64_t interior() const { return hi - lo >= 2 ? hi - lo - 1 : 0; }  // integer count strictly inside
};
SafeWindow safe_index_window(const QuantizerConfig& cfg, const SafetySpec& spec,
                             const formation::TargetFormation& targets);

bool is_safe_init(const FormationState& y0, const formation::TargetFormation& targets, const QuantizerConfig& cfg,
                  const SafetySpec& spec);

// The quantizer is usable for this safety spec iff some integer deviation
// fits strictly inside the safe window; otherwise no initial state
// guarantees safety and the grid is too coarse.
bool quantizer_feasible(const QuantizerConfig& cfg, const SafetySpec& spec,
                        const formation::TargetFormation& targets);

// Expected-convergence-time bound for gossip over a chain, with the spread
// parameter taken per channel.
struct BoundReport {
    std::int64_t delta_radial;         // I(d_max) - I(d_min)
    std::int64_t delta_radial_window;  // tighter variant from the safe-start window
    std::int64_t delta_angular;        // M - 1
    std::int64_t delta;                // max(delta_radial, delta_angular); enters the bound
    double bound;
    double bound_window;               // same formula with the tighter radial spread
};

double convergence_time_bound(int n_agents, const QuantizerConfig& cfg, const SafetySpec& spec);
double convergence_time_bound(const gossip::Graph& graph, const QuantizerConfig& cfg, const SafetySpec& spec);
BoundReport convergence_time_report(int n_agents, const QuantizerConfig& cfg, const SafetySpec& spec,
                                    const formation::TargetFormation& targets);

// Everything needed to reproduce a stochastic run.
struct Scenario {
    QuantizerConfig cfg;
    formation::TargetFormation targets;
    SafetySpec safety;
    gossip::Graph graph;
    formation::PerceptionModel perception;
    std::uint64_t seed = 1;
    std::int64_t max_steps = 1'000'000;
    formation::AngularLift lift = formation::AngularLift::Canonical;
    std::optional<FormationState> initial;
};

// Random draw from the convergent-and-safe initial set: balanced integer
// deviations strictly inside the safe window, with optional sub-cell jitter
// so inputs are not already grid points. Angular deviations stay within a
// half-turn spread.
FormationState random_init_state(const Scenario& sc, Rng& rng, bool with_jitter = true);

// Stress state for the bound check: alternating extreme deviations
// consistent with zero sum and the safe window.
FormationState worst_case_init_state(const Scenario& sc, Rng& rng);

struct ConvStats {
    std::int64_t runs = 0;
    std::int64_t converged = 0;
    double mean_t = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
    double bound = 0.0;
    bool bound_exceeded_99 = false;  // sample mean above the bound at 99% one-sided confidence
    std::int64_t violations = 0;     // runs with a safety violation
};

enum class InitMode { RandomConvergent, WorstCase, FromScenario };

ConvStats estimate_convergence_time(const Scenario& sc, int n_runs, InitMode mode = InitMode::RandomConvergent);

// First step at which the trace leaves the safe set, if any.
std::optional<std::int64_t> monitor_trace(const formation::Run& run, const SafetySpec& spec);

// {bound, mean_t, q50, q90, q99, runs, violations}
std::string stats_to_json(const ConvStats& stats);

}  // namespace qform::analysis
