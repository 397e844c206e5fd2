#pragma once

#include "qform/geometry.hpp"
#include "qform/gossip.hpp"
#include "qform/pinhole.hpp"
#include "qform/quantizer.hpp"
#include "qform/rng.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace qform::formation {

// Integer lift for angular index deviations:
//   Canonical — representatives in [0, M),
//   Signed    — representatives in (-M/2, M/2].
enum class AngularLift { Canonical, Signed };

std::int64_t lift_mod(std::int64_t value, int modulus, AngularLift lift);

// Desired relative positions; every entry lies on the quantizer grid.
struct TargetFormation {
    std::vector<PolarVec> targets;
    int n() const { return static_cast<int>(targets.size()); }
};

// Validates targets against the grid. Off-grid entries are snapped to the
// nearest grid point with a warning on `snap_warnings` (never silently).
TargetFormation make_targets(const QuantizerConfig& cfg, std::vector<PolarVec> raw,
                             std::ostream* snap_warnings = nullptr);

// The pair update: both selected entries move toward the weighted mean of
// their quantized deviations from the targets, then re-quantize, so the
// result is always on the grid.
struct PairUpdate {
    PolarVec yi, yj;
    bool wrapped;  // an angular update crossed the 0/2*pi seam
};
PairUpdate step_pair_detail(const PolarVec& yi, const PolarVec& yj, const PolarVec& ti, const PolarVec& tj,
                            const QuantizerConfig& cfg);
FormationState step_pair(const FormationState& y, int i, int j, const QuantizerConfig& cfg,
                         const TargetFormation& targets);

// Index deviations from the target, per channel: entry k is
// I(r_k) - I(r_k*) (radial) and the lifted (I(theta_k) - I(theta_k*)) mod M.
std::pair<gossip::IntState, gossip::IntState> index_deviations(const FormationState& y,
                                                               const TargetFormation& targets,
                                                               const QuantizerConfig& cfg,
                                                               AngularLift lift = AngularLift::Canonical);

bool at_target(const FormationState& y, const TargetFormation& targets, const QuantizerConfig& cfg);

enum class PerceptionKind { Exact, BoundedQuantizerNoise, Lognormal, Pinhole, Replay };

struct LognormalParams {
    double sigma = 0.05;        // base log-radius noise
    double sigma_growth = 0.0;  // extra noise per unit log(r / r_ref)
    double r_ref = 1.0;
    double sigma_theta = 0.02;  // wrapped gaussian on the angle
};

// Recorded perception errors applied to new truths in order (cyclically):
// the estimate gets the sample's relative radius error and angle offset.
struct ReplayErrors {
    std::vector<double> log_radius_err;
    std::vector<double> angle_err;
    std::size_t next = 0;
};

// Stand-in for the vision pipeline: maps a true relative position to a
// perceived one. Owns its own random stream so that toggling perception
// does not disturb the edge-selection sequence.
struct PerceptionModel {
    PerceptionKind kind = PerceptionKind::Exact;
    QuantizerConfig cfg;  // cell sizes for BoundedQuantizerNoise
    LognormalParams lognormal;
    pinhole::SynthScenario pin;
    ReplayErrors replay;
    Rng rng{0};

    static PerceptionModel exact() { return {}; }
    static PerceptionModel bounded_noise(const QuantizerConfig& cfg, std::uint64_t seed);
    static PerceptionModel lognormal_noise(const LognormalParams& p, std::uint64_t seed);
    static PerceptionModel pinhole_model(const pinhole::SynthScenario& sc, std::uint64_t seed);
    static PerceptionModel replay_errors(ReplayErrors errors);
};

PolarVec perceive(const PolarVec& truth, PerceptionModel& model);

struct TraceEvent {
    int i, j;
    PolarVec yi, yj;  // values after the step
    bool wrapped;
};

struct Run {
    FormationState y0;
    std::vector<TraceEvent> events;
    std::optional<std::int64_t> t_con;  // first step with y == targets (grid equality)
    FormationState final;
    std::vector<std::int64_t> wrap_steps;

    std::int64_t steps() const { return static_cast<std::int64_t>(events.size()); }

    template <class F>
    void replay(F&& visitor) const {
        FormationState y = y0;
        visitor(std::int64_t{0}, static_cast<const FormationState&>(y));
        for (std::size_t t = 0; t < events.size(); ++t) {
            y[static_cast<std::size_t>(events[t].i)] = events[t].yi;
            y[static_cast<std::size_t>(events[t].j)] = events[t].yj;
            visitor(static_cast<std::int64_t>(t + 1), static_cast<const FormationState&>(y));
        }
    }

    std::vector<FormationState> states() const;
};

struct RunOptions {
    std::int64_t max_steps = 1'000'000;
    bool stop_on_converge = true;
};

// Gossip-driven evolution with perception in the loop: each step selects an
// edge, perceives the two participating entries, and applies the pair update
// to the perceived values.
Run run(const FormationState& y0, const TargetFormation& targets, const QuantizerConfig& cfg,
        const gossip::Graph& graph, PerceptionModel& model, Rng& edge_rng, const RunOptions& opts);

}  // namespace qform::formation
