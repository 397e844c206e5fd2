#include "qform/formation.hpp"

namespace qform::formation {

std::int64_t lift_mod(std::int64_t value, int modulus, AngularLift lift) {
    std::int64_t m = ((value % modulus) + modulus) % modulus;
    if (lift == AngularLift::Signed && m > modulus / 2) m -= modulus;
    return m;
}

TargetFormation make_targets(const QuantizerConfig& cfg, std::vector<PolarVec> raw, std::ostream* snap_warnings) {
    cfg.validate();
    if (raw.empty()) throw std::invalid_argument("targets: need at least one entry");
    for (std::size_t k = 0; k < raw.size(); ++k) {
        raw[k].validate();
        const bool r_ok = on_grid_r(cfg, raw[k].r);
        const bool t_ok = on_grid_theta(cfg, raw[k].theta);
        if (r_ok && t_ok) continue;
        const PolarVec snapped{quantize_r(cfg, raw[k].r), quantize_theta(cfg, raw[k].theta)};
        if (snap_warnings)
            *snap_warnings << "warning: target " << (k + 1) << " (" << raw[k].r << ", " << raw[k].theta
                           << ") is off the quantizer grid; snapped to (" << snapped.r << ", " << snapped.theta
                           << ")\n";
        raw[k] = snapped;
    }
    return TargetFormation{std::move(raw)};
}

namespace {

struct EntryUpdate {
    PolarVec value;
    bool wrapped;
};

// One side of the pair update: entry `self` moves toward `peer`, offset by
// the target difference, channel-wise on the quantized values.
EntryUpdate update_entry(const PolarVec& self, const PolarVec& peer, const PolarVec& t_self,
                         const PolarVec& t_peer, const QuantizerConfig& cfg) {
    // radial channel, multiplicative group
    const double qi = quantize_r(cfg, self.r);
    const double qj = quantize_r(cfg, peer.r);
    const double radial_arg = diff_r(qj, diff_r(t_peer.r, t_self.r));
    const double new_r = quantize_r(cfg, mean_omega_r(cfg, qi, radial_arg));

    // angular channel, rotation group; the deviation is scaled along the
    // shortest arc so that the indexed dynamics matches the integer pair
    // average step for step.
    const double ai = quantize_theta(cfg, self.theta);
    const double aj = quantize_theta(cfg, peer.theta);
    const double angular_arg = diff_theta(aj, diff_theta(t_peer.theta, t_self.theta));
    const double new_theta = quantize_theta(cfg, mean_omega_theta(cfg, ai, angular_arg, AngularMean::Shortest));

    // wrap detection: the unreduced index left [0, M)
    const int old_idx = index_theta(cfg, ai);
    const int new_idx = index_theta(cfg, new_theta);
    const std::int64_t signed_step = lift_mod(new_idx - old_idx, cfg.M, AngularLift::Signed);
    const std::int64_t unreduced = old_idx + signed_step;
    const bool wrapped = unreduced < 0 || unreduced >= cfg.M;

    return {{new_r, new_theta}, wrapped};
}

}  // namespace

PairUpdate step_pair_detail(const PolarVec& yi, const PolarVec& yj, const PolarVec& ti, const PolarVec& tj,
                            const QuantizerConfig& cfg) {
    const EntryUpdate ui = update_entry(yi, yj, ti, tj, cfg);
    const EntryUpdate uj = update_entry(yj, yi, tj, ti, cfg);
    return {ui.value, uj.value, ui.wrapped || uj.wrapped};
}

FormationState step_pair(const FormationState& y, int i, int j, const QuantizerConfig& cfg,
                         const TargetFormation& targets) {
    const int n = static_cast<int>(y.size());
    if (targets.n() != n) throw std::invalid_argument("step_pair: target count does not match state");
    if (i == j || i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("step_pair: invalid pair");
    const PairUpdate up = step_pair_detail(y[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(j)],
                                           targets.targets[static_cast<std::size_t>(i)],
                                           targets.targets[static_cast<std::size_t>(j)], cfg);
    FormationState out = y;
    out[static_cast<std::size_t>(i)] = up.yi;
    out[static_cast<std::size_t>(j)] = up.yj;
    return out;
}

std::pair<gossip::IntState, gossip::IntState> index_deviations(const FormationState& y,
                                                               const TargetFormation& targets,
                                                               const QuantizerConfig& cfg, AngularLift lift) {
    const int n = static_cast<int>(y.size());
    if (targets.n() != n) throw std::invalid_argument("index_deviations: target count does not match state");
    gossip::IntState zr(n), zt(n);
    for (int k = 0; k < n; ++k) {
        const PolarVec& yk = y[static_cast<std::size_t>(k)];
        const PolarVec& tk = targets.targets[static_cast<std::size_t>(k)];
        zr[k] = index_r(cfg, yk.r) - index_r(cfg, tk.r);
        zt[k] = lift_mod(index_theta(cfg, yk.theta) - index_theta(cfg, tk.theta), cfg.M, lift);
    }
    return {zr, zt};
}

bool at_target(const FormationState& y, const TargetFormation& targets, const QuantizerConfig& cfg) {
    if (targets.n() != static_cast<int>(y.size())) return false;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const PolarVec& yk = y[k];
        const PolarVec& tk = targets.targets[k];
        if (!on_grid_r(cfg, yk.r) || !on_grid_theta(cfg, yk.theta)) return false;
        if (index_r(cfg, yk.r) != index_r(cfg, tk.r)) return false;
        if (index_theta(cfg, yk.theta) != index_theta(cfg, tk.theta)) return false;
    }
    return true;
}

PerceptionModel PerceptionModel::bounded_noise(const QuantizerConfig& cfg, std::uint64_t seed) {
    PerceptionModel m;
    m.kind = PerceptionKind::BoundedQuantizerNoise;
    m.cfg = cfg;
    m.rng = Rng(seed);
    return m;
}

PerceptionModel PerceptionModel::lognormal_noise(const LognormalParams& p, std::uint64_t seed) {
    PerceptionModel m;
    m.kind = PerceptionKind::Lognormal;
    m.lognormal = p;
    m.rng = Rng(seed);
    return m;
}

PerceptionModel PerceptionModel::pinhole_model(const pinhole::SynthScenario& sc, std::uint64_t seed) {
    PerceptionModel m;
    m.kind = PerceptionKind::Pinhole;
    m.pin = sc;
    m.rng = Rng(seed);
    return m;
}

PerceptionModel PerceptionModel::replay_errors(ReplayErrors errors) {
    if (errors.log_radius_err.empty() || errors.angle_err.empty())
        throw std::invalid_argument("replay_errors: need at least one recorded error");
    PerceptionModel m;
    m.kind = PerceptionKind::Replay;
    m.replay = std::move(errors);
    return m;
}

PolarVec perceive(const PolarVec& truth, PerceptionModel& model) {
    truth.validate();
    switch (model.kind) {
        case PerceptionKind::Exact:
            return truth;
        case PerceptionKind::BoundedQuantizerNoise: {
            // stays strictly inside the truth's grid cell, so the perception
            // contract holds whenever the truth is a grid point
            double u, v;
            do {
                u = model.rng.uniform(-0.5, 0.5);
            } while (u <= -0.5 || u >= 0.5);
            do {
                v = model.rng.uniform(-0.5, 0.5);
            } while (v <= -0.5 || v >= 0.5);
            const double r = truth.r * std::exp(u * model.cfg.log_a());
            const double theta = wrap_angle(truth.theta + v * model.cfg.theta_b());
            return {r, theta};
        }
        case PerceptionKind::Lognormal: {
            const LognormalParams& p = model.lognormal;
            const double scale = p.sigma + p.sigma_growth * std::log(truth.r / p.r_ref);
            const double r = truth.r * std::exp(scale * model.rng.gaussian());
            const double theta = wrap_angle(truth.theta + p.sigma_theta * model.rng.gaussian());
            return {std::max(r, 1e-12), theta};
        }
        case PerceptionKind::Pinhole:
            return pinhole::perceive_pinhole(truth, model.pin, model.rng);
        case PerceptionKind::Replay: {
            ReplayErrors& rp = model.replay;
            const double er = rp.log_radius_err[rp.next % rp.log_radius_err.size()];
            const double et = rp.angle_err[rp.next % rp.angle_err.size()];
            ++rp.next;
            return {truth.r * std::exp(er), wrap_angle(truth.theta + et)};
        }
    }
    throw std::logic_error("perceive: unknown model kind");
}

std::vector<FormationState> Run::states() const {
    std::vector<FormationState> out;
    out.reserve(events.size() + 1);
    replay([&](std::int64_t, const FormationState& y) { out.push_back(y); });
    return out;
}

Run run(const FormationState& y0, const TargetFormation& targets, const QuantizerConfig& cfg,
        const gossip::Graph& graph, PerceptionModel& model, Rng& edge_rng, const RunOptions& opts) {
    if (opts.max_steps <= 0) throw std::invalid_argument("formation::run: max_steps must be positive");
    const int n = static_cast<int>(y0.size());
    if (n != graph.n) throw std::invalid_argument("formation::run: state size does not match graph");
    if (targets.n() != n) throw std::invalid_argument("formation::run: target count does not match state");
    for (const PolarVec& e : y0) e.validate();

    Run result;
    result.y0 = y0;
    FormationState y = y0;
    if (at_target(y, targets, cfg)) result.t_con = 0;

    for (std::int64_t t = 1; t <= opts.max_steps && !graph.edges.empty(); ++t) {
        if (result.t_con && opts.stop_on_converge) break;
        const auto [i, j] = gossip::select_edge(graph, edge_rng);
        const PolarVec seen_i = perceive(y[static_cast<std::size_t>(i)], model);
        const PolarVec seen_j = perceive(y[static_cast<std::size_t>(j)], model);
        const PairUpdate up = step_pair_detail(seen_i, seen_j, targets.targets[static_cast<std::size_t>(i)],
                                               targets.targets[static_cast<std::size_t>(j)], cfg);
        y[static_cast<std::size_t>(i)] = up.yi;
        y[static_cast<std::size_t>(j)] = up.yj;
        result.events.push_back({i, j, up.yi, up.yj, up.wrapped});
        if (up.wrapped) result.wrap_steps.push_back(t);
        if (!result.t_con && at_target(y, targets, cfg)) result.t_con = t;
    }
    result.final = std::move(y);
    return result;
}

}  // namespace qform::formation
