#include "qform/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qform::analysis {

bool is_safe(const FormationState& y, const SafetySpec& spec) {
    spec.validate();
    return std::all_of(y.begin(), y.end(),
                       [&](const PolarVec& e) { return e.r > spec.d_min && e.r < spec.d_max; });
}

bool is_convergent_init(const FormationState& y0, const formation::TargetFormation& targets,
                        const QuantizerConfig& cfg) {
    const auto [zr, zt] = formation::index_deviations(y0, targets, cfg);
    return zr.sum() == 0 && zt.sum() % cfg.M == 0;
}

SafeWindow safe_index_window(const QuantizerConfig& cfg, const SafetySpec& spec,
                             const formation::TargetFormation& targets) {
    cfg.validate();
    spec.validate();
    std::int64_t min_target = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_target = std::numeric_limits<std::int64_t>::min();
    for (const PolarVec& t : targets.targets) {
        const std::int64_t k = index_r(cfg, t.r);
        min_target = std::min(min_target, k);
        max_target = std::max(max_target, k);
    }
    return {index_r(cfg, spec.d_min) - min_target, index_r(cfg, spec.d_max) - max_target};
}

bool is_safe_init(const FormationState& y0, const formation::TargetFormation& targets, const QuantizerConfig& cfg,
                  const SafetySpec& spec) {
    const SafeWindow w = safe_index_window(cfg, spec, targets);
    const auto [zr, zt] = formation::index_deviations(y0, targets, cfg);
    for (Eigen::Index k = 0; k < zr.size(); ++k)
        if (!(zr[k] > w.lo && zr[k] < w.hi)) return false;
    return true;
}

bool quantizer_feasible(const QuantizerConfig& cfg, const SafetySpec& spec,
                        const formation::TargetFormation& targets) {
    return safe_index_window(cfg, spec, targets).interior() > 0;
}

namespace {

double bound_formula(int n, std::int64_t delta) {
    const double nn = static_cast<double>(n);
    const double d = static_cast<double>(delta);
    return d * d / 8.0 * (nn * (nn * nn - 1.0) * (nn - 1.0)) / 4.0;
}

}  // namespace

double convergence_time_bound(int n_agents, const QuantizerConfig& cfg, const SafetySpec& spec) {
    cfg.validate();
    spec.validate();
    if (n_agents < 2) throw std::invalid_argument("convergence_time_bound: need at least two agents");
    const std::int64_t delta_radial = index_r(cfg, spec.d_max) - index_r(cfg, spec.d_min);
    const std::int64_t delta = std::max<std::int64_t>(delta_radial, cfg.M - 1);
    if (delta <= 0) throw std::invalid_argument("convergence_time_bound: degenerate spread");
    return bound_formula(n_agents, delta);
}

double convergence_time_bound(const gossip::Graph& graph, const QuantizerConfig& cfg, const SafetySpec& spec) {
    if (!graph.is_chain())
        throw std::invalid_argument("convergence_time_bound: the bound holds for chain topologies only");
    return convergence_time_bound(graph.n, cfg, spec);
}

BoundReport convergence_time_report(int n_agents, const QuantizerConfig& cfg, const SafetySpec& spec,
                                    const formation::TargetFormation& targets) {
    BoundReport rep{};
    rep.delta_radial = index_r(cfg, spec.d_max) - index_r(cfg, spec.d_min);
    const SafeWindow w = safe_index_window(cfg, spec, targets);
    rep.delta_radial_window = std::max<std::int64_t>(w.hi - w.lo - 2, 0);
    rep.delta_angular = cfg.M - 1;
    rep.delta = std::max(rep.delta_radial, rep.delta_angular);
    rep.bound = bound_formula(n_agents, rep.delta);
    rep.bound_window = bound_formula(n_agents, std::max(rep.delta_radial_window, rep.delta_angular));
    return rep;
}

namespace {

// Balanced integer vector: entries in [lo, hi], sum exactly zero.
std::vector<std::int64_t> balanced_ints(int n, std::int64_t lo, std::int64_t hi, Rng& rng) {
    if (lo > 0 || hi < 0) throw std::invalid_argument("balanced_ints: zero must be attainable");
    std::vector<std::int64_t> z(static_cast<std::size_t>(n));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::int64_t sum = 0;
        for (auto& v : z) {
            v = rng.int_in(lo, hi);
            sum += v;
        }
        if (sum == 0) return z;
    }
    // deterministic repair: walk random entries toward zero sum
    std::int64_t sum = std::accumulate(z.begin(), z.end(), std::int64_t{0});
    while (sum != 0) {
        auto& v = z[rng.below(z.size())];
        if (sum > 0 && v > lo) {
            --v;
            --sum;
        } else if (sum < 0 && v < hi) {
            ++v;
            ++sum;
        }
    }
    return z;
}

FormationState state_from_deviations(const Scenario& sc, const std::vector<std::int64_t>& zr,
                                     const std::vector<std::int64_t>& zt, Rng& rng, bool with_jitter) {
    FormationState y;
    y.reserve(zr.size());
    for (std::size_t k = 0; k < zr.size(); ++k) {
        const PolarVec& t = sc.targets.targets[k];
        const double jr = with_jitter ? rng.uniform(-0.45, 0.45) : 0.0;
        const double jt = with_jitter ? rng.uniform(-0.45, 0.45) : 0.0;
        const double kr = static_cast<double>(index_r(sc.cfg, t.r) + zr[k]) + jr;
        const double kt = static_cast<double>(index_theta(sc.cfg, t.theta) + zt[k]) + jt;
        y.push_back({std::exp(kr * sc.cfg.log_a()), wrap_angle(kt * sc.cfg.theta_b())});
    }
    return y;
}

// Angular deviations stay within a sub-half-turn spread so the indexed
// dynamics is the plain integer pair average throughout the run.
std::int64_t angular_amplitude(int M) { return std::max<std::int64_t>((M - 2) / 4, 0); }

}  // namespace

FormationState random_init_state(const Scenario& sc, Rng& rng, bool with_jitter) {
    const int n = sc.targets.n();
    const SafeWindow w = safe_index_window(sc.cfg, sc.safety, sc.targets);
    if (w.interior() <= 0)
        throw std::invalid_argument("random_init_state: quantizer infeasible for this safety spec");
    if (w.lo + 1 > 0 || w.hi - 1 < 0)
        throw std::invalid_argument("random_init_state: no convergent state fits the safe window");
    const std::vector<std::int64_t> zr = balanced_ints(n, w.lo + 1, w.hi - 1, rng);
    const std::int64_t amp = angular_amplitude(sc.cfg.M);
    const std::vector<std::int64_t> zt = balanced_ints(n, -amp, amp, rng);
    return state_from_deviations(sc, zr, zt, rng, with_jitter);
}

FormationState worst_case_init_state(const Scenario& sc, Rng& rng) {
    const int n = sc.targets.n();
    const SafeWindow w = safe_index_window(sc.cfg, sc.safety, sc.targets);
    if (w.interior() <= 0)
        throw std::invalid_argument("worst_case_init_state: quantizer infeasible for this safety spec");
    const std::int64_t radial_amp = std::max<std::int64_t>(std::min(w.hi - 1, -(w.lo + 1)), 0);
    const std::int64_t ang_amp = std::min<std::int64_t>(angular_amplitude(sc.cfg.M), 1);

    std::vector<std::int64_t> zr(static_cast<std::size_t>(n), 0), zt(static_cast<std::size_t>(n), 0);
    const std::int64_t flip = rng.below(2) ? 1 : -1;
    for (int k = 0; k + 1 < n; k += 2) {
        zr[static_cast<std::size_t>(k)] = flip * radial_amp;
        zr[static_cast<std::size_t>(k + 1)] = -flip * radial_amp;
        zt[static_cast<std::size_t>(k)] = flip * ang_amp;
        zt[static_cast<std::size_t>(k + 1)] = -flip * ang_amp;
    }
    return state_from_deviations(sc, zr, zt, rng, false);
}

namespace {

double order_stat(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t idx = static_cast<std::size_t>(
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(p * static_cast<double>(values.size())))));
    return values[std::min(idx, values.size()) - 1];
}

}  // namespace

ConvStats estimate_convergence_time(const Scenario& sc, int n_runs, InitMode mode) {
    if (n_runs < 1) throw std::invalid_argument("estimate_convergence_time: need at least one run");
    ConvStats stats;
    stats.runs = n_runs;
    stats.bound = sc.graph.is_chain() ? convergence_time_bound(sc.graph, sc.cfg, sc.safety)
                                      : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n_runs));
    for (int r = 0; r < n_runs; ++r) {
        Rng init_rng(derive_stream(sc.seed, "init", static_cast<std::uint64_t>(r)));
        Rng edge_rng(derive_stream(sc.seed, "edges", static_cast<std::uint64_t>(r)));
        formation::PerceptionModel model = sc.perception;
        model.rng = Rng(derive_stream(sc.seed, "percep", static_cast<std::uint64_t>(r)));

        FormationState y0;
        switch (mode) {
            case InitMode::RandomConvergent: y0 = random_init_state(sc, init_rng); break;
            case InitMode::WorstCase: y0 = worst_case_init_state(sc, init_rng); break;
            case InitMode::FromScenario:
                if (!sc.initial) throw std::invalid_argument("estimate_convergence_time: scenario has no initial state");
                y0 = *sc.initial;
                break;
        }

        const formation::Run run =
            formation::run(y0, sc.targets, sc.cfg, sc.graph, model, edge_rng, {sc.max_steps, true});
        if (monitor_trace(run, sc.safety)) ++stats.violations;
        if (run.t_con) {
            ++stats.converged;
            times.push_back(static_cast<double>(*run.t_con));
        }
    }

    if (!times.empty()) {
        stats.mean_t = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
        stats.q50 = order_stat(times, 0.50);
        stats.q90 = order_stat(times, 0.90);
        stats.q99 = order_stat(times, 0.99);
        if (std::isfinite(stats.bound) && times.size() > 1) {
            double ss = 0.0;
            for (double t : times) ss += (t - stats.mean_t) * (t - stats.mean_t);
            const double stderr_mean = std::sqrt(ss / (static_cast<double>(times.size()) - 1.0)) /
                                       std::sqrt(static_cast<double>(times.size()));
            stats.bound_exceeded_99 = stats.mean_t - 2.326 * stderr_mean > stats.bound;
        }
    }
    return stats;
}

std::optional<std::int64_t> monitor_trace(const formation::Run& run, const SafetySpec& spec) {
    std::optional<std::int64_t> first;
    run.replay([&](std::int64_t t, const FormationState& y) {
        if (!first && !is_safe(y, spec)) first = t;
    });
    return first;
}

std::string stats_to_json(const ConvStats& stats) {
    nlohmann::json j;
    j["bound"] = stats.bound;
    j["mean_t"] = stats.mean_t;
    j["q50"] = stats.q50;
    j["q90"] = stats.q90;
    j["q99"] = stats.q99;
    j["runs"] = stats.runs;
    j["violations"] = stats.violations;
    return j.dump(2);
}

}  // namespace qform::analysis
