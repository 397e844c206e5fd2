#include "qform/harness.hpp"

#include "qform/contract_fit.hpp"
#include "qform/csv.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qform::harness {

namespace {

namespace fs = std::filesystem;

fs::path resolve(const Options& opt, const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : fs::path(opt.out_dir) / p;
}

fs::path with_run_suffix(const fs::path& path, int run_index, int n_runs) {
    if (n_runs <= 1) return path;
    fs::path p = path;
    std::ostringstream stem;
    stem << p.stem().string() << "_r" << std::setw(3) << std::setfill('0') << run_index;
    p.replace_filename(stem.str() + p.extension().string());
    return p;
}

void write_file(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig adjusted = cfg;
    if (opt.seed) adjusted.seed = *opt.seed;
    if (opt.runs) adjusted.n_runs = *opt.runs;
    const analysis::Scenario sc = build_scenario(adjusted, opt.quiet ? nullptr : &err);
    const int n_runs = adjusted.n_runs;

    analysis::ConvStats stats;
    stats.runs = n_runs;
    stats.bound = sc.graph.is_chain() ? analysis::convergence_time_bound(sc.graph, sc.cfg, sc.safety)
                                      : std::numeric_limits<double>::quiet_NaN();
    std::vector<double> times;
    bool all_converged = true;

    for (int r = 0; r < n_runs; ++r) {
        Rng init_rng(derive_stream(sc.seed, "init", static_cast<std::uint64_t>(r)));
        Rng edge_rng(derive_stream(sc.seed, "edges", static_cast<std::uint64_t>(r)));
        formation::PerceptionModel model = sc.perception;
        model.rng = Rng(derive_stream(sc.seed, "percep", static_cast<std::uint64_t>(r)));

        const FormationState y0 = sc.initial ? *sc.initial : analysis::random_init_state(sc, init_rng);
        const formation::Run run =
            formation::run(y0, sc.targets, sc.cfg, sc.graph, model, edge_rng, {sc.max_steps, true});

        if (analysis::monitor_trace(run, sc.safety)) ++stats.violations;
        if (run.t_con) times.push_back(static_cast<double>(*run.t_con));
        else all_converged = false;

        std::ostringstream trace;
        csv::write_formation_trace(trace, run, sc.safety);
        write_file(with_run_suffix(resolve(opt, adjusted.trace_path), r, n_runs), trace.str());
    }

    stats.converged = static_cast<std::int64_t>(times.size());
    if (!times.empty()) {
        double sum = 0.0;
        for (double t : times) sum += t;
        stats.mean_t = sum / static_cast<double>(times.size());
        std::vector<double> sorted = times;
        const auto q = [&](double p) {
            std::sort(sorted.begin(), sorted.end());
            const auto idx = static_cast<std::size_t>(std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::ceil(p * static_cast<double>(sorted.size())))));
            return sorted[std::min(idx, sorted.size()) - 1];
        };
        stats.q50 = q(0.50);
        stats.q90 = q(0.90);
        stats.q99 = q(0.99);
    }

    write_file(resolve(opt, adjusted.summary_path), analysis::stats_to_json(stats) + "\n");
    if (!opt.quiet) {
        out << "runs: " << n_runs << "  converged: " << stats.converged << "  violations: " << stats.violations
            << "\n"
            << "mean t_con: " << stats.mean_t << "  bound: " << stats.bound << "\n";
    }
    return (all_converged && stats.violations == 0) ? kOk : kFailure;
}

int cmd_bound(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig adjusted = cfg;
    if (opt.seed) adjusted.seed = *opt.seed;
    const analysis::Scenario sc = build_scenario(adjusted, opt.quiet ? nullptr : &err);
    if (!sc.graph.is_chain()) {
        err << "bound: the expected-convergence-time bound holds for chain topologies only\n";
        return kConfigError;
    }
    const analysis::BoundReport rep =
        analysis::convergence_time_report(sc.graph.n, sc.cfg, sc.safety, sc.targets);
    if (opt.quiet) {
        out << csv::fmt(rep.bound) << "\n";
    } else {
        out << "radial index spread (d_min..d_max): " << rep.delta_radial << "\n"
            << "radial index spread (safe-start window): " << rep.delta_radial_window << "\n"
            << "angular index spread (M - 1): " << rep.delta_angular << "\n"
            << "spread used by the bound: " << rep.delta << "\n"
            << "expected convergence-time bound: " << csv::fmt(rep.bound) << "\n"
            << "bound with window spread: " << csv::fmt(rep.bound_window) << "\n";
    }
    return kOk;
}

int cmd_check_init(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig adjusted = cfg;
    const analysis::Scenario sc = build_scenario(adjusted, opt.quiet ? nullptr : &err);
    if (!sc.initial) {
        err << "check-init: the config has no formation.initial state\n";
        return kConfigError;
    }
    const FormationState& y0 = *sc.initial;
    const bool convergent = analysis::is_convergent_init(y0, sc.targets, sc.cfg);
    const bool safe_start = analysis::is_safe_init(y0, sc.targets, sc.cfg, sc.safety);
    const bool safe_now = analysis::is_safe(y0, sc.safety);
    out << "convergent_init (index sums match targets): " << (convergent ? "yes" : "no") << "\n"
        << "safe_start (index deviations inside the safe window): " << (safe_start ? "yes" : "no") << "\n"
        << "safe (distances strictly inside (d_min, d_max)): " << (safe_now ? "yes" : "no") << "\n";
    return (convergent && safe_start && safe_now) ? kOk : kFailure;
}

int cmd_sample_perception(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig adjusted = cfg;
    if (opt.seed) adjusted.seed = *opt.seed;
    const SampleSpec spec = build_sample_spec(adjusted);

    std::vector<SampleRecord> all;
    all.reserve(static_cast<std::size_t>(spec.n_samples) * spec.envs.size());
    for (std::size_t e = 0; e < spec.envs.size(); ++e) {
        Rng rng(derive_stream(adjusted.seed, "samples", static_cast<std::uint64_t>(e)));
        auto batch = pinhole::synth_samples(spec.envs[e], spec.n_samples, rng);
        all.insert(all.end(), batch.begin(), batch.end());
    }

    std::ostringstream body;
    csv::write_samples(body, all);
    const fs::path path = resolve(opt, adjusted.samples_path);
    write_file(path, body.str());
    if (!opt.quiet)
        out << "wrote " << all.size() << " samples (" << spec.envs.size() << " environment(s)) to " << path.string()
            << "\n";
    (void)err;
    return kOk;
}

int cmd_fit(const RunConfig& cfg, const Options& opt, const std::optional<std::string>& samples_path,
            const std::vector<double>& p_list, std::ostream& out, std::ostream& err) {
    const std::string path = samples_path ? *samples_path : resolve(opt, cfg.samples_path).string();
    fit::LoadedSamples loaded;
    try {
        loaded = fit::load_samples(path);
    } catch (const fit::FitError& e) {
        err << e.what() << "\n";
        return kFailure;
    }
    if (loaded.skipped > 0 && !opt.quiet) err << "skipped " << loaded.skipped << " malformed sample row(s)\n";
    if (loaded.samples.empty()) {
        err << "fit: no usable samples in " << path << "\n";
        return kFailure;
    }
    const std::vector<double> ps = p_list.empty() ? std::vector<double>{0.99, 0.90} : p_list;
    const auto rows = fit::sweep_environments(loaded.samples, ps);
    const std::string table = fit::sweep_to_csv(rows);
    write_file(resolve(opt, cfg.fit_path), table);
    if (!opt.quiet) out << table;
    return kOk;
}

VerifyReport run_verify_suites(const analysis::Scenario& scenario, int n_seeds, std::int64_t steps) {
    VerifyReport rep;
    rep.lockstep_total = n_seeds;
    rep.pc_total = n_seeds;

    for (int s = 0; s < n_seeds; ++s) {
        const std::uint64_t init_seed = derive_stream(scenario.seed, "verify-init", static_cast<std::uint64_t>(s));
        const std::uint64_t edge_seed = derive_stream(scenario.seed, "verify-edge", static_cast<std::uint64_t>(s));

        Rng init_rng(init_seed);
        const FormationState y0 = analysis::random_init_state(scenario, init_rng);

        // indexed trace vs integer trace, same edge sequence
        {
            formation::PerceptionModel exact = formation::PerceptionModel::exact();
            Rng edges_y(edge_seed), edges_z(edge_seed);
            const formation::RunOptions opts{steps, false};
            const formation::Run yrun =
                formation::run(y0, scenario.targets, scenario.cfg, scenario.graph, exact, edges_y, opts);
            const auto [zr0, zt0] =
                formation::index_deviations(y0, scenario.targets, scenario.cfg, formation::AngularLift::Signed);
            const gossip::Run rrun = gossip::run(zr0, scenario.graph, scenario.cfg.omega, edges_z, {steps, false});
            Rng edges_z2(edge_seed);
            const gossip::Run trun = gossip::run(zt0, scenario.graph, scenario.cfg.omega, edges_z2, {steps, false});

            bool ok = true;
            FormationState y = yrun.y0;
            for (std::size_t t = 0; t < yrun.events.size() && ok; ++t) {
                const auto& e = yrun.events[t];
                y[static_cast<std::size_t>(e.i)] = e.yi;
                y[static_cast<std::size_t>(e.j)] = e.yj;
                const auto [zr, zt] =
                    formation::index_deviations(y, scenario.targets, scenario.cfg, formation::AngularLift::Signed);
                const auto& re = rrun.events[t];
                const auto& te = trun.events[t];
                ok = re.i == e.i && re.j == e.j && zr[e.i] == re.zi && zr[e.j] == re.zj && zt[e.i] == te.zi &&
                     zt[e.j] == te.zj;
            }
            if (ok) ++rep.lockstep_pass;
        }

        // perception noise inside the grid cell must not change the trace
        {
            const FormationState on_grid = [&] {
                Rng r(init_seed);
                return analysis::random_init_state(scenario, r, false);
            }();
            formation::PerceptionModel exact = formation::PerceptionModel::exact();
            formation::PerceptionModel noisy = formation::PerceptionModel::bounded_noise(
                scenario.cfg, derive_stream(scenario.seed, "verify-noise", static_cast<std::uint64_t>(s)));
            Rng edges_a(edge_seed), edges_b(edge_seed);
            const formation::RunOptions opts{steps, false};
            const formation::Run a =
                formation::run(on_grid, scenario.targets, scenario.cfg, scenario.graph, exact, edges_a, opts);
            const formation::Run b =
                formation::run(on_grid, scenario.targets, scenario.cfg, scenario.graph, noisy, edges_b, opts);
            bool ok = a.events.size() == b.events.size();
            for (std::size_t t = 0; t < a.events.size() && ok; ++t) {
                const auto& ea = a.events[t];
                const auto& eb = b.events[t];
                ok = ea.i == eb.i && ea.j == eb.j &&
                     index_r(scenario.cfg, ea.yi.r) == index_r(scenario.cfg, eb.yi.r) &&
                     index_r(scenario.cfg, ea.yj.r) == index_r(scenario.cfg, eb.yj.r) &&
                     index_theta(scenario.cfg, ea.yi.theta) == index_theta(scenario.cfg, eb.yi.theta) &&
                     index_theta(scenario.cfg, ea.yj.theta) == index_theta(scenario.cfg, eb.yj.theta);
            }
            if (ok) ++rep.pc_pass;
        }
    }
    return rep;
}

int cmd_verify(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    RunConfig adjusted = cfg;
    if (opt.seed) adjusted.seed = *opt.seed;
    const analysis::Scenario sc = build_scenario(adjusted, opt.quiet ? nullptr : &err);
    const int n_seeds = opt.runs.value_or(20);
    const VerifyReport rep = run_verify_suites(sc, n_seeds, 5000);
    out << "lockstep (indexed trace == integer trace): " << rep.lockstep_pass << "/" << rep.lockstep_total
        << (rep.lockstep_pass == rep.lockstep_total ? " ok" : " FAIL") << "\n"
        << "contract invariance (in-cell noise, identical traces): " << rep.pc_pass << "/" << rep.pc_total
        << (rep.pc_pass == rep.pc_total ? " ok" : " FAIL") << "\n";
    return rep.ok() ? kOk : kFailure;
}

}  // namespace qform::harness
