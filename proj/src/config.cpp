#include "qform/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace qform {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) fail(std::string("missing required field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(std::string("field '") + key + "' has the wrong type");
    }
}

std::vector<PolarVec> parse_polar_list(const json& arr, const char* what) {
    if (!arr.is_array() || arr.empty()) fail(std::string(what) + " must be a non-empty array of [r, theta]");
    std::vector<PolarVec> out;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2) fail(std::string(what) + " entries must be [r, theta] pairs");
        out.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", 1);
    if (cfg.schema_version != 1) fail("unsupported schema_version");

    const json& formation = j.contains("formation") ? j.at("formation") : json::object();
    cfg.n_agents = require<int>(formation, "n_agents");
    cfg.targets = parse_polar_list(formation.contains("targets") ? formation.at("targets") : json{}, "targets");
    if (formation.contains("initial"))
        cfg.initial = parse_polar_list(formation.at("initial"), "initial");
    cfg.d_min = require<double>(formation, "d_min");
    cfg.d_max = require<double>(formation, "d_max");

    const json& quant = j.contains("quantizer") ? j.at("quantizer") : json::object();
    cfg.a = require<double>(quant, "a");
    cfg.M = require<int>(quant, "M");
    cfg.omega = get_or<double>(quant, "omega", 0.618);
    const std::string lift = get_or<std::string>(quant, "angular_lift", "canonical");
    if (lift == "canonical")
        cfg.lift = formation::AngularLift::Canonical;
    else if (lift == "signed")
        cfg.lift = formation::AngularLift::Signed;
    else
        fail("quantizer.angular_lift must be 'canonical' or 'signed'");

    const json& graph = j.contains("graph") ? j.at("graph") : json::object();
    cfg.topology = get_or<std::string>(graph, "topology", "chain");
    if (cfg.topology == "custom") {
        const json edges = graph.contains("edges") ? graph.at("edges") : json{};
        if (!edges.is_array() || edges.empty()) fail("graph.edges required for custom topology");
        for (const auto& e : edges) {
            if (!e.is_array() || e.size() != 2) fail("graph.edges entries must be [i, j] pairs");
            cfg.edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);  // file is 1-based
        }
    } else if (cfg.topology != "chain") {
        fail("graph.topology must be 'chain' or 'custom'");
    }

    const json& perception = j.contains("perception") ? j.at("perception") : json::object();
    cfg.perception_kind = get_or<std::string>(perception, "kind", "exact");
    cfg.perception_params_json =
        perception.contains("params") ? perception.at("params").dump() : std::string("{}");

    const json& run = j.contains("run") ? j.at("run") : json::object();
    cfg.seed = get_or<std::uint64_t>(run, "seed", 1);
    cfg.max_steps = get_or<std::int64_t>(run, "max_steps", 1'000'000);
    cfg.n_runs = get_or<int>(run, "n_runs", 1);

    const json& output = j.contains("output") ? j.at("output") : json::object();
    cfg.trace_path = get_or<std::string>(output, "trace_path", "trace.csv");
    cfg.summary_path = get_or<std::string>(output, "summary_path", "summary.json");
    cfg.samples_path = get_or<std::string>(output, "samples_path", "samples.csv");
    cfg.fit_path = get_or<std::string>(output, "fit_path", "fit.csv");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

namespace {

pinhole::SynthScenario parse_pinhole_params(const json& p) {
    pinhole::SynthScenario sc;
    sc.cam.fx = get_or<double>(p, "fx", 120.0);
    sc.cam.fy = get_or<double>(p, "fy", sc.cam.fx);
    sc.cam.width = get_or<double>(p, "width", 640.0);
    sc.cam.height = get_or<double>(p, "height", 480.0);
    sc.cam.cx = get_or<double>(p, "cx", sc.cam.width / 2);
    sc.cam.cy = get_or<double>(p, "cy", sc.cam.height / 2);
    sc.altitude = get_or<double>(p, "altitude", 10.0);
    sc.r_min = get_or<double>(p, "r_min", 2.0);
    sc.r_max = get_or<double>(p, "r_max", 20.0);
    sc.snap_pixels = get_or<bool>(p, "pixel_snap", true);
    sc.pixel_noise = get_or<double>(p, "pixel_noise", 0.0);
    sc.dropout = get_or<double>(p, "dropout", 0.0);
    sc.altitude_noise = get_or<double>(p, "altitude_noise", 0.0);
    sc.rot_noise = get_or<double>(p, "rot_noise", 0.0);
    sc.ego_tilt = get_or<double>(p, "ego_tilt", 0.0);
    sc.outlier_r_max = get_or<double>(p, "outlier_r_max", 60.0);
    sc.feature_spread = get_or<double>(p, "feature_spread", 3.0);
    sc.feature_tries = get_or<int>(p, "feature_tries", 32);
    sc.env_label = get_or<std::string>(p, "env", "");
    try {
        sc.cam.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    return sc;
}

formation::PerceptionModel build_perception(const RunConfig& cfg, const QuantizerConfig& quant) {
    const json params = json::parse(cfg.perception_params_json);
    if (cfg.perception_kind == "exact") return formation::PerceptionModel::exact();
    if (cfg.perception_kind == "bounded_quantizer_noise")
        return formation::PerceptionModel::bounded_noise(quant, 0);
    if (cfg.perception_kind == "lognormal") {
        formation::LognormalParams p;
        p.sigma = get_or<double>(params, "sigma", 0.05);
        p.sigma_growth = get_or<double>(params, "sigma_growth", 0.0);
        p.r_ref = get_or<double>(params, "r_ref", 1.0);
        p.sigma_theta = get_or<double>(params, "sigma_theta", 0.02);
        if (p.sigma < 0.0 || p.sigma_theta < 0.0) fail("perception: sigma values must be >= 0");
        return formation::PerceptionModel::lognormal_noise(p, 0);
    }
    if (cfg.perception_kind == "pinhole")
        return formation::PerceptionModel::pinhole_model(parse_pinhole_params(params), 0);
    fail("perception.kind must be exact | bounded_quantizer_noise | lognormal | pinhole");
}

}  // namespace

analysis::Scenario build_scenario(const RunConfig& cfg, std::ostream* warn) {
    if (cfg.n_agents < 1) fail("formation.n_agents must be >= 1");
    if (static_cast<int>(cfg.targets.size()) != cfg.n_agents)
        fail("formation.targets must list one [r, theta] per agent");

    QuantizerConfig quant{cfg.a, cfg.M, cfg.omega};
    try {
        quant.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }

    analysis::Scenario sc{.cfg = quant,
                          .targets = {},
                          .safety = {cfg.d_min, cfg.d_max},
                          .graph = {},
                          .perception = {},
                          .seed = cfg.seed,
                          .max_steps = cfg.max_steps,
                          .lift = cfg.lift,
                          .initial = {}};
    try {
        sc.safety.validate();
        sc.targets = formation::make_targets(quant, cfg.targets, warn);
        sc.graph = cfg.topology == "chain" ? gossip::Graph::chain(cfg.n_agents)
                                           : gossip::Graph{cfg.n_agents, cfg.edges};
        sc.graph.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }

    if (!analysis::quantizer_feasible(quant, sc.safety, sc.targets))
        fail("quantizer feasibility: no index window fits strictly between d_min and d_max for these targets "
             "(step radius too coarse)");

    if (cfg.initial) {
        if (static_cast<int>(cfg.initial->size()) != cfg.n_agents)
            fail("formation.initial must list one [r, theta] per agent");
        for (const PolarVec& e : *cfg.initial) {
            try {
                e.validate();
            } catch (const std::invalid_argument& err) {
                fail(std::string("formation.initial: ") + err.what());
            }
        }
        sc.initial = cfg.initial;
    }

    if (cfg.max_steps <= 0) fail("run.max_steps must be positive");
    if (cfg.n_runs < 1) fail("run.n_runs must be >= 1");

    sc.perception = build_perception(cfg, quant);
    return sc;
}

SampleSpec build_sample_spec(const RunConfig& cfg) {
    if (cfg.perception_kind != "pinhole") fail("sample-perception requires perception.kind == 'pinhole'");
    const json params = json::parse(cfg.perception_params_json);
    SampleSpec spec;
    spec.n_samples = get_or<int>(params, "n_samples", 10000);
    if (spec.n_samples < 1) fail("perception.params.n_samples must be >= 1");

    const pinhole::SynthScenario base = parse_pinhole_params(params);
    if (!params.contains("envs")) {
        spec.envs.push_back(base);
        return spec;
    }
    const json& envs = params.at("envs");
    if (!envs.is_array() || envs.empty()) fail("perception.params.envs must be a non-empty array");
    for (const auto& e : envs) {
        pinhole::SynthScenario sc = base;
        sc.env_label = require<std::string>(e, "label");
        sc.pixel_noise = get_or<double>(e, "pixel_noise", base.pixel_noise);
        sc.dropout = get_or<double>(e, "dropout", base.dropout);
        sc.rot_noise = get_or<double>(e, "rot_noise", base.rot_noise);
        sc.altitude_noise = get_or<double>(e, "altitude_noise", base.altitude_noise);
        spec.envs.push_back(std::move(sc));
    }
    return spec;
}

}  // namespace qform
