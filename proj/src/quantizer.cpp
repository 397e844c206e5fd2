#include "qform/quantizer.hpp"

#include <json.hpp>

namespace qform {

std::string quantizer_to_json(const QuantizerConfig& cfg) {
    nlohmann::json j;
    j["a"] = cfg.a;
    j["M"] = cfg.M;
    j["omega"] = cfg.omega;
    return j.dump();
}

QuantizerConfig quantizer_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    QuantizerConfig cfg;
    cfg.a = j.at("a").get<double>();
    cfg.M = j.at("M").get<int>();
    cfg.omega = j.at("omega").get<double>();
    cfg.validate();
    return cfg;
}

}  // namespace qform
