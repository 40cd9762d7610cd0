#include "aivsim/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#ifndef AIVSIM_DATA_DIR
#define AIVSIM_DATA_DIR "data"
#endif

namespace aivsim::sim {

using Json = nlohmann::ordered_json;

void ArrivalProcess::validate() const {
    if (kind == Kind::FixedInterval) {
        if (!(period_s > 0.0) || !std::isfinite(period_s)) {
            throw ConfigError("arrival.period_s", "must be a positive number of seconds");
        }
        return;
    }
    if (segments.empty()) {
        throw ConfigError("arrival.segments", "piecewise-poisson needs at least one segment");
    }
    if (segments.front().start_s != 0.0) {
        throw ConfigError("arrival.segments", "first segment must start at 0");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (!(segments[i].rate_per_s > 0.0) || !std::isfinite(segments[i].rate_per_s)) {
            throw ConfigError("arrival.segments", "rates must be positive");
        }
        if (i > 0 && !(segments[i].start_s > segments[i - 1].start_s)) {
            throw ConfigError("arrival.segments", "segments must be in increasing time order");
        }
    }
}

double ArrivalProcess::nominal_rate() const {
    if (kind == Kind::FixedInterval) {
        return 1.0 / period_s;
    }
    double lowest = segments.front().rate_per_s;
    for (const auto& s : segments) {
        lowest = std::min(lowest, s.rate_per_s);
    }
    return lowest;
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("dt", "must be positive");
    }
    if (n_bags < 0) {
        throw ConfigError("n_bags", "must be >= 0");
    }
    if (n_aivs < 1) {
        throw ConfigError("n_aivs", "must be >= 1");
    }
    arrival.validate();
    try {
        battery.model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("battery", e.what());
    }
    if (!(battery.initial_soc > 0.0 && battery.initial_soc <= 1.0)) {
        throw ConfigError("battery.initial_soc", "must lie in (0, 1]");
    }
    if (!(kinematics.nominal_speed_mps > 0.0)) {
        throw ConfigError("kinematics.nominal_speed_mps", "must be positive");
    }
    if (!(kinematics.handling_s >= 0.0)) {
        throw ConfigError("kinematics.handling_s", "must be >= 0");
    }
    try {
        policy.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("policy", e.what());
    }
    if (!(wall_limit_s >= 0.0)) {
        throw ConfigError("wall_limit_s", "must be >= 0");
    }
    if (!start_nodes.empty() && static_cast<int>(start_nodes.size()) != n_aivs) {
        throw ConfigError("start_nodes", "needs one node per AIV");
    }
}

vehicle::BatteryModel SimConfig::effective_battery() const {
    auto b = battery.model;
    if (!battery.enabled) {
        b.discharge_per_m = 0.0;
        b.idle_discharge_per_s = 0.0;
    }
    return b;
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("AIVSIM_DATA_DIR"); env && *env) {
        return env;
    }
    return AIVSIM_DATA_DIR;
}

std::filesystem::path resolve_data_path(const SimConfig& cfg, const std::string& file,
                                        std::string_view key) {
    const std::filesystem::path p(file);
    if (p.is_absolute()) {
        if (std::filesystem::exists(p)) {
            return p;
        }
    } else {
        if (!cfg.base_dir.empty() && std::filesystem::exists(cfg.base_dir / p)) {
            return cfg.base_dir / p;
        }
        if (std::filesystem::exists(data_dir() / p)) {
            return data_dir() / p;
        }
        if (cfg.base_dir.empty() && std::filesystem::exists(p)) {
            return p;
        }
    }
    throw ConfigError(std::string(key), "file not found: " + file);
}

namespace {

Json to_doc(const SimConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["scenario"] = allocation::to_string(c.scenario);
    j["n_bags"] = c.n_bags;
    j["n_aivs"] = c.n_aivs;
    j["dt"] = c.dt;
    Json arrival;
    arrival["kind"] = c.arrival.kind == ArrivalProcess::Kind::FixedInterval ? "fixed_interval"
                                                                            : "piecewise_poisson";
    arrival["period_s"] = c.arrival.period_s;
    arrival["segments"] = Json::array();
    for (const auto& s : c.arrival.segments) {
        arrival["segments"].push_back({{"start_s", s.start_s}, {"rate_per_s", s.rate_per_s}});
    }
    j["arrival"] = arrival;
    j["graph"] = c.graph;
    j["models"] = {{"cost", c.models.cost},
                   {"recharge", c.models.recharge},
                   {"station", c.models.station},
                   {"rate", c.models.rate},
                   {"speed", c.models.speed}};
    const auto& b = c.battery.model;
    j["battery"] = {{"enabled", c.battery.enabled},
                    {"discharge_per_m", b.discharge_per_m},
                    {"idle_discharge_per_s", b.idle_discharge_per_s},
                    {"charge_rate_per_s", b.charge_rate_per_s},
                    {"speed_exponent", b.speed_exponent},
                    {"initial_soc", c.battery.initial_soc}};
    j["kinematics"] = {{"nominal_speed_mps", c.kinematics.nominal_speed_mps},
                       {"handling_s", c.kinematics.handling_s}};
    const auto& p = c.policy;
    j["policy"] = {{"recharge_soc_threshold", p.recharge_soc_threshold},
                   {"recharge_decision_cut", p.recharge_decision_cut},
                   {"full_target_snap", p.full_target_snap},
                   {"partial_target", p.partial_target},
                   {"p_max", p.p_max},
                   {"w_ref_s", p.w_ref_s},
                   {"d_safe_m", p.d_safe_m},
                   {"t_ref_s", p.t_ref_s},
                   {"mean_episode_prior_s", p.mean_episode_prior_s}};
    j["wall_limit_s"] = c.wall_limit_s;
    j["start_nodes"] = c.start_nodes;
    return j;
}

const char* type_name(const Json& v) {
    if (v.is_boolean()) return "a boolean";
    if (v.is_number_integer()) return "an integer";
    if (v.is_number()) return "a number";
    if (v.is_string()) return "a string";
    if (v.is_array()) return "an array";
    if (v.is_object()) return "an object";
    return "null";
}

void check_type(const Json& expected, const Json& given, const std::string& key) {
    bool ok = false;
    if (expected.is_number_integer()) {
        ok = given.is_number_integer() && (expected.is_number_unsigned() ? given >= 0 : true);
    } else if (expected.is_number_float()) {
        ok = given.is_number();
    } else if (expected.is_boolean()) {
        ok = given.is_boolean();
    } else if (expected.is_string()) {
        ok = given.is_string();
    } else if (expected.is_array()) {
        ok = given.is_array();
    } else if (expected.is_object()) {
        ok = given.is_object();
    }
    if (!ok) {
        throw ConfigError(key, std::string("expected ") + type_name(expected) + ", got " +
                                   type_name(given));
    }
}

void merge(Json& base, const Json& overlay, const std::string& prefix) {
    for (const auto& [k, v] : overlay.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (!base.contains(k)) {
            throw ConfigError(key, "unknown key");
        }
        auto& slot = base[k];
        check_type(slot, v, key);
        if (slot.is_object()) {
            merge(slot, v, key);
        } else if (slot.is_number_float()) {
            slot = v.get<double>();
        } else {
            slot = v;
        }
    }
}

void apply_override(Json& doc, const Override& o) {
    Json value;
    try {
        value = Json::parse(o.second);
    } catch (const nlohmann::json::parse_error&) {
        value = o.second;
    }
    Json* slot = &doc;
    std::string prefix;
    std::stringstream parts(o.first);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) {
        path.push_back(part);
    }
    if (path.empty()) {
        throw ConfigError(o.first, "empty key");
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        prefix += (i ? "." : "") + path[i];
        if (!slot->is_object() || !slot->contains(path[i]) || !(*slot)[path[i]].is_object()) {
            throw ConfigError(o.first, "unknown key");
        }
        slot = &(*slot)[path[i]];
    }
    Json overlay;
    overlay[path.back()] = value;
    // Scalars given as bare words ("sc4") arrive as strings; a numeric field
    // given a non-JSON word is a type mismatch reported by merge.
    merge(*slot, overlay, prefix);
}

template <typename T>
T get(const Json& j, const char* key, const std::string& prefix) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(prefix.empty() ? key : prefix + "." + key, e.what());
    }
}

SimConfig from_doc(const Json& j) {
    SimConfig c;
    c.seed = get<std::uint64_t>(j, "seed", "");
    try {
        c.scenario = allocation::parse_scenario(get<std::string>(j, "scenario", ""));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("scenario", e.what());
    }
    c.n_bags = get<int>(j, "n_bags", "");
    c.n_aivs = get<int>(j, "n_aivs", "");
    c.dt = get<double>(j, "dt", "");

    const auto& a = j.at("arrival");
    const auto kind = get<std::string>(a, "kind", "arrival");
    if (kind == "fixed_interval") {
        c.arrival.kind = ArrivalProcess::Kind::FixedInterval;
    } else if (kind == "piecewise_poisson") {
        c.arrival.kind = ArrivalProcess::Kind::PiecewisePoisson;
    } else {
        throw ConfigError("arrival.kind", "expected fixed_interval or piecewise_poisson");
    }
    c.arrival.period_s = get<double>(a, "period_s", "arrival");
    for (const auto& s : a.at("segments")) {
        if (!s.is_object() || !s.contains("start_s") || !s.contains("rate_per_s") ||
            !s["start_s"].is_number() || !s["rate_per_s"].is_number() || s.size() != 2) {
            throw ConfigError("arrival.segments",
                              "each segment needs numeric start_s and rate_per_s");
        }
        c.arrival.segments.push_back({s["start_s"].get<double>(), s["rate_per_s"].get<double>()});
    }

    c.graph = get<std::string>(j, "graph", "");
    const auto& m = j.at("models");
    c.models.cost = get<std::string>(m, "cost", "models");
    c.models.recharge = get<std::string>(m, "recharge", "models");
    c.models.station = get<std::string>(m, "station", "models");
    c.models.rate = get<std::string>(m, "rate", "models");
    c.models.speed = get<std::string>(m, "speed", "models");

    const auto& b = j.at("battery");
    c.battery.enabled = get<bool>(b, "enabled", "battery");
    c.battery.model.discharge_per_m = get<double>(b, "discharge_per_m", "battery");
    c.battery.model.idle_discharge_per_s = get<double>(b, "idle_discharge_per_s", "battery");
    c.battery.model.charge_rate_per_s = get<double>(b, "charge_rate_per_s", "battery");
    c.battery.model.speed_exponent = get<double>(b, "speed_exponent", "battery");
    c.battery.initial_soc = get<double>(b, "initial_soc", "battery");

    const auto& k = j.at("kinematics");
    c.kinematics.nominal_speed_mps = get<double>(k, "nominal_speed_mps", "kinematics");
    c.kinematics.handling_s = get<double>(k, "handling_s", "kinematics");

    const auto& p = j.at("policy");
    c.policy.recharge_soc_threshold = get<double>(p, "recharge_soc_threshold", "policy");
    c.policy.recharge_decision_cut = get<double>(p, "recharge_decision_cut", "policy");
    c.policy.full_target_snap = get<double>(p, "full_target_snap", "policy");
    c.policy.partial_target = get<double>(p, "partial_target", "policy");
    c.policy.p_max = get<double>(p, "p_max", "policy");
    c.policy.w_ref_s = get<double>(p, "w_ref_s", "policy");
    c.policy.d_safe_m = get<double>(p, "d_safe_m", "policy");
    c.policy.t_ref_s = get<double>(p, "t_ref_s", "policy");
    c.policy.mean_episode_prior_s = get<double>(p, "mean_episode_prior_s", "policy");

    c.wall_limit_s = get<double>(j, "wall_limit_s", "");
    for (const auto& n : j.at("start_nodes")) {
        if (!n.is_string()) {
            throw ConfigError("start_nodes", "expected node id strings");
        }
        c.start_nodes.push_back(n.get<std::string>());
    }
    return c;
}

}  // namespace

SimConfig parse_config_text(std::string_view json_text, const std::vector<Override>& overrides,
                            const std::filesystem::path& base_dir) {
    Json doc = to_doc(SimConfig{});
    if (!json_text.empty()) {
        Json file;
        try {
            file = Json::parse(json_text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
        }
        if (!file.is_object()) {
            throw ConfigError("", "config must be a JSON object");
        }
        merge(doc, file, "");
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    auto cfg = from_doc(doc);
    cfg.base_dir = base_dir;
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<Override>& overrides) {
    if (!file) {
        return parse_config_text("", overrides);
    }
    std::ifstream in(*file);
    if (!in) {
        throw ConfigError("config", "cannot open " + file->string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), overrides, file->parent_path());
}

std::string to_json(const SimConfig& cfg, int indent) { return to_doc(cfg).dump(indent); }

}  // namespace aivsim::sim
