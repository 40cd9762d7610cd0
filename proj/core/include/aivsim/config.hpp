#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aivsim/allocation.hpp"
#include "aivsim/vehicle.hpp"

namespace aivsim::sim {

/// Invalid configuration. `key()` names the offending dotted key when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct ArrivalSegment {
    double start_s = 0.0;
    double rate_per_s = 0.0;
    bool operator==(const ArrivalSegment&) const = default;
};

struct ArrivalProcess {
    enum class Kind { FixedInterval, PiecewisePoisson };
    Kind kind = Kind::FixedInterval;
    double period_s = 18.0;
    /// Piecewise-constant rates; the first segment must start at 0.
    std::vector<ArrivalSegment> segments;

    void validate() const;
    /// Long-run bags per second used for run-length estimates.
    double nominal_rate() const;
    bool operator==(const ArrivalProcess&) const = default;
};

struct ModelFiles {
    std::string cost = "models/cost_sc4.json";
    std::string recharge = "models/cost_recharge_sc5.json";
    std::string station = "models/station_sc6.json";
    std::string rate = "models/rate_sc7.json";
    std::string speed = "models/speed_sc8.json";
    bool operator==(const ModelFiles&) const = default;
};

struct BatteryConfig {
    bool enabled = true;
    vehicle::BatteryModel model;
    double initial_soc = 1.0;
};

struct Kinematics {
    double nominal_speed_mps = 1.0;
    double handling_s = 5.0;
};

struct SimConfig {
    std::uint64_t seed = 1;
    allocation::Scenario scenario = allocation::Scenario::Sc3;
    int n_bags = 100;
    int n_aivs = 5;
    double dt = 0.1;
    ArrivalProcess arrival;
    std::string graph = "graph_default.json";
    ModelFiles models;
    BatteryConfig battery;
    Kinematics kinematics;
    allocation::PolicyParams policy;
    /// 0 picks ten times an estimated baseline run length.
    double wall_limit_s = 0.0;
    /// Starting node ids, one per agent; empty for the default placement.
    std::vector<std::string> start_nodes;
    /// Directory relative paths are resolved against first; the shipped data
    /// directory is tried next.
    std::filesystem::path base_dir;

    /// Throws ConfigError naming the first invalid key.
    void validate() const;
    /// Battery as applied in the run (zero drain when disabled).
    vehicle::BatteryModel effective_battery() const;
};

/// Directory holding the shipped graph and rule bases: $AIVSIM_DATA_DIR when
/// set, else the location baked in at build time.
std::filesystem::path data_dir();

/// Resolves `file` against base_dir, then data_dir(). Throws ConfigError when
/// neither exists.
std::filesystem::path resolve_data_path(const SimConfig& cfg, const std::string& file,
                                        std::string_view key);

/// Flattened override "a.b.c" -> JSON value text. Values that do not parse as
/// JSON are taken as strings.
using Override = std::pair<std::string, std::string>;

/// Defaults, then the JSON document `json_text` (may be empty), then the
/// overrides. Unknown keys and type mismatches are errors.
SimConfig parse_config_text(std::string_view json_text, const std::vector<Override>& overrides = {},
                            const std::filesystem::path& base_dir = {});
SimConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<Override>& overrides = {});

/// Fully resolved config as a JSON document (base_dir omitted).
std::string to_json(const SimConfig& cfg, int indent = 2);

}  // namespace aivsim::sim
