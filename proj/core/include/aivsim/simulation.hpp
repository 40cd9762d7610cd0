#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "aivsim/allocation.hpp"
#include "aivsim/config.hpp"
#include "aivsim/event_log.hpp"
#include "aivsim/rng.hpp"
#include "aivsim/vehicle.hpp"
#include "aivsim/world.hpp"

namespace aivsim::sim {

/// Arrival instants in [t_prev, t_now). Fixed-interval bags fall on
/// multiples of the period. Poisson gaps are drawn from `rng` starting at
/// t_prev; the process is memoryless, so restarting at every window (and at
/// every rate change) yields the same law as one continuous draw.
std::vector<double> spawn_arrivals(const ArrivalProcess& proc, double t_prev, double t_now,
                                   Rng& rng);

/// Graph, routing table and rule bases shared read-only by every run that
/// uses the same files.
struct SimAssets {
    world::CirculationGraph graph;
    world::RoutingTable routes;
    allocation::FuzzyModels models;

    explicit SimAssets(const world::GraphSpec& spec);
    SimAssets(const SimAssets&) = delete;
    SimAssets& operator=(const SimAssets&) = delete;
};

/// Loads and validates the graph, then the rule bases the scenario needs,
/// with distance universes bound to the graph diameter. Throws ConfigError,
/// world::GraphError or fuzzy::ConfigError.
std::shared_ptr<const SimAssets> load_assets(const SimConfig& cfg);

struct Metrics {
    int n_bags = 0;
    int delivered = 0;
    bool completed = false;
    int faults = 0;
    int max_pending = 0;
    double sim_time_s = 0.0;
    std::vector<double> avg_mission_time_s;
    std::vector<int> missions_per_aiv;
    std::vector<double> work_rate_per_aiv;
    double recharge_time_s = 0.0;
    double recharge_wait_s = 0.0;
    int n_recharges = 0;
    std::vector<int> recharges_per_aiv;
    /// Over every completed mission of the run.
    double mean_mission_time_s = 0.0;
    double mean_charge_episode_s = 0.0;

    bool operator==(const Metrics&) const = default;
};

/// Integer tallies both the live engine and log replay reduce to.
struct RunTally {
    int n_bags = 0;
    Tick end_tick = 0;
    int max_pending = 0;
    int faults = 0;
    int delivered = 0;
    bool completed = false;
    std::vector<vehicle::ActivityCounters> agents;
    std::vector<int> charge_starts;
};

Metrics finalize(const RunTally& tally, double dt);

/// Rebuilds the metrics from a finished log alone. Throws IntegrityError on
/// a malformed log.
Metrics compute_metrics(const EventLog& log, const SimConfig& cfg);

class Engine {
public:
    Engine(const SimConfig& cfg, std::shared_ptr<const SimAssets> assets);

    /// Runs one tick through the fixed phase order. No-op once finished.
    void step();
    bool finished() const { return finished_; }
    Tick tick() const { return tick_; }
    double now_s() const { return static_cast<double>(tick_) * cfg_.dt; }

    const SimConfig& config() const { return cfg_; }
    const SimAssets& assets() const { return *assets_; }
    const std::vector<vehicle::AivAgent>& agents() const { return agents_; }
    const std::vector<world::StationState<AgentId>>& stations() const { return stations_; }
    const EventLog& log() const { return log_; }
    EventLog take_log() { return std::move(log_); }
    int pending() const { return arrived_ - picked_up_; }
    int arrived() const { return arrived_; }
    int delivered() const { return delivered_; }
    double wall_limit_s() const { return wall_limit_s_; }

    /// Digest of the full dynamic state, for replay checks.
    std::uint64_t state_hash() const;
    Metrics metrics() const;

private:
    allocation::AuctionContext context();
    void spawn(Tick k);
    void allocate(Tick k);
    void start_missions(Tick k);
    void idle_recharge_decisions(Tick k);
    void admit_waiting(Tick k);
    void move_agents(Tick k);
    void regulate_speeds(Tick k);
    void conclude(Tick k);

    void start_charging(vehicle::AivAgent& a, Tick k);
    void decide_and_route(vehicle::AivAgent& a, Tick k, bool after_drop);
    void on_drop(vehicle::AivAgent& a, Tick k);
    void on_station_arrival(vehicle::AivAgent& a, Tick k);
    world::StationState<AgentId>& station_state(world::NodeIndex n);

    SimConfig cfg_;
    std::shared_ptr<const SimAssets> assets_;
    allocation::Strategy strategy_;
    vehicle::BatteryModel battery_;
    double wall_limit_s_ = 0.0;
    std::vector<world::NodeIndex> exits_;

    std::vector<vehicle::AivAgent> agents_;
    std::vector<world::StationState<AgentId>> stations_;
    std::deque<vehicle::Mission> pending_;
    std::vector<AgentId> rotation_;
    std::vector<std::optional<double>> last_decided_soc_;
    std::vector<Tick> charge_started_;
    std::vector<int> charge_starts_;

    Rng arrivals_rng_;
    std::vector<Rng> bid_streams_;
    std::map<std::pair<double, double>, std::optional<double>> speed_memo_;

    Tick episode_ticks_ = 0;
    int episodes_ = 0;

    EventLog log_;
    Tick tick_ = 0;
    bool finished_ = false;
    bool completed_ = false;
    int arrived_ = 0;
    int picked_up_ = 0;
    int delivered_ = 0;
    int max_pending_ = 0;
    int faults_ = 0;
};

struct RunResult {
    Metrics metrics;
    EventLog log;
};

RunResult run(const SimConfig& cfg);
RunResult run(const SimConfig& cfg, std::shared_ptr<const SimAssets> assets);

/// Run-length guard used when wall_limit_s is 0: ten times an estimate of
/// a rotation-allocated run of the same load.
double default_wall_limit_s(const SimConfig& cfg, const world::RoutingTable& routes);

}  // namespace aivsim::sim
