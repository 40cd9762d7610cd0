#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "aivsim/world.hpp"

namespace aivsim {

/// Simulation clock in whole ticks; seconds = tick * dt.
using Tick = std::int64_t;
using AgentId = int;

namespace vehicle {

enum class AgentState { Idle, ToPickup, Carrying, ToStation, QueuedAtStation, Charging };

std::string_view to_string(AgentState s);
bool is_moving(AgentState s);
bool legal_transition(AgentState from, AgentState to);

struct BatteryModel {
    double discharge_per_m = 1.6e-3;
    double idle_discharge_per_s = 0.0;
    double charge_rate_per_s = 0.04;
    double speed_exponent = 2.0;

    /// Throws std::invalid_argument on negative rates or a non-positive
    /// charge rate.
    void validate() const;
    double drain_per_m(double speed_factor) const;
};

struct Mission {
    int bag = 0;
    world::NodeIndex pickup;
    world::NodeIndex dropoff;
    Tick t_arrival = 0;
    Tick t_awarded = 0;
    /// Set when the agent starts working on the mission.
    std::optional<Tick> t_assigned;
    std::optional<Tick> t_pickup;
    std::optional<Tick> t_drop;
};

/// Position: at `node`, or on the edge node -> next at `offset_m`.
struct Location {
    world::NodeIndex node;
    std::optional<world::NodeIndex> next;
    double offset_m = 0.0;
    double edge_length_m = 0.0;

    bool on_edge() const { return next.has_value(); }
};

enum class Dwell { None, Loading, Unloading };

/// Ticks spent in each state.
struct ActivityCounters {
    Tick idle = 0;
    Tick to_pickup = 0;
    Tick carrying = 0;
    Tick to_station = 0;
    Tick queued = 0;
    Tick charging = 0;
    int missions_done = 0;
    int recharges_done = 0;
    std::vector<Tick> mission_durations;

    Tick busy() const { return to_pickup + carrying; }
    Tick total() const { return idle + to_pickup + carrying + to_station + queued + charging; }
    void accumulate(AgentState s);
};

struct AivAgent {
    AgentId id = 0;
    AgentState state = AgentState::Idle;
    Location loc;
    /// Nodes still to visit after loc.next (or after loc.node when parked).
    std::deque<world::NodeIndex> route;
    double nominal_speed = 1.0;
    double speed_factor = 1.0;
    double soc = 1.0;
    std::deque<Mission> queue;
    std::optional<Mission> active;
    Dwell dwell = Dwell::None;
    double dwell_remaining_s = 0.0;
    std::optional<world::NodeIndex> station;
    double charge_target = 1.0;
    bool stranded = false;
    ActivityCounters counters;

    /// Node the agent is at, or heading to when on an edge.
    world::NodeIndex anchor() const { return loc.next.value_or(loc.node); }
    /// Meters left to reach anchor().
    double to_anchor_m() const { return loc.on_edge() ? loc.edge_length_m - loc.offset_m : 0.0; }
    bool idle_and_free() const { return state == AgentState::Idle && queue.empty() && !stranded; }
};

/// Changes state, rejecting transitions the agent life cycle forbids.
void transition(AivAgent& agent, AgentState to);

enum class AgentEventKind { NodeArrival, Pickup, Drop, StationArrival, Stranded };

struct AgentEvent {
    AgentEventKind kind;
    world::NodeIndex node;
};

/// Shortest-path distance from the agent's position to `target`.
double distance_to(const AivAgent& agent, world::NodeIndex target, const world::RoutingTable& routes);

/// Replaces the route with the shortest path from the agent's position to
/// `target`.
void route_to(AivAgent& agent, world::NodeIndex target, const world::RoutingTable& routes);

/// Takes the mission at the head of the queue and starts heading for its
/// pickup point.
void begin_next_mission(AivAgent& agent, Tick now, const world::RoutingTable& routes);

/// Moves the agent along its route for `dt` seconds, or runs down a
/// loading/unloading dwell. Energy is drawn per meter, scaled by
/// speed_factor^speed_exponent. Reaching the pickup point starts loading;
/// reaching the drop-off starts unloading; the Drop event leaves the agent in
/// Carrying for the caller to route onward. A battery that would fall below
/// zero stops the agent at the point of exhaustion and raises one Stranded
/// event.
std::vector<AgentEvent> advance(AivAgent& agent, double dt, const world::RoutingTable& routes,
                                const BatteryModel& battery, double handling_s);

/// One charging step toward `target`. Returns true when the target is reached
/// this step; the agent is then Idle and the caller frees the bay.
bool charge_tick(AivAgent& agent, double dt, const BatteryModel& battery, double target);

struct WorkloadModel {
    const world::RoutingTable* routes = nullptr;
    const BatteryModel* battery = nullptr;
    double handling_s = 5.0;
};

/// Seconds of committed work left: current route and dwell, queued missions
/// and any pending charge.
double remaining_workload_s(const AivAgent& agent, const WorkloadModel& model);

/// 1 for an idle agent, otherwise 1 - min(1, remaining workload / t_ref).
double availability(const AivAgent& agent, double t_ref_s, const WorkloadModel& model);

}  // namespace vehicle
}  // namespace aivsim
