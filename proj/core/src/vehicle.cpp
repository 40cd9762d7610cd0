#include "aivsim/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aivsim::vehicle {

namespace {
constexpr double kArrivalEps = 1e-9;
}

std::string_view to_string(AgentState s) {
    switch (s) {
        case AgentState::Idle: return "idle";
        case AgentState::ToPickup: return "to_pickup";
        case AgentState::Carrying: return "carrying";
        case AgentState::ToStation: return "to_station";
        case AgentState::QueuedAtStation: return "queued";
        case AgentState::Charging: return "charging";
    }
    return "idle";
}

bool is_moving(AgentState s) {
    return s == AgentState::ToPickup || s == AgentState::Carrying || s == AgentState::ToStation;
}

bool legal_transition(AgentState from, AgentState to) {
    using S = AgentState;
    switch (from) {
        case S::Idle: return to == S::ToPickup || to == S::ToStation;
        case S::ToPickup: return to == S::Carrying;
        case S::Carrying: return to == S::Idle || to == S::ToStation;
        case S::ToStation: return to == S::QueuedAtStation || to == S::Charging;
        case S::QueuedAtStation: return to == S::Charging;
        case S::Charging: return to == S::Idle;
    }
    return false;
}

void transition(AivAgent& agent, AgentState to) {
    if (!legal_transition(agent.state, to)) {
        throw std::logic_error("agent " + std::to_string(agent.id) + ": illegal transition " +
                               std::string(to_string(agent.state)) + " -> " +
                               std::string(to_string(to)));
    }
    agent.state = to;
}

void BatteryModel::validate() const {
    if (!(discharge_per_m >= 0.0) || !(idle_discharge_per_s >= 0.0) || !(speed_exponent >= 0.0)) {
        throw std::invalid_argument("battery rates must be non-negative");
    }
    if (!(charge_rate_per_s > 0.0)) {
        throw std::invalid_argument("battery charge rate must be positive");
    }
}

double BatteryModel::drain_per_m(double speed_factor) const {
    return discharge_per_m * std::pow(speed_factor, speed_exponent);
}

void ActivityCounters::accumulate(AgentState s) {
    switch (s) {
        case AgentState::Idle: ++idle; break;
        case AgentState::ToPickup: ++to_pickup; break;
        case AgentState::Carrying: ++carrying; break;
        case AgentState::ToStation: ++to_station; break;
        case AgentState::QueuedAtStation: ++queued; break;
        case AgentState::Charging: ++charging; break;
    }
}

double distance_to(const AivAgent& agent, world::NodeIndex target,
                   const world::RoutingTable& routes) {
    return agent.to_anchor_m() + routes.distance(agent.anchor(), target);
}

void route_to(AivAgent& agent, world::NodeIndex target, const world::RoutingTable& routes) {
    const auto& path = routes.path(agent.anchor(), target);
    // path starts at the anchor, which is either where we stand or loc.next.
    agent.route.assign(path.nodes.begin() + 1, path.nodes.end());
}

void begin_next_mission(AivAgent& agent, Tick now, const world::RoutingTable& routes) {
    if (agent.queue.empty()) {
        throw std::logic_error("begin_next_mission with an empty queue");
    }
    transition(agent, AgentState::ToPickup);
    agent.active = agent.queue.front();
    agent.queue.pop_front();
    agent.active->t_assigned = now;
    agent.dwell = Dwell::None;
    route_to(agent, agent.active->pickup, routes);
}

namespace {

void drain_idle(AivAgent& agent, double dt, const BatteryModel& battery,
                std::vector<AgentEvent>& events) {
    if (battery.idle_discharge_per_s <= 0.0) {
        return;
    }
    agent.soc -= battery.idle_discharge_per_s * dt;
    if (agent.soc <= 0.0) {
        agent.soc = 0.0;
        agent.stranded = true;
        events.push_back({AgentEventKind::Stranded, agent.loc.node});
    }
}

void finish_loading(AivAgent& agent, const world::RoutingTable& routes,
                    std::vector<AgentEvent>& events) {
    agent.dwell = Dwell::None;
    transition(agent, AgentState::Carrying);
    events.push_back({AgentEventKind::Pickup, agent.loc.node});
    route_to(agent, agent.active->dropoff, routes);
}

void arrive(AivAgent& agent, const world::RoutingTable& routes, double handling_s,
            std::vector<AgentEvent>& events) {
    switch (agent.state) {
        case AgentState::ToPickup:
            if (!agent.active || agent.loc.node != agent.active->pickup) {
                throw std::logic_error("route ended away from the pickup point");
            }
            if (handling_s > 0.0) {
                agent.dwell = Dwell::Loading;
                agent.dwell_remaining_s = handling_s;
            } else {
                finish_loading(agent, routes, events);
            }
            break;
        case AgentState::Carrying:
            if (!agent.active || agent.loc.node != agent.active->dropoff) {
                throw std::logic_error("route ended away from the drop-off point");
            }
            if (handling_s > 0.0) {
                agent.dwell = Dwell::Unloading;
                agent.dwell_remaining_s = handling_s;
            } else {
                events.push_back({AgentEventKind::Drop, agent.loc.node});
            }
            break;
        case AgentState::ToStation:
            events.push_back({AgentEventKind::StationArrival, agent.loc.node});
            break;
        default:
            break;
    }
}

void run_dwell(AivAgent& agent, double seconds, const world::RoutingTable& routes,
               std::vector<AgentEvent>& events) {
    agent.dwell_remaining_s -= seconds;
    if (agent.dwell_remaining_s > kArrivalEps) {
        return;
    }
    agent.dwell_remaining_s = 0.0;
    if (agent.dwell == Dwell::Loading) {
        finish_loading(agent, routes, events);
    } else {
        agent.dwell = Dwell::None;
        events.push_back({AgentEventKind::Drop, agent.loc.node});
    }
}

/// Arrival with `spare_s` of the tick left over: a dwell starts using it.
void arrive_with(AivAgent& agent, const world::RoutingTable& routes, double handling_s,
                 double spare_s, std::vector<AgentEvent>& events) {
    arrive(agent, routes, handling_s, events);
    if (agent.dwell != Dwell::None && spare_s > kArrivalEps) {
        run_dwell(agent, spare_s, routes, events);
    }
}

}  // namespace

std::vector<AgentEvent> advance(AivAgent& agent, double dt, const world::RoutingTable& routes,
                                const BatteryModel& battery, double handling_s) {
    std::vector<AgentEvent> events;
    if (agent.stranded) {
        return events;
    }
    if (!is_moving(agent.state)) {
        if (agent.state == AgentState::Idle || agent.state == AgentState::QueuedAtStation) {
            drain_idle(agent, dt, battery, events);
        }
        return events;
    }
    if (agent.dwell != Dwell::None) {
        run_dwell(agent, dt, routes, events);
        return events;
    }

    const auto& graph = routes.graph();
    const double per_m = battery.drain_per_m(agent.speed_factor);
    const double speed = agent.nominal_speed * agent.speed_factor;
    double budget = speed * dt;
    while (true) {
        if (!agent.loc.next) {
            if (agent.route.empty()) {
                arrive_with(agent, routes, handling_s, budget / speed, events);
                break;
            }
            const auto next = agent.route.front();
            const auto length = graph.edge_length(agent.loc.node, next);
            if (!length) {
                throw world::RoutingError("route uses a missing edge " + graph.id(agent.loc.node) +
                                          "->" + graph.id(next));
            }
            agent.route.pop_front();
            agent.loc.next = next;
            agent.loc.offset_m = 0.0;
            agent.loc.edge_length_m = *length;
        }
        if (budget <= 0.0) {
            break;
        }
        const double remaining = agent.loc.edge_length_m - agent.loc.offset_m;
        const double step = std::min(budget, remaining);
        if (per_m > 0.0 && step * per_m > agent.soc) {
            agent.loc.offset_m += agent.soc / per_m;
            agent.soc = 0.0;
            agent.stranded = true;
            events.push_back({AgentEventKind::Stranded, agent.loc.node});
            break;
        }
        agent.soc = std::max(0.0, agent.soc - step * per_m);
        if (budget >= remaining - kArrivalEps) {
            budget -= remaining;
            agent.loc.node = *agent.loc.next;
            agent.loc.next.reset();
            agent.loc.offset_m = 0.0;
            agent.loc.edge_length_m = 0.0;
            events.push_back({AgentEventKind::NodeArrival, agent.loc.node});
            if (agent.route.empty()) {
                arrive_with(agent, routes, handling_s, budget / speed, events);
                break;
            }
        } else {
            agent.loc.offset_m += budget;
            break;
        }
    }
    return events;
}

bool charge_tick(AivAgent& agent, double dt, const BatteryModel& battery, double target) {
    if (agent.state != AgentState::Charging) {
        throw std::logic_error("charge_tick on an agent that is not charging");
    }
    if (agent.soc + battery.charge_rate_per_s * dt >= target - kArrivalEps) {
        agent.soc = std::clamp(std::max(agent.soc, target), 0.0, 1.0);
        transition(agent, AgentState::Idle);
        ++agent.counters.recharges_done;
        return true;
    }
    agent.soc = std::min(1.0, agent.soc + battery.charge_rate_per_s * dt);
    return false;
}

namespace {

double route_length(const AivAgent& agent, const world::CirculationGraph& g) {
    double d = agent.to_anchor_m();
    auto prev = agent.anchor();
    for (const auto n : agent.route) {
        d += g.edge_length(prev, n).value_or(0.0);
        prev = n;
    }
    return d;
}

}  // namespace

double remaining_workload_s(const AivAgent& agent, const WorkloadModel& model) {
    const auto& routes = *model.routes;
    const double speed = agent.nominal_speed * agent.speed_factor;
    const double h = model.handling_s;
    const double rate = model.battery->charge_rate_per_s;
    const double charge_s = std::max(0.0, agent.charge_target - agent.soc) / rate;
    const double travel_s = route_length(agent, routes.graph()) / speed;

    double work = 0.0;
    std::optional<world::NodeIndex> end;
    switch (agent.state) {
        case AgentState::Idle:
            end = agent.loc.node;
            break;
        case AgentState::ToPickup: {
            const auto& m = *agent.active;
            const double delivery = routes.distance(m.pickup, m.dropoff) / speed + h;
            work = agent.dwell == Dwell::Loading ? agent.dwell_remaining_s + delivery
                                                 : travel_s + h + delivery;
            end = m.dropoff;
            break;
        }
        case AgentState::Carrying:
            work = agent.dwell == Dwell::Unloading ? agent.dwell_remaining_s : travel_s + h;
            end = agent.active->dropoff;
            break;
        case AgentState::ToStation:
            work = travel_s + charge_s;
            end = agent.station;
            break;
        case AgentState::QueuedAtStation:
        case AgentState::Charging:
            work = charge_s;
            end = agent.station;
            break;
    }
    auto at = end.value_or(agent.anchor());
    for (const auto& m : agent.queue) {
        work += (routes.distance(at, m.pickup) + routes.distance(m.pickup, m.dropoff)) / speed + 2 * h;
        at = m.dropoff;
    }
    return work;
}

double availability(const AivAgent& agent, double t_ref_s, const WorkloadModel& model) {
    if (agent.idle_and_free()) {
        return 1.0;
    }
    const double w = remaining_workload_s(agent, model);
    return 1.0 - std::min(1.0, w / t_ref_s);
}

}  // namespace aivsim::vehicle
