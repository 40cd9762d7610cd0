#include "aivsim/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace aivsim::sim {

using allocation::Scenario;
using vehicle::AgentState;
using vehicle::AivAgent;
using world::NodeIndex;

namespace {
constexpr double kWindowEps = 1e-9;
}

std::vector<double> spawn_arrivals(const ArrivalProcess& proc, double t_prev, double t_now,
                                   Rng& rng) {
    std::vector<double> out;
    if (!(t_now > t_prev)) {
        return out;
    }
    if (proc.kind == ArrivalProcess::Kind::FixedInterval) {
        // The same epsilon on both window ends puts every multiple of the
        // period in exactly one of a sequence of adjacent windows.
        const double first = std::ceil((t_prev - kWindowEps) / proc.period_s);
        for (double j = std::max(0.0, first);; j += 1.0) {
            const double t = j * proc.period_s;
            if (!(t < t_now - kWindowEps)) {
                break;
            }
            out.push_back(t);
        }
        return out;
    }
    const auto& segs = proc.segments;
    double t = t_prev;
    while (true) {
        std::size_t i = 0;
        while (i + 1 < segs.size() && segs[i + 1].start_s <= t) {
            ++i;
        }
        const double boundary =
            i + 1 < segs.size() ? segs[i + 1].start_s : std::numeric_limits<double>::infinity();
        const double next = t + rng.exponential(segs[i].rate_per_s);
        if (boundary < t_now && next >= boundary) {
            t = boundary;
            continue;
        }
        if (next >= t_now) {
            break;
        }
        out.push_back(next);
        t = next;
    }
    return out;
}

SimAssets::SimAssets(const world::GraphSpec& spec) : graph(spec), routes(graph) {}

std::shared_ptr<const SimAssets> load_assets(const SimConfig& cfg) {
    const auto spec = world::load_graph(resolve_data_path(cfg, cfg.graph, "graph"));
    const auto violations = world::validate_graph(spec);
    if (!violations.empty()) {
        std::string msg = "invalid circulation graph:";
        for (const auto& v : violations) {
            msg += "\n  " + v;
        }
        throw world::GraphError(msg);
    }
    auto assets = std::make_shared<SimAssets>(spec);
    const fuzzy::ScaleBindings bindings{{"d_max", assets->routes.diameter()}};
    const int n = static_cast<int>(cfg.scenario);
    auto load = [&](const std::string& file, const char* key) {
        return std::make_shared<const fuzzy::FuzzyModel>(
            fuzzy::load_model(resolve_data_path(cfg, file, key), bindings));
    };
    if (n >= 4) assets->models.cost = load(cfg.models.cost, "models.cost");
    if (n >= 5) assets->models.recharge = load(cfg.models.recharge, "models.recharge");
    if (n >= 6) assets->models.station = load(cfg.models.station, "models.station");
    if (n >= 7) assets->models.rate = load(cfg.models.rate, "models.rate");
    if (n >= 8) assets->models.speed = load(cfg.models.speed, "models.speed");
    return assets;
}

double default_wall_limit_s(const SimConfig& cfg, const world::RoutingTable& routes) {
    const auto& g = routes.graph();
    const auto entry = g.entry();
    double loop = 0.0;
    const auto exits = g.exits();
    for (const auto x : exits) {
        loop += routes.distance(entry, x) + routes.distance(x, entry);
    }
    loop /= static_cast<double>(exits.size());
    const double cycle = loop / cfg.kinematics.nominal_speed_mps + 2 * cfg.kinematics.handling_s;
    const double feed = cfg.n_bags / cfg.arrival.nominal_rate();
    const double work = cfg.n_bags * cycle / cfg.n_aivs;
    return 10.0 * (feed + work + cycle);
}

// ---------------------------------------------------------------------------

Metrics finalize(const RunTally& tally, double dt) {
    Metrics m;
    m.n_bags = tally.n_bags;
    m.delivered = tally.delivered;
    m.completed = tally.completed;
    m.faults = tally.faults;
    m.max_pending = tally.max_pending;
    m.sim_time_s = static_cast<double>(tally.end_tick) * dt;
    Tick mission_ticks = 0;
    Tick charging = 0;
    Tick queued = 0;
    int missions = 0;
    for (std::size_t i = 0; i < tally.agents.size(); ++i) {
        const auto& c = tally.agents[i];
        const Tick sum = std::accumulate(c.mission_durations.begin(), c.mission_durations.end(), Tick{0});
        const int n = static_cast<int>(c.mission_durations.size());
        m.missions_per_aiv.push_back(c.missions_done);
        m.avg_mission_time_s.push_back(n ? static_cast<double>(sum) * dt / n : 0.0);
        m.work_rate_per_aiv.push_back(
            tally.end_tick ? static_cast<double>(c.busy()) / static_cast<double>(tally.end_tick)
                           : 0.0);
        const int starts = i < tally.charge_starts.size() ? tally.charge_starts[i] : 0;
        m.recharges_per_aiv.push_back(starts);
        m.n_recharges += starts;
        mission_ticks += sum;
        missions += n;
        charging += c.charging;
        queued += c.queued;
    }
    m.recharge_time_s = static_cast<double>(charging) * dt;
    m.recharge_wait_s = static_cast<double>(queued) * dt;
    m.mean_mission_time_s = missions ? static_cast<double>(mission_ticks) * dt / missions : 0.0;
    m.mean_charge_episode_s = m.n_recharges ? m.recharge_time_s / m.n_recharges : 0.0;
    return m;
}

namespace {

void add_ticks(vehicle::ActivityCounters& c, AgentState s, Tick n) {
    switch (s) {
        case AgentState::Idle: c.idle += n; break;
        case AgentState::ToPickup: c.to_pickup += n; break;
        case AgentState::Carrying: c.carrying += n; break;
        case AgentState::ToStation: c.to_station += n; break;
        case AgentState::QueuedAtStation: c.queued += n; break;
        case AgentState::Charging: c.charging += n; break;
    }
}

}  // namespace

Metrics compute_metrics(const EventLog& log, const SimConfig& cfg) {
    struct Track {
        AgentState state = AgentState::Idle;
        Tick since = 0;
        std::optional<Tick> assigned;
    };
    const auto n = static_cast<std::size_t>(cfg.n_aivs);
    RunTally tally;
    tally.n_bags = cfg.n_bags;
    tally.agents.resize(n);
    tally.charge_starts.assign(n, 0);
    std::vector<Track> track(n);
    std::unordered_map<std::int64_t, int> open_cfp;  // bag -> bids seen
    int pending = 0;
    Tick current = 0;
    bool ended = false;

    auto agent_of = [&](const EventRecord& r) -> std::size_t {
        const auto id = r.integer("agent");
        if (id < 0 || static_cast<std::size_t>(id) >= n) {
            throw IntegrityError("agent id " + std::to_string(id) + " out of range");
        }
        return static_cast<std::size_t>(id);
    };
    auto move = [&](std::size_t a, AgentState to, Tick k) {
        add_ticks(tally.agents[a], track[a].state, k - track[a].since);
        track[a].state = to;
        track[a].since = k;
    };

    for (const auto& r : log.records()) {
        if (ended) {
            throw IntegrityError("records after the end marker");
        }
        if (r.tick != current) {
            tally.max_pending = std::max(tally.max_pending, pending);
            current = r.tick;
        }
        switch (r.kind) {
            case EventKind::Arrival:
                ++pending;
                break;
            case EventKind::Cfp:
                open_cfp[r.integer("bag")] = 0;
                break;
            case EventKind::Bid: {
                const auto it = open_cfp.find(r.integer("bag"));
                if (it == open_cfp.end()) {
                    throw IntegrityError("bid without a call for proposals");
                }
                ++it->second;
                break;
            }
            case EventKind::Award: {
                const auto it = open_cfp.find(r.integer("bag"));
                if (it == open_cfp.end() || it->second == 0) {
                    throw IntegrityError("award for bag " + std::to_string(r.integer("bag")) +
                                         " without its call for proposals and bids");
                }
                open_cfp.erase(it);
                break;
            }
            case EventKind::MissionStart: {
                const auto a = agent_of(r);
                move(a, AgentState::ToPickup, r.tick);
                track[a].assigned = r.tick;
                break;
            }
            case EventKind::Pickup:
                move(agent_of(r), AgentState::Carrying, r.tick);
                --pending;
                break;
            case EventKind::Drop: {
                const auto a = agent_of(r);
                if (!track[a].assigned) {
                    throw IntegrityError("drop without a mission start");
                }
                move(a, AgentState::Idle, r.tick);
                auto& c = tally.agents[a];
                c.mission_durations.push_back(r.tick + 1 - *track[a].assigned);
                ++c.missions_done;
                ++tally.delivered;
                track[a].assigned.reset();
                break;
            }
            case EventKind::StationSelect:
                move(agent_of(r), AgentState::ToStation, r.tick);
                break;
            case EventKind::StationArrive:
                if (r.flag("queued")) {
                    move(agent_of(r), AgentState::QueuedAtStation, r.tick);
                }
                break;
            case EventKind::ChargeStart: {
                const auto a = agent_of(r);
                move(a, AgentState::Charging, r.tick);
                ++tally.charge_starts[a];
                break;
            }
            case EventKind::ChargeEnd: {
                const auto a = agent_of(r);
                move(a, AgentState::Idle, r.tick);
                ++tally.agents[a].recharges_done;
                break;
            }
            case EventKind::Fault:
                ++tally.faults;
                break;
            case EventKind::End:
                ended = true;
                tally.end_tick = r.tick;
                tally.completed = r.flag("completed");
                break;
            case EventKind::RechargeDecision:
            case EventKind::SpeedChange:
                break;
        }
    }
    if (!ended) {
        throw IntegrityError("log has no end marker");
    }
    tally.max_pending = std::max(tally.max_pending, pending);
    for (std::size_t a = 0; a < n; ++a) {
        move(a, track[a].state, tally.end_tick);
    }
    return finalize(tally, log.dt());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<NodeIndex> default_start_nodes(const world::RoutingTable& routes, int n) {
    const auto& g = routes.graph();
    const auto entry = g.entry();
    std::vector<std::pair<double, NodeIndex>> ranked;
    for (const auto w : g.nodes_of_kind(world::NodeKind::Waypoint)) {
        if (routes.reachable(w, entry)) {
            ranked.emplace_back(routes.distance(w, entry), w);
        }
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<NodeIndex> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(ranked.empty() ? entry : ranked[static_cast<std::size_t>(i) % ranked.size()].second);
    }
    return out;
}

}  // namespace

Engine::Engine(const SimConfig& cfg, std::shared_ptr<const SimAssets> assets)
    : cfg_(cfg),
      assets_(std::move(assets)),
      strategy_(allocation::Strategy::for_scenario(cfg.scenario)),
      battery_(cfg.effective_battery()),
      arrivals_rng_(cfg.seed, "arrivals"),
      log_(cfg.dt) {
    cfg_.validate();
    const auto& routes = assets_->routes;
    const auto& g = assets_->graph;
    wall_limit_s_ = cfg_.wall_limit_s > 0.0 ? cfg_.wall_limit_s : default_wall_limit_s(cfg_, routes);
    exits_ = g.exits();
    for (const auto s : g.stations()) {
        stations_.emplace_back(s);
    }

    std::vector<NodeIndex> starts;
    if (cfg_.start_nodes.empty()) {
        starts = default_start_nodes(routes, cfg_.n_aivs);
    } else {
        for (const auto& id : cfg_.start_nodes) {
            const auto node = g.find(id);
            if (!node) {
                throw ConfigError("start_nodes", "unknown node '" + id + "'");
            }
            starts.push_back(*node);
        }
    }
    for (int i = 0; i < cfg_.n_aivs; ++i) {
        AivAgent a;
        a.id = i;
        a.loc.node = starts[static_cast<std::size_t>(i)];
        a.nominal_speed = cfg_.kinematics.nominal_speed_mps;
        a.soc = cfg_.battery.initial_soc;
        agents_.push_back(std::move(a));
        rotation_.push_back(i);
        bid_streams_.emplace_back(cfg_.seed, "sc1_bids", static_cast<std::uint64_t>(i));
    }
    last_decided_soc_.assign(agents_.size(), std::nullopt);
    charge_started_.assign(agents_.size(), 0);
    charge_starts_.assign(agents_.size(), 0);
}

allocation::AuctionContext Engine::context() {
    allocation::AuctionContext ctx;
    ctx.now = tick_;
    ctx.pending_bags = pending();
    ctx.routes = &assets_->routes;
    ctx.params = &cfg_.policy;
    ctx.models = &assets_->models;
    ctx.workload = {&assets_->routes, &battery_, cfg_.kinematics.handling_s};
    ctx.rotation = rotation_;
    ctx.bid_streams = bid_streams_;
    ctx.speed_memo = &speed_memo_;

    const double mean_episode = episodes_ ? static_cast<double>(episode_ticks_) * cfg_.dt / episodes_
                                          : cfg_.policy.mean_episode_prior_s;
    for (const auto& st : stations_) {
        int en_route = 0;
        for (const auto& a : agents_) {
            if (a.state == AgentState::ToStation && a.station == st.station()) {
                ++en_route;
            }
        }
        double availability = 1.0;
        if (st.occupant() || !st.waiting().empty() || en_route > 0) {
            double remaining = 0.0;
            if (st.occupant()) {
                const auto& occ = agents_[static_cast<std::size_t>(*st.occupant())];
                remaining = std::max(0.0, occ.charge_target - occ.soc) / battery_.charge_rate_per_s;
            }
            const double load =
                remaining + static_cast<double>(st.waiting().size() + en_route) * mean_episode;
            availability = std::max(0.0, 1.0 - load / cfg_.policy.w_ref_s);
        }
        ctx.stations.push_back({st.station(), availability});
    }
    return ctx;
}

world::StationState<AgentId>& Engine::station_state(NodeIndex n) {
    for (auto& st : stations_) {
        if (st.station() == n) {
            return st;
        }
    }
    throw std::logic_error("no charging station at node " + assets_->graph.id(n));
}

void Engine::step() {
    if (finished_) {
        return;
    }
    const Tick k = tick_;
    spawn(k);
    allocate(k);
    start_missions(k);
    idle_recharge_decisions(k);
    admit_waiting(k);
    move_agents(k);
    regulate_speeds(k);
    conclude(k);
}

void Engine::spawn(Tick k) {
    if (arrived_ >= cfg_.n_bags) {
        return;
    }
    const double t0 = static_cast<double>(k) * cfg_.dt;
    const double t1 = static_cast<double>(k + 1) * cfg_.dt;
    for (const double t : spawn_arrivals(cfg_.arrival, t0, t1, arrivals_rng_)) {
        if (arrived_ >= cfg_.n_bags) {
            break;
        }
        vehicle::Mission m;
        m.bag = arrived_;
        m.pickup = assets_->graph.entry();
        m.dropoff = exits_[static_cast<std::size_t>(arrived_) % exits_.size()];
        m.t_arrival = k;
        log_.append(k, EventKind::Arrival,
                    {{"bag", std::int64_t{m.bag}},
                     {"dropoff", assets_->graph.id(m.dropoff)},
                     {"at_s", t}});
        pending_.push_back(m);
        ++arrived_;
    }
}

void Engine::allocate(Tick k) {
    const bool anyone = strategy_.scenario == Scenario::Sc1;
    while (!pending_.empty()) {
        std::vector<const AivAgent*> bidders;
        for (const auto& a : agents_) {
            if (!a.stranded && (anyone || a.idle_and_free())) {
                bidders.push_back(&a);
            }
        }
        if (bidders.empty()) {
            return;
        }
        auto bag = pending_.front();
        pending_.pop_front();
        log_.append(k, EventKind::Cfp,
                    {{"bag", std::int64_t{bag.bag}},
                     {"bidders", static_cast<std::int64_t>(bidders.size())}});
        auto ctx = context();
        const auto outcome = allocation::run_auction(bag, bidders, strategy_, ctx);
        for (const auto& b : outcome.bids) {
            log_.append(k, EventKind::Bid,
                        {{"bag", std::int64_t{bag.bag}},
                         {"agent", std::int64_t{b.agent}},
                         {"cost", b.cost},
                         {"basis", b.basis},
                         {"fallback", b.fallback}});
        }
        log_.append(k, EventKind::Award,
                    {{"bag", std::int64_t{bag.bag}}, {"agent", std::int64_t{outcome.winner}}});
        bag.t_awarded = k;
        agents_[static_cast<std::size_t>(outcome.winner)].queue.push_back(bag);
        if (!anyone) {
            start_missions(k);
        }
    }
}

void Engine::start_missions(Tick k) {
    for (auto& a : agents_) {
        if (a.state == AgentState::Idle && !a.queue.empty() && !a.stranded) {
            vehicle::begin_next_mission(a, k, assets_->routes);
            log_.append(k, EventKind::MissionStart,
                        {{"agent", std::int64_t{a.id}}, {"bag", std::int64_t{a.active->bag}}});
        }
    }
}

void Engine::decide_and_route(AivAgent& a, Tick k, bool after_drop) {
    const auto id = static_cast<std::size_t>(a.id);
    auto ctx = context();
    const auto decision = allocation::decide_recharge(strategy_, a, ctx);
    log_.append(k, EventKind::RechargeDecision,
                {{"agent", std::int64_t{a.id}},
                 {"soc", a.soc},
                 {"score", decision.score},
                 {"recharge", decision.recharge},
                 {"fallback", decision.fallback},
                 {"trigger", std::string(after_drop ? "drop" : "idle")}});
    last_decided_soc_[id] = a.soc;
    if (!decision.recharge) {
        if (after_drop) {
            vehicle::transition(a, AgentState::Idle);
        }
        return;
    }
    const auto station = allocation::select_station(strategy_, a, ctx);
    const auto target = allocation::select_recharge_target(strategy_, a, ctx);
    double score = 0.0;
    for (const auto& [s, v] : station.scores) {
        if (s == station.station) {
            score = v;
        }
    }
    log_.append(k, EventKind::StationSelect,
                {{"agent", std::int64_t{a.id}},
                 {"station", assets_->graph.id(station.station)},
                 {"distance_m", station.distance_m},
                 {"score", score},
                 {"target", target.target},
                 {"fallback", station.fallback || target.fallback}});
    a.station = station.station;
    a.charge_target = target.target;
    vehicle::route_to(a, station.station, assets_->routes);
    vehicle::transition(a, AgentState::ToStation);
}

void Engine::idle_recharge_decisions(Tick k) {
    for (auto& a : agents_) {
        if (!a.idle_and_free()) {
            continue;
        }
        const auto& last = last_decided_soc_[static_cast<std::size_t>(a.id)];
        if (!last || a.soc < *last - 0.01) {
            decide_and_route(a, k, false);
        }
    }
}

void Engine::start_charging(AivAgent& a, Tick k) {
    vehicle::transition(a, AgentState::Charging);
    const auto id = static_cast<std::size_t>(a.id);
    charge_started_[id] = k;
    ++charge_starts_[id];
    log_.append(k, EventKind::ChargeStart,
                {{"agent", std::int64_t{a.id}},
                 {"station", assets_->graph.id(*a.station)},
                 {"soc", a.soc},
                 {"target", a.charge_target}});
}

void Engine::admit_waiting(Tick k) {
    for (auto& st : stations_) {
        if (const auto next = st.admit_next()) {
            start_charging(agents_[static_cast<std::size_t>(*next)], k);
        }
    }
}

void Engine::on_drop(AivAgent& a, Tick k) {
    auto& m = *a.active;
    m.t_drop = k;
    a.counters.mission_durations.push_back(k + 1 - *m.t_assigned);  // drop completes at the end of tick k
    ++a.counters.missions_done;
    ++delivered_;
    log_.append(k, EventKind::Drop,
                {{"agent", std::int64_t{a.id}},
                 {"bag", std::int64_t{m.bag}},
                 {"arrival_tick", m.t_arrival},
                 {"assigned_tick", *m.t_assigned},
                 {"pickup_tick", m.t_pickup.value_or(k)}});
    a.active.reset();
    rotation_.erase(std::find(rotation_.begin(), rotation_.end(), a.id));
    rotation_.push_back(a.id);
    decide_and_route(a, k, true);
}

void Engine::on_station_arrival(AivAgent& a, Tick k) {
    const bool admitted = station_state(*a.station).arrive(a.id);
    log_.append(k, EventKind::StationArrive,
                {{"agent", std::int64_t{a.id}},
                 {"station", assets_->graph.id(*a.station)},
                 {"queued", !admitted}});
    if (admitted) {
        start_charging(a, k);
    } else {
        vehicle::transition(a, AgentState::QueuedAtStation);
    }
}

void Engine::move_agents(Tick k) {
    const auto& routes = assets_->routes;
    for (auto& a : agents_) {
        const auto id = static_cast<std::size_t>(a.id);
        if (a.state == AgentState::Charging) {
            // A bay taken this tick starts charging on the next one.
            if (charge_started_[id] == k) {
                continue;
            }
            const auto station = *a.station;
            if (vehicle::charge_tick(a, cfg_.dt, battery_, a.charge_target)) {
                station_state(station).release(a.id);
                episode_ticks_ += k - charge_started_[id];
                ++episodes_;
                last_decided_soc_[id] = a.soc;
                log_.append(k, EventKind::ChargeEnd,
                            {{"agent", std::int64_t{a.id}},
                             {"station", assets_->graph.id(station)},
                             {"soc", a.soc}});
                a.station.reset();
            }
            continue;
        }
        for (const auto& ev : vehicle::advance(a, cfg_.dt, routes, battery_, cfg_.kinematics.handling_s)) {
            switch (ev.kind) {
                case vehicle::AgentEventKind::NodeArrival:
                    break;
                case vehicle::AgentEventKind::Pickup:
                    a.active->t_pickup = k;
                    ++picked_up_;
                    log_.append(k, EventKind::Pickup,
                                {{"agent", std::int64_t{a.id}}, {"bag", std::int64_t{a.active->bag}}});
                    break;
                case vehicle::AgentEventKind::Drop:
                    on_drop(a, k);
                    break;
                case vehicle::AgentEventKind::StationArrival:
                    on_station_arrival(a, k);
                    break;
                case vehicle::AgentEventKind::Stranded:
                    ++faults_;
                    log_.append(k, EventKind::Fault,
                                {{"agent", std::int64_t{a.id}},
                                 {"kind", std::string("stranded")},
                                 {"node", assets_->graph.id(a.loc.node)},
                                 {"state", std::string(vehicle::to_string(a.state))}});
                    break;
            }
        }
    }
}

void Engine::regulate_speeds(Tick k) {
    if (!strategy_.speed_regulation) {
        return;
    }
    // Leaders first: further along the edge, then lower id.
    std::vector<AivAgent*> order;
    for (auto& a : agents_) {
        order.push_back(&a);
    }
    std::stable_sort(order.begin(), order.end(), [](const AivAgent* x, const AivAgent* y) {
        const double ox = x->loc.on_edge() ? x->loc.offset_m : -1.0;
        const double oy = y->loc.on_edge() ? y->loc.offset_m : -1.0;
        return ox > oy;
    });
    auto ctx = context();
    for (auto* a : order) {
        if (!vehicle::is_moving(a->state) || a->stranded) {
            continue;
        }
        double headway = std::numeric_limits<double>::infinity();
        std::optional<double> leader_factor;
        if (a->loc.on_edge()) {
            for (const auto& b : agents_) {
                if (&b == a || !b.loc.on_edge() || b.loc.node != a->loc.node ||
                    b.loc.next != a->loc.next) {
                    continue;
                }
                const bool ahead = b.loc.offset_m > a->loc.offset_m ||
                                   (b.loc.offset_m == a->loc.offset_m && b.id < a->id);
                const double gap = b.loc.offset_m - a->loc.offset_m;
                if (ahead && gap < headway) {
                    headway = gap;
                    leader_factor = b.speed_factor;
                }
            }
        }
        const auto choice = allocation::regulate_speed(strategy_, *a, ctx, headway, leader_factor);
        if (std::abs(choice.factor - a->speed_factor) > 1e-3) {
            std::vector<Field> payload{{"agent", std::int64_t{a->id}},
                                       {"from", a->speed_factor},
                                       {"factor", choice.factor},
                                       {"capped", choice.capped}};
            if (std::isfinite(headway)) {
                payload.push_back({"headway_m", headway});
            }
            log_.append(k, EventKind::SpeedChange, std::move(payload));
        }
        a->speed_factor = choice.factor;
    }
}

void Engine::conclude(Tick k) {
    max_pending_ = std::max(max_pending_, pending());
    const bool done = delivered_ == cfg_.n_bags;
    if (done || static_cast<double>(k) * cfg_.dt >= wall_limit_s_) {
        finished_ = true;
        completed_ = done;
        log_.append(k, EventKind::End,
                    {{"completed", done},
                     {"delivered", std::int64_t{delivered_}},
                     {"faults", std::int64_t{faults_}}});
        return;
    }
    for (auto& a : agents_) {
        a.counters.accumulate(a.state);
    }
    tick_ = k + 1;
}

std::uint64_t Engine::state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h = (h ^ ((v >> (8 * i)) & 0xff)) * 0x100000001b3ULL;
        }
    };
    auto mixd = [&mix](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
    mix(static_cast<std::uint64_t>(tick_));
    mix(static_cast<std::uint64_t>(arrived_));
    mix(static_cast<std::uint64_t>(picked_up_));
    mix(static_cast<std::uint64_t>(delivered_));
    mix(pending_.size());
    for (const auto& a : agents_) {
        mix(static_cast<std::uint64_t>(a.state));
        mix(a.loc.node.value);
        mix(a.loc.next ? a.loc.next->value + 1 : 0);
        mixd(a.loc.offset_m);
        mixd(a.soc);
        mixd(a.speed_factor);
        mix(a.route.size());
        mix(a.queue.size());
        mix(a.active ? static_cast<std::uint64_t>(a.active->bag) + 1 : 0);
        mix(static_cast<std::uint64_t>(a.dwell));
        mixd(a.dwell_remaining_s);
        mix(a.station ? a.station->value + 1 : 0);
    }
    for (const auto& st : stations_) {
        mix(st.occupant() ? static_cast<std::uint64_t>(*st.occupant()) + 1 : 0);
        for (const auto w : st.waiting()) {
            mix(static_cast<std::uint64_t>(w));
        }
    }
    for (const auto r : rotation_) {
        mix(static_cast<std::uint64_t>(r));
    }
    return h;
}

Metrics Engine::metrics() const {
    RunTally tally;
    tally.n_bags = cfg_.n_bags;
    tally.end_tick = tick_;
    tally.max_pending = max_pending_;
    tally.faults = faults_;
    tally.delivered = delivered_;
    tally.completed = completed_;
    for (const auto& a : agents_) {
        tally.agents.push_back(a.counters);
    }
    tally.charge_starts = charge_starts_;
    return finalize(tally, cfg_.dt);
}

RunResult run(const SimConfig& cfg, std::shared_ptr<const SimAssets> assets) {
    Engine engine(cfg, std::move(assets));
    while (!engine.finished()) {
        engine.step();
    }
    return {engine.metrics(), engine.take_log()};
}

RunResult run(const SimConfig& cfg) {
    cfg.validate();
    return run(cfg, load_assets(cfg));
}

}  // namespace aivsim::sim
