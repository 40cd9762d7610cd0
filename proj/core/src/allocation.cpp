#include "aivsim/allocation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aivsim::allocation {

using vehicle::AivAgent;
using world::NodeIndex;

Scenario parse_scenario(std::string_view text) {
    std::string lower;
    for (char c : text) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lower.size() == 3 && lower.rfind("sc", 0) == 0 && lower[2] >= '1' && lower[2] <= '8') {
        return static_cast<Scenario>(lower[2] - '0');
    }
    throw std::invalid_argument("unknown scenario '" + std::string(text) + "' (expected sc1..sc8)");
}

std::string to_string(Scenario s) { return "sc" + std::to_string(static_cast<int>(s)); }

std::vector<Scenario> all_scenarios() {
    std::vector<Scenario> out;
    for (int i = 1; i <= 8; ++i) {
        out.push_back(static_cast<Scenario>(i));
    }
    return out;
}

Strategy Strategy::for_scenario(Scenario s) {
    const int n = static_cast<int>(s);
    Strategy st;
    st.scenario = s;
    st.fuzzy_cost = n >= 4;
    st.fuzzy_recharge = n >= 5;
    st.fuzzy_station = n >= 6;
    st.variable_target = n >= 7;
    st.speed_regulation = n >= 8;
    return st;
}

std::string Strategy::label() const {
    switch (scenario) {
        case Scenario::Sc1: return "random";
        case Scenario::Sc2: return "fifo";
        case Scenario::Sc3: return "available";
        case Scenario::Sc4: return "fuzzy-cost";
        case Scenario::Sc5: return "fuzzy-recharge";
        case Scenario::Sc6: return "fuzzy-station";
        case Scenario::Sc7: return "fuzzy-rate";
        case Scenario::Sc8: return "fuzzy-speed";
    }
    return "unknown";
}

void PolicyParams::validate() const {
    auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!fraction(recharge_soc_threshold) || !fraction(recharge_decision_cut) ||
        !fraction(full_target_snap) || !fraction(partial_target)) {
        throw std::invalid_argument("policy thresholds must lie in [0, 1]");
    }
    if (!(p_max > 0.0) || !(w_ref_s > 0.0) || !(t_ref_s > 0.0) || !(d_safe_m >= 0.0) ||
        !(mean_episode_prior_s >= 0.0)) {
        throw std::invalid_argument("policy scales must be positive");
    }
}

double AuctionContext::urgency() const {
    return std::min(1.0, std::max(0, pending_bags) / params->p_max);
}

double AuctionContext::station_availability(NodeIndex station) const {
    for (const auto& s : stations) {
        if (s.station == station) {
            return s.availability;
        }
    }
    return 1.0;
}

namespace {

const fuzzy::FuzzyModel& need(const std::shared_ptr<const fuzzy::FuzzyModel>& model,
                              const char* what) {
    if (!model) {
        throw fuzzy::ConfigError(std::string("scenario needs the ") + what + " rule base");
    }
    return *model;
}

double nearest_station_m(NodeIndex from, const world::RoutingTable& routes,
                         std::optional<NodeIndex>* which = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto s : routes.graph().stations()) {
        if (routes.reachable(from, s)) {
            const double d = routes.distance(from, s);
            if (d < best) {
                best = d;
                if (which) {
                    *which = s;
                }
            }
        }
    }
    return best;
}

double crisp_available_cost(const AivAgent& agent, const AuctionContext& ctx) {
    return 1.0 - vehicle::availability(agent, ctx.params->t_ref_s, ctx.workload);
}

/// Extra meters a mid-mission recharge would add: drop-off -> station ->
/// pickup instead of drop-off -> pickup.
double recharge_detour_m(const AivAgent& agent, const vehicle::Mission& bag, double mission_m,
                         const AuctionContext& ctx) {
    const auto& routes = *ctx.routes;
    const double drain = ctx.workload.battery->drain_per_m(agent.speed_factor);
    const double soc_after = agent.soc - mission_m * drain;
    std::optional<NodeIndex> station;
    const double to_station = nearest_station_m(bag.dropoff, routes, &station);
    if (!station) {
        return 0.0;
    }
    const double avail = vehicle::availability(agent, ctx.params->t_ref_s, ctx.workload);
    const auto score = ctx.models->recharge->try_evaluate(
        {{"EnergyLevel", soc_after}, {"DistanceStation", to_station}, {"Availability", avail}});
    if (!score || *score <= ctx.params->recharge_decision_cut) {
        return 0.0;
    }
    const double via = to_station + routes.distance(*station, bag.pickup);
    return std::max(0.0, via - routes.distance(bag.dropoff, bag.pickup));
}

}  // namespace

Bid bid(const Strategy& strategy, const AivAgent& agent, const vehicle::Mission& bag,
        AuctionContext& ctx) {
    Bid b;
    b.agent = agent.id;
    switch (strategy.scenario) {
        case Scenario::Sc1:
            b.cost = ctx.bid_streams[static_cast<std::size_t>(agent.id)].uniform();
            b.basis = "random";
            return b;
        case Scenario::Sc2: {
            const auto it = std::find(ctx.rotation.begin(), ctx.rotation.end(), agent.id);
            b.cost = static_cast<double>(it - ctx.rotation.begin());
            b.basis = "rotation";
            return b;
        }
        case Scenario::Sc3:
            b.cost = crisp_available_cost(agent, ctx);
            b.basis = "availability";
            return b;
        default:
            break;
    }

    const auto& routes = *ctx.routes;
    const auto& cost_model = need(ctx.models->cost, "cost");
    double distance = vehicle::distance_to(agent, bag.pickup, routes) +
                      routes.distance(bag.pickup, bag.dropoff);
    b.basis = "fuzzy-cost";
    if (strategy.fuzzy_recharge) {
        need(ctx.models->recharge, "recharge");
        const double detour = recharge_detour_m(agent, bag, distance, ctx);
        if (detour > 0.0) {
            distance += detour;
            b.basis = "fuzzy-cost+detour";
        }
    }
    const double avail = vehicle::availability(agent, ctx.params->t_ref_s, ctx.workload);
    const auto cost = cost_model.try_evaluate(
        {{"Availability", avail}, {"DistanceTarget", distance}, {"EnergyLevel", agent.soc}});
    if (!cost) {
        b.cost = 1.0 - avail;
        b.basis = "availability";
        b.fallback = true;
        return b;
    }
    b.cost = *cost;
    return b;
}

AgentId select_winner(std::span<const Bid> bids) {
    if (bids.empty()) {
        throw std::invalid_argument("auction without bids");
    }
    const Bid* best = &bids.front();
    for (const auto& b : bids) {
        if (b.cost < best->cost || (b.cost == best->cost && b.agent < best->agent)) {
            best = &b;
        }
    }
    return best->agent;
}

AuctionOutcome run_auction(const vehicle::Mission& bag, std::span<const AivAgent* const> bidders,
                           const Strategy& strategy, AuctionContext& ctx) {
    if (bidders.empty()) {
        throw std::invalid_argument("auction without bidders");
    }
    AuctionOutcome out;
    for (const auto* agent : bidders) {
        out.bids.push_back(bid(strategy, *agent, bag, ctx));
    }
    out.winner = select_winner(out.bids);
    return out;
}

RechargeDecision decide_recharge(const Strategy& strategy, const AivAgent& agent,
                                 const AuctionContext& ctx) {
    const auto& p = *ctx.params;
    RechargeDecision threshold{agent.soc < p.recharge_soc_threshold, agent.soc, false};
    if (!strategy.fuzzy_recharge) {
        return threshold;
    }
    const auto& model = need(ctx.models->recharge, "recharge");
    const double to_station = nearest_station_m(agent.anchor(), *ctx.routes) + agent.to_anchor_m();
    const double avail = vehicle::availability(agent, p.t_ref_s, ctx.workload);
    const auto score = model.try_evaluate(
        {{"EnergyLevel", agent.soc}, {"DistanceStation", to_station}, {"Availability", avail}});
    if (!score) {
        threshold.fallback = true;
        return threshold;
    }
    return {*score > p.recharge_decision_cut, *score, false};
}

StationChoice select_station(const Strategy& strategy, const AivAgent& agent,
                             const AuctionContext& ctx) {
    const auto& routes = *ctx.routes;
    struct Candidate {
        NodeIndex station;
        double distance;
    };
    std::vector<Candidate> candidates;
    for (const auto s : routes.graph().stations()) {
        if (routes.reachable(agent.anchor(), s)) {
            candidates.push_back({s, vehicle::distance_to(agent, s, routes)});
        }
    }
    if (candidates.empty()) {
        throw world::RoutingError("agent " + std::to_string(agent.id) +
                                  " cannot reach any charging station");
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.station < b.station;
    });

    StationChoice choice{candidates.front().station, candidates.front().distance, {}, false};
    if (!strategy.fuzzy_station) {
        for (const auto& c : candidates) {
            choice.scores.emplace_back(c.station, c.distance);
        }
        return choice;
    }
    const auto& model = need(ctx.models->station, "station");
    std::optional<std::size_t> best;
    std::vector<double> scores;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto score = model.try_evaluate(
            {{"DistanceStation", candidates[i].distance},
             {"AvailabilityStation", ctx.station_availability(candidates[i].station)}});
        if (!score) {
            choice.fallback = true;
            choice.scores.clear();
            for (const auto& c : candidates) {
                choice.scores.emplace_back(c.station, c.distance);
            }
            return choice;
        }
        scores.push_back(*score);
        choice.scores.emplace_back(candidates[i].station, *score);
        // Candidates are already ordered nearest-first, then by id, so a
        // strict comparison keeps that tie-break.
        if (!best || *score < scores[*best]) {
            best = i;
        }
    }
    choice.station = candidates[*best].station;
    choice.distance_m = candidates[*best].distance;
    return choice;
}

TargetChoice select_recharge_target(const Strategy& strategy, const AivAgent& agent,
                                    const AuctionContext& ctx) {
    if (!strategy.variable_target) {
        return {};
    }
    const auto& p = *ctx.params;
    const auto& model = need(ctx.models->rate, "recharge-rate");
    const auto score = model.try_evaluate({{"Urgency", ctx.urgency()}, {"EnergyLevel", agent.soc}});
    if (!score) {
        return {1.0, 1.0, true};
    }
    return {*score >= p.full_target_snap ? 1.0 : p.partial_target, *score, false};
}

std::optional<double> fuzzy_speed(const FuzzyModels& models, double urgency, double headway_m) {
    const auto& model = need(models.speed, "speed");
    return model.try_evaluate({{"Urgency", urgency}, {"Headway", headway_m}});
}

SpeedChoice regulate_speed(const Strategy& strategy, const AivAgent& agent,
                           const AuctionContext& ctx, double headway_m,
                           std::optional<double> leader_factor) {
    (void)agent;
    if (!strategy.speed_regulation) {
        return {};
    }
    const double urgency = ctx.urgency();
    const auto& headway_var = need(ctx.models->speed, "speed").input("Headway");
    const double h = headway_var.clamp(std::isfinite(headway_m) ? headway_m : headway_var.hi());
    std::optional<double> factor;
    if (ctx.speed_memo) {
        const auto key = std::make_pair(urgency, h);
        auto it = ctx.speed_memo->find(key);
        if (it == ctx.speed_memo->end()) {
            it = ctx.speed_memo->emplace(key, fuzzy_speed(*ctx.models, urgency, h)).first;
        }
        factor = it->second;
    } else {
        factor = fuzzy_speed(*ctx.models, urgency, h);
    }
    SpeedChoice out{factor.value_or(1.0), false, !factor.has_value()};
    if (leader_factor && headway_m < ctx.params->d_safe_m && out.factor > *leader_factor) {
        out.factor = *leader_factor;
        out.capped = true;
    }
    return out;
}

}  // namespace aivsim::allocation
