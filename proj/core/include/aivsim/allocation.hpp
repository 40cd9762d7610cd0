#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aivsim/fuzzy.hpp"
#include "aivsim/rng.hpp"
#include "aivsim/vehicle.hpp"
#include "aivsim/world.hpp"

namespace aivsim::allocation {

enum class Scenario { Sc1 = 1, Sc2, Sc3, Sc4, Sc5, Sc6, Sc7, Sc8 };

/// Accepts "sc1".."sc8" in any case. Throws std::invalid_argument
/// ("unknown scenario ...") otherwise.
Scenario parse_scenario(std::string_view text);
std::string to_string(Scenario s);
std::vector<Scenario> all_scenarios();

/// Capabilities are cumulative: each scenario keeps every mechanism of the
/// one before it.
struct Strategy {
    Scenario scenario = Scenario::Sc3;
    bool fuzzy_cost = false;
    bool fuzzy_recharge = false;
    bool fuzzy_station = false;
    bool variable_target = false;
    bool speed_regulation = false;

    static Strategy for_scenario(Scenario s);
    std::string label() const;
};

struct PolicyParams {
    double recharge_soc_threshold = 0.35;
    double recharge_decision_cut = 0.5;
    double full_target_snap = 0.9;
    double partial_target = 0.8;
    double p_max = 10.0;
    double w_ref_s = 60.0;
    double d_safe_m = 5.0;
    double t_ref_s = 120.0;
    double mean_episode_prior_s = 15.0;

    void validate() const;
};

/// Shipped rule bases, one per decision. Absent models are only an error if
/// a scenario that needs them runs.
struct FuzzyModels {
    std::shared_ptr<const fuzzy::FuzzyModel> cost;
    std::shared_ptr<const fuzzy::FuzzyModel> recharge;
    std::shared_ptr<const fuzzy::FuzzyModel> station;
    std::shared_ptr<const fuzzy::FuzzyModel> rate;
    std::shared_ptr<const fuzzy::FuzzyModel> speed;
};

/// Occupancy picture of one charging bay as seen by a deciding agent.
struct StationStatus {
    world::NodeIndex station;
    /// In [0, 1]; 1 when nobody occupies, waits for or heads to the bay.
    double availability = 1.0;
};

struct AuctionContext {
    Tick now = 0;
    int pending_bags = 0;
    const world::RoutingTable* routes = nullptr;
    const PolicyParams* params = nullptr;
    const FuzzyModels* models = nullptr;
    vehicle::WorkloadModel workload;
    std::vector<StationStatus> stations;
    /// Sc2 rotation: agent ids, longest-waiting first.
    std::span<const AgentId> rotation;
    /// Sc1: one stream per agent, indexed by agent id.
    std::span<Rng> bid_streams;
    /// Optional memo for speed-model evaluations keyed by (urgency, headway).
    std::map<std::pair<double, double>, std::optional<double>>* speed_memo = nullptr;

    double urgency() const;
    double station_availability(world::NodeIndex station) const;
};

struct Bid {
    AgentId agent = 0;
    double cost = 0.0;
    std::string basis;
    bool fallback = false;
};

Bid bid(const Strategy& strategy, const vehicle::AivAgent& agent, const vehicle::Mission& bag,
        AuctionContext& ctx);

/// Lowest cost wins; equal costs go to the lowest agent id.
AgentId select_winner(std::span<const Bid> bids);

struct AuctionOutcome {
    std::vector<Bid> bids;
    AgentId winner = 0;
};

/// Collects one bid per bidder (in the given order) and awards the bag.
/// Appending the bag to the winner's queue is left to the caller, which owns
/// the agents.
AuctionOutcome run_auction(const vehicle::Mission& bag,
                           std::span<const vehicle::AivAgent* const> bidders,
                           const Strategy& strategy, AuctionContext& ctx);

struct RechargeDecision {
    bool recharge = false;
    double score = 0.0;
    bool fallback = false;
};

RechargeDecision decide_recharge(const Strategy& strategy, const vehicle::AivAgent& agent,
                                 const AuctionContext& ctx);

struct StationChoice {
    world::NodeIndex station;
    double distance_m = 0.0;
    /// (station, score) for every reachable station; distance for crisp
    /// selection, fuzzy cost otherwise.
    std::vector<std::pair<world::NodeIndex, double>> scores;
    bool fallback = false;
};

/// Throws world::RoutingError when no station is reachable.
StationChoice select_station(const Strategy& strategy, const vehicle::AivAgent& agent,
                             const AuctionContext& ctx);

struct TargetChoice {
    double target = 1.0;
    double score = 1.0;
    bool fallback = false;
};

TargetChoice select_recharge_target(const Strategy& strategy, const vehicle::AivAgent& agent,
                                    const AuctionContext& ctx);

struct SpeedChoice {
    double factor = 1.0;
    bool capped = false;
    bool fallback = false;
};

/// `headway_m` is the gap to the nearest vehicle ahead on the same edge
/// (infinity on an open road) and `leader_factor` that vehicle's factor.
SpeedChoice regulate_speed(const Strategy& strategy, const vehicle::AivAgent& agent,
                           const AuctionContext& ctx, double headway_m,
                           std::optional<double> leader_factor);

/// Evaluates the speed rule base for (urgency, headway); exposed so the
/// engine can memoise it.
std::optional<double> fuzzy_speed(const FuzzyModels& models, double urgency, double headway_m);

}  // namespace aivsim::allocation
