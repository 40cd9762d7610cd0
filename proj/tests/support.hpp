#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aivsim/simulation.hpp"
#include "aivsim/world.hpp"

namespace aivsim::test {

inline world::GraphSpec make_spec(std::vector<std::pair<std::string, world::NodeKind>> nodes,
                                  std::vector<world::EdgeSpec> edges) {
    world::GraphSpec s;
    for (auto& [id, kind] : nodes) {
        s.nodes.push_back({id, kind});
    }
    s.edges = std::move(edges);
    return s;
}

/// Entry and exit 50 m apart, each station on a 10 m spur off the exit.
inline world::GraphSpec line_spec() {
    using K = world::NodeKind;
    return make_spec({{"E", K::EntryTreadmill}, {"X", K::ExitTreadmill},
                      {"S1", K::ChargingStation}, {"S2", K::ChargingStation}},
                     {{"E", "X", 50}, {"X", "E", 50}, {"X", "S1", 10}, {"S1", "E", 10},
                      {"X", "S2", 10}, {"S2", "E", 10}});
}

inline std::shared_ptr<const sim::SimAssets> assets_for(const world::GraphSpec& spec) {
    return std::make_shared<const sim::SimAssets>(spec);
}

/// Shipped assets for a scenario under the default configuration.
inline std::shared_ptr<const sim::SimAssets> shipped_assets(allocation::Scenario s) {
    sim::SimConfig cfg;
    cfg.scenario = s;
    return sim::load_assets(cfg);
}

}  // namespace aivsim::test
