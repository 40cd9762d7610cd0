#include <algorithm>
#include <functional>
#include <limits>

#include "aivsim/config.hpp"
#include "aivsim/world.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aivsim;
using namespace aivsim::world;
using K = NodeKind;

namespace {

GraphSpec shipped_spec() { return load_graph(sim::data_dir() / "graph_default.json"); }

// Shortest simple-path length by exhaustive depth-first enumeration.
double brute_force_distance(const CirculationGraph& g, NodeIndex from, NodeIndex to) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> seen(g.node_count(), false);
    std::function<void(NodeIndex, double)> dfs = [&](NodeIndex n, double d) {
        if (n == to) {
            best = std::min(best, d);
            return;
        }
        seen[n.value] = true;
        for (const auto& e : g.edges()) {
            if (e.from == n && !seen[e.to.value]) dfs(e.to, d + e.length_m);
        }
        seen[n.value] = false;
    };
    dfs(from, 0.0);
    return best;
}

}  // namespace

TEST_CASE("shipped graph validates") {
    const auto spec = shipped_spec();
    CHECK(validate_graph(spec).empty());
    const CirculationGraph g(spec);
    CHECK(g.exits().size() == 2);
    CHECK(g.stations().size() == 2);
    for (const auto& e : g.edges()) {
        CHECK(e.length_m >= 8.0);
        CHECK(e.length_m <= 60.0);
    }
}

TEST_CASE("validator reports violations") {
    SUBCASE("unreachable station") {
        const auto spec = test::make_spec(
            {{"E", K::EntryTreadmill}, {"X", K::ExitTreadmill}, {"S1", K::ChargingStation}, {"S2", K::ChargingStation}},
            {{"E", "X", 50}, {"X", "E", 50}, {"X", "S1", 10}, {"S1", "E", 10}, {"S2", "E", 10}});
        const auto v = validate_graph(spec);
        REQUIRE(v.size() == 1);
        CHECK(v[0].find("S2") != std::string::npos);
    }
    SUBCASE("two entry treadmills") {
        auto spec = test::line_spec();
        spec.nodes.push_back({"E2", K::EntryTreadmill});
        spec.edges.push_back({"E2", "X", 5});
        const auto v = validate_graph(spec);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("entry count") != std::string::npos);
    }
    SUBCASE("structural problems") {
        auto spec = test::line_spec();
        spec.edges.push_back({"E", "Q", 5});
        spec.edges.push_back({"X", "X", 5});
        spec.edges.push_back({"S1", "X", -1});
        CHECK(validate_graph(spec).size() == 3);
        CHECK_THROWS_AS(CirculationGraph{spec}, GraphError);
    }
    SUBCASE("parallel edges") {
        auto spec = test::line_spec();
        spec.edges.push_back({"E", "X", 60});
        CHECK(validate_graph(spec).size() == 1);
    }
}

TEST_CASE("graph files parse") {
    const auto spec = parse_graph(R"({"nodes": [{"id": "a", "kind": "entry"}, {"id": "b", "kind": "exit"}],
                                      "edges": [{"from": "a", "to": "b", "length_m": 50}]})");
    REQUIRE(spec.nodes.size() == 2);
    CHECK(spec.nodes[1].kind == K::ExitTreadmill);
    CHECK(spec.edges[0].length_m == 50.0);
    CHECK_THROWS(parse_graph(R"({"nodes": [{"id": "a", "kind": "moon"}], "edges": []})"));
    CHECK_THROWS(parse_graph("not json"));
}

TEST_CASE("shortest path basics") {
    const CirculationGraph g(test::make_spec({{"a", K::EntryTreadmill}, {"b", K::ExitTreadmill}}, {{"a", "b", 50}}));
    const auto a = g.at("a"), b = g.at("b");
    auto p = shortest_path(g, a, b);
    CHECK(p.distance_m == 50.0);
    CHECK(p.nodes == std::vector<NodeIndex>{a, b});
    p = shortest_path(g, a, a);
    CHECK(p.distance_m == 0.0);
    CHECK(p.nodes == std::vector<NodeIndex>{a});
    CHECK_THROWS_AS(shortest_path(g, b, a), RoutingError);
}

TEST_CASE("equal-length routes break ties by node id") {
    const CirculationGraph g(test::make_spec(
        {{"s", K::Waypoint}, {"b", K::Waypoint}, {"a", K::Waypoint}, {"t", K::Waypoint}},
        {{"s", "b", 10}, {"b", "t", 10}, {"s", "a", 10}, {"a", "t", 10}}));
    const auto p = shortest_path(g, g.at("s"), g.at("t"));
    REQUIRE(p.nodes.size() == 3);
    CHECK(g.id(p.nodes[1]) == "a");
}

TEST_CASE("routing table agrees with exhaustive enumeration") {
    const CirculationGraph g(shipped_spec());
    const RoutingTable routes(g);
    double diameter = 0.0;
    for (std::uint32_t i = 0; i < g.node_count(); ++i) {
        for (std::uint32_t j = 0; j < g.node_count(); ++j) {
            const NodeIndex u{i}, v{j};
            const double bf = brute_force_distance(g, u, v);
            REQUIRE(std::isfinite(bf));  // shipped plan is strongly connected
            CHECK(routes.distance(u, v) == doctest::Approx(bf));
            diameter = std::max(diameter, bf);
            // The stored path is a real walk of the stated length.
            const auto& p = routes.path(u, v);
            double len = 0.0;
            for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
                const auto e = g.edge_length(p.nodes[k], p.nodes[k + 1]);
                REQUIRE(e.has_value());
                len += *e;
            }
            CHECK(len == doctest::Approx(p.distance_m));
        }
    }
    CHECK(routes.diameter() == doctest::Approx(diameter));
}

TEST_CASE("shortest distances satisfy the triangle inequality") {
    const CirculationGraph g(shipped_spec());
    const RoutingTable routes(g);
    const auto n = static_cast<std::uint32_t>(g.node_count());
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k)
                CHECK(routes.distance({i}, {k}) <= routes.distance({i}, {j}) + routes.distance({j}, {k}) + 1e-9);
}

TEST_CASE("distances to stations") {
    SUBCASE("from a station it is listed first at 0 m") {
        const CirculationGraph g(shipped_spec());
        const auto d = distances_to_stations(g, g.at("S2"));
        CHECK(g.id(d[0].station) == "S2");
        CHECK(d[0].distance_m == 0.0);
    }
    SUBCASE("equidistant stations keep id order") {
        const CirculationGraph g(test::line_spec());
        const auto d = distances_to_stations(g, g.at("X"));
        CHECK(g.id(d[0].station) == "S1");
        CHECK(g.id(d[1].station) == "S2");
        CHECK(d[0].distance_m == d[1].distance_m);
    }
    SUBCASE("table and graph variants match brute force from the entry") {
        const CirculationGraph g(shipped_spec());
        const RoutingTable routes(g);
        const auto a = distances_to_stations(g, g.entry());
        const auto b = distances_to_stations(routes, g.entry());
        REQUIRE(a.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(a[i].station == b[i].station);
            CHECK(a[i].distance_m == doctest::Approx(brute_force_distance(g, g.entry(), a[i].station)));
        }
        CHECK(a[0].distance_m <= a[1].distance_m);
    }
}

TEST_CASE("station occupancy") {
    StationState<int> st(NodeIndex{3});
    CHECK(st.free());
    CHECK(st.arrive(0));
    CHECK_FALSE(st.arrive(2));
    CHECK_FALSE(st.arrive(1));
    CHECK_THROWS_AS(st.arrive(2), std::logic_error);
    CHECK_FALSE(st.admit_next().has_value());  // bay still taken
    CHECK_THROWS_AS(st.release(1), std::logic_error);
    st.release(0);
    CHECK(st.admit_next() == 2);
    st.release(2);
    CHECK(st.admit_next() == 1);
    st.release(1);
    CHECK(st.free());
}
