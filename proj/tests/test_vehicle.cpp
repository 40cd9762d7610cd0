#include "aivsim/vehicle.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aivsim;
using namespace aivsim::vehicle;
using world::NodeIndex;

namespace {

struct Line {
    world::CirculationGraph graph{test::line_spec()};
    world::RoutingTable routes{graph};
    NodeIndex E = graph.at("E"), X = graph.at("X"), S1 = graph.at("S1");
};

AivAgent parked(NodeIndex at) {
    AivAgent a;
    a.loc.node = at;
    return a;
}

Mission bag(const Line& l) {
    Mission m;
    m.pickup = l.E;
    m.dropoff = l.X;
    return m;
}

}  // namespace

TEST_CASE("life-cycle transitions") {
    using S = AgentState;
    CHECK(legal_transition(S::Idle, S::ToPickup));
    CHECK(legal_transition(S::Idle, S::ToStation));
    CHECK(legal_transition(S::ToPickup, S::Carrying));
    CHECK(legal_transition(S::Carrying, S::Idle));
    CHECK(legal_transition(S::Carrying, S::ToStation));
    CHECK(legal_transition(S::ToStation, S::QueuedAtStation));
    CHECK(legal_transition(S::ToStation, S::Charging));
    CHECK(legal_transition(S::QueuedAtStation, S::Charging));
    CHECK(legal_transition(S::Charging, S::Idle));
    CHECK_FALSE(legal_transition(S::Idle, S::Charging));
    CHECK_FALSE(legal_transition(S::ToPickup, S::Idle));
    CHECK_FALSE(legal_transition(S::Charging, S::ToPickup));
    AivAgent a;
    CHECK_THROWS_AS(transition(a, S::Carrying), std::logic_error);
}

TEST_CASE("movement and energy draw") {
    Line l;
    const BatteryModel battery{1e-3, 0.0, 0.02, 2.0};
    AivAgent a = parked(l.E);
    a.queue.push_back(bag(l));
    a.queue.front().pickup = l.X;  // head straight out along E->X
    begin_next_mission(a, 0, l.routes);
    REQUIRE(a.state == AgentState::ToPickup);

    SUBCASE("one second at nominal speed") {
        advance(a, 1.0, l.routes, battery, 5.0);
        CHECK(a.loc.offset_m == doctest::Approx(1.0));
        CHECK(a.soc == doctest::Approx(1.0 - 1e-3));
    }
    SUBCASE("speed factor scales distance and draw") {
        a.speed_factor = 1.25;
        advance(a, 1.0, l.routes, battery, 5.0);
        CHECK(a.loc.offset_m == doctest::Approx(1.25));
        CHECK(a.soc == doctest::Approx(1.0 - 1.25 * 1.5625 * 1e-3));
    }
    SUBCASE("steps are additive") {
        AivAgent b = a;
        for (int i = 0; i < 10; ++i) advance(a, 0.1, l.routes, battery, 5.0);
        advance(b, 1.0, l.routes, battery, 5.0);
        CHECK(a.loc.offset_m == doctest::Approx(b.loc.offset_m));
        CHECK(a.soc == doctest::Approx(b.soc));
    }
    SUBCASE("exhaustion strands the agent at the point of exhaustion") {
        a.soc = 0.01;
        std::vector<AgentEvent> all;
        for (int i = 0; i < 200 && !a.stranded; ++i) {
            for (auto e : advance(a, 0.1, l.routes, battery, 5.0)) all.push_back(e);
        }
        CHECK(a.stranded);
        CHECK(a.soc == 0.0);
        CHECK(a.loc.offset_m == doctest::Approx(10.0));
        REQUIRE_FALSE(all.empty());
        CHECK(all.back().kind == AgentEventKind::Stranded);
        CHECK(advance(a, 0.1, l.routes, battery, 5.0).empty());
    }
}

TEST_CASE("a full mission: load, carry, unload") {
    Line l;
    const BatteryModel battery;
    AivAgent a = parked(l.E);
    a.queue.push_back(bag(l));
    begin_next_mission(a, 0, l.routes);
    int ticks = 0;
    bool picked = false, dropped = false;
    while (!dropped && ticks < 10000) {
        ++ticks;
        for (const auto& e : advance(a, 0.1, l.routes, battery, 5.0)) {
            picked |= e.kind == AgentEventKind::Pickup;
            if (e.kind == AgentEventKind::Drop) {
                dropped = true;
                CHECK(e.node == l.X);
            }
        }
    }
    CHECK(picked);
    CHECK(dropped);
    CHECK(ticks == 600);  // 5 s loading + 50 m + 5 s unloading
    CHECK(a.state == AgentState::Carrying);  // caller routes onward
    CHECK(a.loc.node == l.X);
    CHECK(a.soc == doctest::Approx(1.0 - 50 * battery.discharge_per_m));
}

TEST_CASE("charging") {
    const BatteryModel battery{1e-3, 0.0, 0.02, 2.0};
    AivAgent a;
    a.state = AgentState::Charging;
    a.soc = 0.5;
    int ticks = 0;
    while (!charge_tick(a, 0.1, battery, 0.8)) ++ticks;
    ++ticks;
    CHECK(ticks == 150);
    CHECK(a.soc == doctest::Approx(0.8));
    CHECK(a.state == AgentState::Idle);
    CHECK(a.counters.recharges_done == 1);

    a.state = AgentState::Charging;
    a.soc = 0.9;
    CHECK(charge_tick(a, 0.1, battery, 0.8));  // already above target
    CHECK(a.soc == doctest::Approx(0.9));
    CHECK_THROWS_AS(charge_tick(a, 0.1, battery, 0.8), std::logic_error);
}

TEST_CASE("availability from remaining workload") {
    Line l;
    const BatteryModel battery;
    const WorkloadModel w{&l.routes, &battery, 5.0};
    AivAgent a = parked(l.E);
    CHECK(availability(a, 120.0, w) == 1.0);

    a.queue.push_back(bag(l));
    begin_next_mission(a, 0, l.routes);
    // At the pickup point: 5 s loading, 50 m, 5 s unloading.
    CHECK(remaining_workload_s(a, w) == doctest::Approx(60.0));
    CHECK(availability(a, 120.0, w) == doctest::Approx(0.5));
    CHECK(availability(a, 30.0, w) == 0.0);

    AivAgent c = parked(l.S1);
    c.state = AgentState::Charging;
    c.station = l.S1;
    c.soc = 0.6;
    c.charge_target = 1.0;
    CHECK(remaining_workload_s(c, w) == doctest::Approx(0.4 / battery.charge_rate_per_s));
}

TEST_CASE("battery validation") {
    CHECK_NOTHROW(BatteryModel{}.validate());
    CHECK_THROWS_AS((BatteryModel{-1.0, 0.0, 0.02, 2.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((BatteryModel{1e-3, 0.0, 0.0, 2.0}.validate()), std::invalid_argument);
    CHECK(BatteryModel{1e-3, 0.0, 0.02, 2.0}.drain_per_m(1.25) == doctest::Approx(1.5625e-3));
}
