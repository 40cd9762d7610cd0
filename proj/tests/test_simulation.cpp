#include <algorithm>
#include <cmath>
#include <map>

#include "aivsim/simulation.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aivsim;
using namespace aivsim::sim;
using allocation::Scenario;
using vehicle::AgentState;

namespace {

SimConfig line_config(int bags, int aivs) {
    SimConfig c;
    c.scenario = Scenario::Sc3;
    c.n_bags = bags;
    c.n_aivs = aivs;
    c.battery.enabled = false;
    c.start_nodes.assign(static_cast<std::size_t>(aivs), "E");
    return c;
}

SimConfig quiet_arrivals(SimConfig c) {
    // One bag due far beyond the wall limit.
    c.arrival.kind = ArrivalProcess::Kind::PiecewisePoisson;
    c.arrival.segments = {{0.0, 1e-9}};
    c.wall_limit_s = 120.0;
    return c;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("fixed-interval arrivals") {
    ArrivalProcess p;
    p.period_s = 18.0;
    Rng rng(1, "arrivals");
    CHECK(spawn_arrivals(p, 0.0, 90.0, rng) == std::vector<double>{0, 18, 36, 54, 72});
    CHECK(spawn_arrivals(p, 5.0, 5.0, rng).empty());
    // Tick-sized windows see every multiple exactly once.
    std::vector<double> all;
    for (int k = 0; k < 900; ++k) {
        for (double t : spawn_arrivals(p, k * 0.1, (k + 1) * 0.1, rng)) all.push_back(t);
    }
    CHECK(all == std::vector<double>{0, 18, 36, 54, 72});
}

TEST_CASE("poisson arrivals match their rate") {
    ArrivalProcess p;
    p.kind = ArrivalProcess::Kind::PiecewisePoisson;
    p.segments = {{0.0, 0.1}};
    const double L = 100.0;
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed, "arrivals");
        const auto ts = spawn_arrivals(p, 0.0, L, rng);
        for (double t : ts) {
            REQUIRE(t >= 0.0);
            REQUIRE(t < L);
        }
        REQUIRE(std::is_sorted(ts.begin(), ts.end()));
        total += ts.size();
    }
    CHECK(std::abs(static_cast<double>(total) - 0.1 * L * 1000) <= 0.05 * 0.1 * L * 1000);

    SUBCASE("tick windows and rate changes") {
        p.segments = {{0.0, 0.05}, {100.0, 0.5}};
        std::size_t before = 0, after = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            Rng rng(seed, "arrivals");
            for (int k = 0; k < 2000; ++k) {
                for (double t : spawn_arrivals(p, k * 0.1, (k + 1) * 0.1, rng)) (t < 100.0 ? before : after)++;
            }
        }
        CHECK(std::abs(before / 200.0 - 5.0) < 0.05 * 5.0 * 2);
        CHECK(std::abs(after / 200.0 - 50.0) < 0.05 * 50.0);
    }
}

TEST_CASE("arrival process validation") {
    ArrivalProcess p;
    p.period_s = 0.0;
    CHECK_THROWS(p.validate());
    p = {};
    p.kind = ArrivalProcess::Kind::PiecewisePoisson;
    CHECK_THROWS(p.validate());  // no segments
    p.segments = {{0.0, 0.1}, {50.0, 0.0}};
    CHECK_THROWS(p.validate());
    p.segments = {{0.0, 0.1}, {50.0, 0.2}};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("single bag on a 50 m line takes 60 s") {
    const auto r = run(line_config(1, 1), test::assets_for(test::line_spec()));
    CHECK(r.metrics.completed);
    REQUIRE(r.metrics.avg_mission_time_s.size() == 1);
    CHECK(r.metrics.avg_mission_time_s[0] == doctest::Approx(60.0));
    CHECK(r.metrics.sim_time_s == doctest::Approx(60.0).epsilon(0.002));
    CHECK(r.metrics.max_pending == 1);
    CHECK(r.metrics.work_rate_per_aiv[0] == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("zero bags") {
    const auto r = run(line_config(0, 2), test::assets_for(test::line_spec()));
    CHECK(r.metrics.completed);
    CHECK(r.metrics.sim_time_s == 0.0);
    CHECK(r.metrics.max_pending == 0);
    CHECK(r.metrics.n_recharges == 0);
    CHECK(r.metrics.missions_per_aiv == std::vector<int>{0, 0});
}

TEST_CASE("a bag and an idle agent in the same tick are matched that tick") {
    auto cfg = line_config(1, 1);
    Engine e(cfg, test::assets_for(test::line_spec()));
    e.step();
    bool awarded = false;
    for (const auto& rec : e.log().records()) awarded |= rec.kind == EventKind::Award && rec.tick == 0;
    CHECK(awarded);
    CHECK(e.agents()[0].state == AgentState::ToPickup);
}

TEST_CASE("simultaneous station arrivals: lower id takes the bay") {
    auto cfg = quiet_arrivals(line_config(1, 2));
    cfg.battery.enabled = true;
    cfg.battery.initial_soc = 0.2;
    cfg.start_nodes = {"X", "X"};
    Engine e(cfg, test::assets_for(test::line_spec()));
    std::map<std::int64_t, bool> queued;
    while (!e.finished() && e.now_s() < 30.0) {
        e.step();
        for (const auto& st : e.stations()) {
            int charging = 0;
            for (const auto& a : e.agents()) charging += a.state == AgentState::Charging && a.station == st.station();
            REQUIRE(charging <= 1);
        }
    }
    std::vector<Tick> ticks;
    for (const auto& rec : e.log().records()) {
        if (rec.kind == EventKind::StationArrive) {
            queued[rec.integer("agent")] = rec.flag("queued");
            ticks.push_back(rec.tick);
        }
    }
    REQUIRE(ticks.size() == 2);
    CHECK(ticks[0] == ticks[1]);
    CHECK_FALSE(queued[0]);
    CHECK(queued[1]);
}

TEST_CASE("an exhausted agent is flagged and the run goes on") {
    auto cfg = line_config(2, 2);
    cfg.battery.enabled = true;
    cfg.battery.initial_soc = 0.02;
    cfg.wall_limit_s = 400.0;
    const auto r = run(cfg, test::assets_for(test::line_spec()));
    CHECK(r.metrics.faults >= 1);
    CHECK_FALSE(r.metrics.completed);
    CHECK(r.metrics.sim_time_s == doctest::Approx(400.0));
    const auto n = std::count_if(r.log.records().begin(), r.log.records().end(),
                                 [](const auto& rec) { return rec.kind == EventKind::Fault; });
    CHECK(n == r.metrics.faults);
}

TEST_CASE("conservation, exclusivity and counters on the shipped plan") {
    for (const auto s : allocation::all_scenarios()) {
        CAPTURE(allocation::to_string(s));
        SimConfig cfg;
        cfg.scenario = s;
        cfg.seed = 5;
        Engine e(cfg, load_assets(cfg));
        while (!e.finished()) {
            e.step();
            int carried = 0;
            for (const auto& a : e.agents()) {
                carried += a.active && a.state == AgentState::Carrying;
                REQUIRE(a.soc >= 0.0);
                REQUIRE(a.soc <= 1.0);
            }
            REQUIRE(e.arrived() == e.delivered() + carried + e.pending());
            for (const auto& st : e.stations()) {
                int charging = 0;
                for (const auto& a : e.agents()) charging += a.state == AgentState::Charging && a.station == st.station();
                REQUIRE(charging <= 1);
            }
        }
        const auto m = e.metrics();
        CHECK(m.completed);
        CHECK(m.faults == 0);
        CHECK(m.delivered == 100);
        int missions = 0, recharges = 0;
        for (int x : m.missions_per_aiv) missions += x;
        for (int x : m.recharges_per_aiv) recharges += x;
        CHECK(missions == 100);
        CHECK(recharges == m.n_recharges);
        for (const auto& a : e.agents()) CHECK(a.counters.total() == e.tick());
        for (double w : m.work_rate_per_aiv) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
    }
}

TEST_CASE("every bag is awarded exactly once") {
    SimConfig cfg;
    cfg.scenario = Scenario::Sc6;
    const auto r = run(cfg);
    std::map<std::int64_t, int> awards, cfps;
    for (const auto& rec : r.log.records()) {
        if (rec.kind == EventKind::Award) ++awards[rec.integer("bag")];
        if (rec.kind == EventKind::Cfp) ++cfps[rec.integer("bag")];
    }
    CHECK(awards.size() == 100);
    for (const auto& [bag, n] : awards) {
        CHECK(n == 1);
        CHECK(cfps[bag] == 1);
    }
}

TEST_CASE("log replay reproduces the live metrics exactly") {
    for (const auto s : allocation::all_scenarios()) {
        CAPTURE(allocation::to_string(s));
        SimConfig cfg;
        cfg.scenario = s;
        cfg.seed = 11;
        const auto r = run(cfg);
        const auto replayed = compute_metrics(EventLog::from_ndjson(r.log.to_ndjson(), cfg.dt), cfg);
        CHECK(replayed == r.metrics);
    }
}

TEST_CASE("replay rejects malformed logs") {
    SimConfig cfg;
    const auto r = run(cfg);
    auto text = r.log.to_ndjson();
    const auto cut = text.find("\"kind\":\"cfp\"");
    REQUIRE(cut != std::string::npos);
    const auto line_start = text.rfind('\n', cut) + 1;
    const auto line_end = text.find('\n', cut) + 1;
    text.erase(line_start, line_end - line_start);  // drop the first call for proposals
    CHECK_THROWS_AS(compute_metrics(EventLog::from_ndjson(text, cfg.dt), cfg), IntegrityError);
}

TEST_CASE("identical configs give identical state sequences") {
    SimConfig cfg;
    cfg.scenario = Scenario::Sc1;
    cfg.seed = 9;
    const auto assets = load_assets(cfg);
    Engine a(cfg, assets), b(cfg, assets);
    while (!a.finished()) {
        a.step();
        b.step();
        REQUIRE(a.state_hash() == b.state_hash());
    }
    CHECK(b.finished());
    CHECK(a.log() == b.log());
    CHECK(a.log().to_ndjson() == b.log().to_ndjson());

    auto other = cfg;
    other.seed = 10;
    CHECK(run(other, assets).log.to_ndjson() != a.log().to_ndjson());
}

TEST_CASE("fifo spreads work evenly without recharges") {
    for (int n_bags : {100, 101, 237}) {
        SimConfig cfg;
        cfg.scenario = Scenario::Sc2;
        cfg.n_bags = n_bags;
        cfg.battery.enabled = false;
        const auto m = run(cfg).metrics;
        const auto [lo, hi] = std::minmax_element(m.missions_per_aiv.begin(), m.missions_per_aiv.end());
        CHECK(*hi - *lo <= 1);
        CHECK(m.n_recharges == 0);
    }
}

TEST_CASE("halving dt barely moves the result") {
    SimConfig cfg;
    cfg.scenario = Scenario::Sc3;
    const double coarse = run(cfg).metrics.sim_time_s;
    cfg.dt = 0.05;
    const double fine = run(cfg).metrics.sim_time_s;
    CHECK(std::abs(fine - coarse) / coarse < 0.02);
}

TEST_CASE("doubling the arrival rate does not lower the pending peak") {
    std::vector<double> base, doubled;
    for (std::uint64_t seed = 1; seed <= 9; ++seed) {
        SimConfig cfg;
        cfg.scenario = Scenario::Sc3;
        cfg.seed = seed;
        cfg.arrival.kind = ArrivalProcess::Kind::PiecewisePoisson;
        cfg.arrival.segments = {{0.0, 1.0 / 18.0}};
        base.push_back(run(cfg).metrics.max_pending);
        cfg.arrival.segments = {{0.0, 2.0 / 18.0}};
        doubled.push_back(run(cfg).metrics.max_pending);
    }
    CHECK(median(doubled) >= median(base));
}

TEST_CASE("start nodes") {
    auto cfg = line_config(1, 1);
    cfg.start_nodes = {"Nowhere"};
    CHECK_THROWS_AS(Engine(cfg, test::assets_for(test::line_spec())), ConfigError);
    cfg.start_nodes = {"E", "E"};
    CHECK_THROWS_AS(Engine(cfg, test::assets_for(test::line_spec())), ConfigError);
}

TEST_CASE("default wall limit scales with the load") {
    SimConfig cfg;
    const auto assets = load_assets(cfg);
    const double base = default_wall_limit_s(cfg, assets->routes);
    cfg.n_bags = 200;
    CHECK(default_wall_limit_s(cfg, assets->routes) > base);
    CHECK(base > 10 * 1800.0);
}
