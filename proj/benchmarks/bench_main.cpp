#include <benchmark/benchmark.h>

#include "aivsim/config.hpp"
#include "aivsim/simulation.hpp"

using namespace aivsim;

namespace {

std::shared_ptr<const sim::SimAssets> assets_for(allocation::Scenario s) {
    sim::SimConfig cfg;
    cfg.scenario = s;
    return sim::load_assets(cfg);
}

// Sweeps the inputs across their universes so every rule gets exercised.
void run_model(benchmark::State& state, const fuzzy::FuzzyModel& model) {
    const auto& vars = model.inputs();
    std::vector<double> x(vars.size());
    std::size_t i = 0;
    for (auto _ : state) {
        for (std::size_t k = 0; k < vars.size(); ++k) {
            const double u = static_cast<double>((i * (k + 3)) % 97) / 96.0;
            x[k] = vars[k].lo() + u * (vars[k].hi() - vars[k].lo());
        }
        benchmark::DoNotOptimize(model.evaluate(x));
        ++i;
    }
}

void BM_CostModel(benchmark::State& state) {
    const auto a = assets_for(allocation::Scenario::Sc4);
    run_model(state, *a->models.cost);
}
BENCHMARK(BM_CostModel);

void BM_SpeedModel(benchmark::State& state) {
    const auto a = assets_for(allocation::Scenario::Sc8);
    run_model(state, *a->models.speed);
}
BENCHMARK(BM_SpeedModel);

void BM_RoutingTable(benchmark::State& state) {
    const world::CirculationGraph g(world::load_graph(sim::data_dir() / "graph_default.json"));
    for (auto _ : state) {
        world::RoutingTable t(g);
        benchmark::DoNotOptimize(&t);
    }
}
BENCHMARK(BM_RoutingTable);

void BM_FullRun(benchmark::State& state) {
    const auto s = static_cast<allocation::Scenario>(state.range(0));
    sim::SimConfig cfg;
    cfg.scenario = s;
    const auto assets = sim::load_assets(cfg);
    for (auto _ : state) {
        auto r = sim::run(cfg, assets);
        benchmark::DoNotOptimize(r.metrics.sim_time_s);
    }
}
BENCHMARK(BM_FullRun)->DenseRange(1, 8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
