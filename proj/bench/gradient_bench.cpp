// Compares the OpenMP gradient kernel against the serial reference on a
// seven-cell instance.  The two must agree bitwise (covered by the tests);
// this target measures what the parallel version buys at each size.
#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "covact/mle_core.hpp"
#include "covact/scenario.hpp"

namespace {

struct Fixture {
  covact::Scenario scenario;
  covact::ObservationSet observations;
  covact::SolverState state;
  std::vector<double> out;

  explicit Fixture(int devices)
      : scenario(make(devices)),
        observations(covact::synthesize_observations(
            scenario, covact::draw_truth(scenario.config), covact::ObservationMode::Sampled)),
        state(scenario, observations),
        out(static_cast<std::size_t>(scenario.config.B) * scenario.config.N) {}

  static covact::Scenario make(int devices) {
    covact::ScenarioConfig cfg;
    cfg.N = devices;
    cfg.K = devices / 10;
    cfg.M = 64;
    return covact::make_scenario(cfg);
  }
};

Fixture& fixture_for(int devices) {
  // one cached instance per size so setup cost stays out of the timed loop
  static std::vector<std::unique_ptr<Fixture>> cache;
  for (auto& f : cache)
    if (f->scenario.config.N == devices) return *f;
  cache.push_back(std::make_unique<Fixture>(devices));
  return *cache.back();
}

void BM_GradientParallel(benchmark::State& state) {
  Fixture& f = fixture_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    covact::gradient(f.state, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

void BM_GradientSerial(benchmark::State& state) {
  Fixture& f = fixture_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    covact::gradient_serial(f.state, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

}  // namespace

BENCHMARK(BM_GradientParallel)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientSerial)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
