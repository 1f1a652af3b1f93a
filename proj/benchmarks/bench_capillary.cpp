#include <benchmark/benchmark.h>

#include "capillary/flow.hpp"
#include "capillary/scenarios.hpp"
#include "capillary/variation.hpp"

using namespace capillary;

namespace {

const Scenario& scenario(const std::string& name) {
  static std::map<std::string, Scenario> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, make_scenario(name)).first;
  return it->second;
}

void BM_FreeEnergy(benchmark::State& state) {
  const Scenario& s = scenario("touching_half_cylinders");
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(free_energy(s.config, s.potential, level, false).total);
}
BENCHMARK(BM_FreeEnergy)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_ComponentVolumes(benchmark::State& state) {
  const Scenario& s = scenario("triple_wedge");
  for (auto _ : state) benchmark::DoNotOptimize(component_volumes(s.config, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ComponentVolumes)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

/// One fused pass over all fields against one pass per field.
void BM_LagrangeMultiplier(benchmark::State& state) {
  const Scenario& s = scenario("sphere");
  std::vector<AmbientField> fields = seeded_fields(s, 1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lagrange_multiplier(s.config, s.potential, fields, 4).lambda);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LagrangeMultiplier)->RangeMultiplier(2)->Range(4, 32)->Complexity()->Unit(benchmark::kMillisecond);

void BM_FirstVariationPerField(benchmark::State& state) {
  const Scenario& s = scenario("sphere");
  std::vector<AmbientField> fields = seeded_fields(s, 1, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double sum = 0.0;
    for (const AmbientField& X : fields) sum += first_variation_ambient(s.config, s.potential, X, 4);
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_FirstVariationPerField)->RangeMultiplier(2)->Range(4, 32)->Unit(benchmark::kMillisecond);

void BM_JacobiGram(benchmark::State& state) {
  const Scenario& s = scenario("two_balls");
  std::vector<AmbientField> fields = seeded_fields(s, 7, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_gram(s.config, s.potential, fields, 4).jacobi);
}
BENCHMARK(BM_JacobiGram)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);

void BM_FlowAmbient(benchmark::State& state) {
  const Scenario& s = scenario("cylinder");
  AmbientField X = seeded_fields(s, 3, 1).front();
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(free_energy(flow_ambient(s.config, X, 0.01), s.potential, level, false).total);
  }
}
BENCHMARK(BM_FlowAmbient)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_RadialFlowMap(benchmark::State& state) {
  RadialFlow flow{CutoffChi(1.0 / 6.0)};
  Vec3 x(0.2, 0.1, 0.3);
  double t = 0.0;
  for (auto _ : state) {
    t = t < 0.1 ? t + 1e-4 : 0.0;
    benchmark::DoNotOptimize(flow.map(t, x));
  }
}
BENCHMARK(BM_RadialFlowMap);

void BM_CoalescenceEnergy(benchmark::State& state) {
  const Scenario& s = scenario("touching_caps");
  CoalescencePath path(*s.cusp, CutoffChi(s.cusp->R / 6.0), s.potential, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(path.energy(0.01));
}
BENCHMARK(BM_CoalescenceEnergy)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_StationarityCheck(benchmark::State& state) {
  const Scenario& s = scenario("delaunay_neck");
  RunOptions opt;
  opt.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_check(s, CheckKind::stationarity, opt));
}
BENCHMARK(BM_StationarityCheck)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
