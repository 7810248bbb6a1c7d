#include "rigmaint/jacobi_eigen.hpp"
#include "rigmaint/rigidity.hpp"
#include "rigmaint/scenario.hpp"
#include "rigmaint/simulation.hpp"
#include "rigmaint/weights.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

using namespace rigmaint;

namespace {

PositionMatrix random_positions(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  PositionMatrix p(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < 3; ++s) p(i, s) = u(rng);
  }
  return p;
}

Scenario demo() { return load_scenario(std::string(RIGMAINT_SCENARIO_DIR) + "/demo.json"); }

}  // namespace

static void BM_JacobiEigen(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const WeightedFramework wf(Graph::complete(n), random_positions(n, 1));
  const Eigen::MatrixXd r = symmetric_rigidity_matrix(wf);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(r));
  state.SetLabel("3n = " + std::to_string(3 * n));
}
BENCHMARK(BM_JacobiEigen)->Arg(4)->Arg(6)->Arg(12)->Arg(20);

static void BM_RigidityReport(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const WeightedFramework wf(Graph::complete(n), random_positions(n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(rigidity_report(wf));
}
BENCHMARK(BM_RigidityReport)->Arg(6)->Arg(12);

static void BM_WeightField(benchmark::State& state) {
  const Scenario s = demo();
  for (auto _ : state) {
    WeightField f(s.graph, s.positions, s.obstacles, s.weights);
    benchmark::DoNotOptimize(f.weights().data());
  }
}
BENCHMARK(BM_WeightField);

static void BM_Lambda7Gradient(benchmark::State& state) {
  const Scenario s = demo();
  const WeightField f(s.graph, s.positions, s.obstacles, s.weights);
  const WeightedFramework wf = f.framework();
  const RigidityReport r = rigidity_report(wf);
  const WeightGradientProvider provider = f.gradient_provider();
  for (auto _ : state) benchmark::DoNotOptimize(lambda7_gradient_analytic(wf, r.eigvec7, provider));
}
BENCHMARK(BM_Lambda7Gradient);

// One control tick of the demo: measurements, estimator substeps, control,
// integration and diagnostics.
static void BM_SimulationTick(benchmark::State& state) {
  Simulation sim(demo());
  for (auto _ : state) {
    if (sim.done()) {
      state.PauseTiming();
      sim = Simulation(demo());
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(sim.step());
  }
}
BENCHMARK(BM_SimulationTick);

BENCHMARK_MAIN();
