#include <benchmark/benchmark.h>

#include "simperc/delaunay.hpp"
#include "simperc/osss.hpp"
#include "simperc/percolation.hpp"
#include "simperc/point_process.hpp"
#include "simperc/rips.hpp"

namespace {

using namespace simperc;

constexpr std::uint64_t kSeed = 20240817;

Realization ball_realization(double lambda, double radius,
                             std::uint64_t replica) {
  return sample_poisson(Region::ball(Point::Zero(2), radius), lambda, kSeed,
                        replica);
}

void BM_EnumerateSimplices(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Realization real = ball_realization(1.0, 8.0, 0);
  for (auto _ : state) {
    SimplexTable table = enumerate_d_simplices(real, d);
    benchmark::DoNotOptimize(table.flat.data());
  }
  state.SetLabel(std::to_string(real.points().size()) + " points");
}
BENCHMARK(BM_EnumerateSimplices)->Arg(1)->Arg(2);

void BM_StarAdjacency(benchmark::State& state) {
  Realization real = ball_realization(1.0, 8.0, 0);
  SimplexTable table = enumerate_d_simplices(real, 1);
  for (auto _ : state) {
    AdjacencyGraph graph =
        star_adjacency(table, real.points(), real.grid(), 2.5);
    benchmark::DoNotOptimize(graph.edges.data());
  }
  state.SetLabel(std::to_string(table.size()) + " simplices");
}
BENCHMARK(BM_StarAdjacency);

void BM_ThetaIndicator(benchmark::State& state) {
  const double r = 5.0;
  Realization real = ball_realization(1.0, r + 2.0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta_indicator(real, 1, r));
  }
}
BENCHMARK(BM_ThetaIndicator);

void BM_CrossingFace(benchmark::State& state) {
  const double n = 6.0;
  Realization real = ball_realization(1.2, n + 4.5, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(crossing_face(real, 1, n));
  }
}
BENCHMARK(BM_CrossingFace);

void BM_Delaunay(benchmark::State& state) {
  Realization real = ball_realization(2.0, 8.0, 3);
  for (auto _ : state) {
    DelaunayComplex cx = delaunay(real);
    benchmark::DoNotOptimize(cx.cells.data());
  }
  state.SetLabel(std::to_string(real.points().size()) + " points");
}
BENCHMARK(BM_Delaunay);

void BM_Exploration(benchmark::State& state) {
  ExplorationSpec spec;
  spec.d = 1;
  spec.s = 2.5;
  spec.r = 5.0;
  spec.L = 10;
  Region window = Region::box(Point::Zero(2), Point::Constant(2, 11.0));
  Realization real = sample_poisson(window, 1.0, kSeed, 4);
  for (auto _ : state) {
    ExplorationState st = explore(real, spec);
    benchmark::DoNotOptimize(st.site_order_flat.data());
  }
}
BENCHMARK(BM_Exploration);

}  // namespace

BENCHMARK_MAIN();
