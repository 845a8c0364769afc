#include <benchmark/benchmark.h>

#include "setgap/metric.hpp"
#include "setgap/order.hpp"
#include "setgap/random.hpp"
#include "setgap/sets.hpp"
#include "setgap/witness.hpp"

namespace {

using namespace setgap;

void BM_LexCompare(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const OrderSpec ord = OrderSpec::random(d, 1);
  Rng rng(2);
  Vec x(d), y(d);
  for (int i = 0; i < d; ++i) {
    x[i] = rng.range(-1, 1);
    y[i] = rng.range(-1, 1);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(lex_compare(x, y, ord));
  }
}
BENCHMARK(BM_LexCompare)->Arg(2)->Arg(5)->Arg(16);

void BM_SortApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SortMap map(OrderSpec::canonical(3));
  Rng rng(3);
  const PointSet s = PointSet::sample(n, 3, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(map.apply(s));
  }
}
BENCHMARK(BM_SortApply)->Arg(4)->Arg(32)->Arg(256);

void BM_DTheta(benchmark::State& state) {
  Rng rng(4);
  const PointSet a = PointSet::sample(8, 3, rng);
  const PointSet b = PointSet::sample(8, 3, rng);
  const MetricSpec specs[] = {
      MetricSpec::identity(3),
      MetricSpec{Encoder::moments(3, 4), 2.0},
      MetricSpec{Encoder::random_features(3, 32, 7), 2.0},
  };
  const auto& spec = specs[state.range(0)];
  for (auto _ : state) {
    benchmark::DoNotOptimize(d_theta(a, b, spec));
  }
}
BENCHMARK(BM_DTheta)->Arg(0)->Arg(1)->Arg(2);

void BM_SortingWitness(benchmark::State& state) {
  const OrderSpec ord = OrderSpec::canonical(2);
  const MetricSpec metric = MetricSpec::identity(2);
  SortingWitnessRequest req;
  req.anchor = Vec::Zero(2);
  req.tau = 1e-4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sorting_witness(ord, req, metric));
  }
}
BENCHMARK(BM_SortingWitness);

void BM_PathBisection(benchmark::State& state) {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap map(ord, 0.0);
  const MetricSpec metric = MetricSpec::identity(2);
  std::vector<Vec> pts(3, Vec(2));
  pts[0] << -10, 0;
  pts[1] << -9, 0;
  pts[2] << 0, 0;
  Vec start(2), end(2);
  start << 0, 0;
  end << 10, 10;
  const LinePath path(PointSet(pts), 2, start, end, 0.0, 10.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nonsorting_witness(map, path, 0.0, 10.0, 1e-6, metric));
  }
}
BENCHMARK(BM_PathBisection);

}  // namespace

BENCHMARK_MAIN();
