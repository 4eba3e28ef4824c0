#include "mfldp/action.hpp"
#include "mfldp/lln.hpp"
#include "mfldp/optimize.hpp"
#include "mfldp/rate_function.hpp"
#include "mfldp/simulate.hpp"
#include "mfldp/transient.hpp"

#include <benchmark/benchmark.h>

using namespace mfldp;

namespace {

const JumpRateTable& model(int which) {
  static const JumpRateTable cw(builtin_model("curie-weiss"));
  static const JumpRateTable eg3(builtin_model("eg3"));
  static const JumpRateTable arn(builtin_model("arn"));
  return which == 0 ? cw : which == 1 ? eg3 : arn;
}

SimplexPoint interior(int d) { return SimplexPoint::mix(SimplexPoint::barycenter(d), SimplexPoint::vertex(d, 0), 0.3); }

Vec velocity(int d) {
  Vec b = Vec::LinSpaced(d, -1.0, 1.0);
  return b.array() - b.mean();
}

void BM_FiniteRates(benchmark::State& state) {
  const auto& t = model(static_cast<int>(state.range(0)));
  const LatticePoint x = LatticePoint::nearest(interior(t.d()), 1000);
  std::vector<double> xbuf(static_cast<std::size_t>(t.d())), out(t.size());
  for (auto _ : state) {
    t.finite_rates(1000, x.counts(), xbuf, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FiniteRates)->Arg(0)->Arg(1)->Arg(2);

void BM_LocalRateDual(benchmark::State& state) {
  const auto& t = model(static_cast<int>(state.range(0)));
  const SimplexPoint x = interior(t.d());
  const Vec b = velocity(t.d());
  for (auto _ : state) benchmark::DoNotOptimize(local_rate(t, x, b).value);
}
BENCHMARK(BM_LocalRateDual)->Arg(0)->Arg(1)->Arg(2);

void BM_LocalRatePrimal(benchmark::State& state) {
  const auto& t = model(static_cast<int>(state.range(0)));
  const SimplexPoint x = interior(t.d());
  const Vec b = velocity(t.d());
  for (auto _ : state) benchmark::DoNotOptimize(local_rate_primal(t, x, b).value);
}
BENCHMARK(BM_LocalRatePrimal)->Arg(0)->Arg(1)->Arg(2);

void BM_PathAction(benchmark::State& state) {
  const auto& t = model(1);
  const auto path = PiecewiseLinearPath::straight(SimplexPoint{0.4, 0.3, 0.2, 0.1}, SimplexPoint{0.1, 0.2, 0.3, 0.4}, 1.0,
                                                  static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(path_action(t, path).value);
}
BENCHMARK(BM_PathAction)->Arg(49)->Arg(99);

void BM_IntegrateLln(benchmark::State& state) {
  const auto& t = model(1);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_lln(t, interior(4), 1.0).states.size());
}
BENCHMARK(BM_IntegrateLln);

void BM_MinimizeAction(benchmark::State& state) {
  const auto& t = model(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(minimize_action(t, SimplexPoint{0.5, 0.5}, SimplexPoint{0.2, 0.8}, 1.0).value());
}
BENCHMARK(BM_MinimizeAction)->Unit(benchmark::kMillisecond);

void BM_Gillespie(benchmark::State& state) {
  const auto& t = model(0);
  const int n = static_cast<int>(state.range(0));
  const LatticePoint x0 = LatticePoint::nearest(SimplexPoint{0.5, 0.5}, n);
  std::uint64_t r = 0;
  std::size_t jumps = 0;
  for (auto _ : state) {
    Stream rng(1, r++);
    jumps += gillespie_run(t, x0, 1.0, rng).jumps();
  }
  state.counters["jumps/s"] = benchmark::Counter(static_cast<double>(jumps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Gillespie)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_ExactTransient(benchmark::State& state) {
  const auto& t = model(0);
  const int n = static_cast<int>(state.range(0));
  const LatticePoint x0 = LatticePoint::nearest(SimplexPoint{0.5, 0.5}, n);
  for (auto _ : state) benchmark::DoNotOptimize(exact_transient(t, x0, 0.75).result.terms);
}
BENCHMARK(BM_ExactTransient)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
