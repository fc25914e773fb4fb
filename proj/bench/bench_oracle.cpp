#include <benchmark/benchmark.h>

#include <map>

#include "busweaver/oracle.hpp"
#include "busweaver/report.hpp"
#include "busweaver/vectorizer.hpp"

using namespace busweaver;

namespace {

struct Pair {
  HwDesign orig;
  HwDesign vec;
};

const Pair& pair_for(Width width) {
  static std::map<Width, Pair> cache;
  auto it = cache.find(width);
  if (it == cache.end()) {
    HwDesign d = make_scaling_design(width);
    HwDesign v = run_pipeline(d).design;
    it = cache.emplace(width, Pair{std::move(d), std::move(v)}).first;
  }
  return it->second;
}

OracleOptions options(int threads) {
  OracleOptions o;
  o.samples = 1 << 14;
  o.threads = threads;
  return o;
}

void BM_OracleSerial(benchmark::State& state) {
  const Pair& p = pair_for(static_cast<Width>(state.range(0)));
  const auto o = options(1);
  for (auto _ : state) {
    auto v = check_equivalence_serial(p.orig, *p.orig.find(p.orig.top), p.vec, *p.vec.find(p.vec.top), o);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * o.samples);
}

void BM_OracleBitSliced(benchmark::State& state) {
  const Pair& p = pair_for(static_cast<Width>(state.range(0)));
  const auto o = options(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto v = check_equivalence(p.orig, *p.orig.find(p.orig.top), p.vec, *p.vec.find(p.vec.top), o);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * o.samples);
}

}  // namespace

BENCHMARK(BM_OracleSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleBitSliced)
    ->ArgsProduct({{16, 64, 256}, {1, 0}})
    ->ArgNames({"width", "threads"})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
