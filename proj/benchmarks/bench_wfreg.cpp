#include <benchmark/benchmark.h>

#include <random>

#include "../tests/support.hpp"
#include "wfreg/checkers.hpp"
#include "wfreg/constructions.hpp"
#include "wfreg/timestamp.hpp"
#include "wfreg/trace.hpp"

using namespace wfreg;

namespace {

std::vector<History> corpus(std::size_t ops, std::size_t writers, std::size_t count) {
  std::mt19937_64 rng(ops * 31 + writers);
  testing::GenOptions g;
  g.max_ops = ops;
  g.writers = writers;
  std::vector<History> out;
  while (out.size() < count) out.push_back(testing::random_history(rng, g));
  return out;
}

TaggedOptions small() {
  TaggedOptions o;
  o.domain = 3;
  o.max_seq = 8;
  return o;
}

}  // namespace

static void BM_CheckAtomic(benchmark::State& state) {
  const auto hs = corpus(static_cast<std::size_t>(state.range(0)), 2, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_level(hs[i++ % hs.size()], SemanticsLevel::Atomic).pass);
  }
}
BENCHMARK(BM_CheckAtomic)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_BruteForceAtomic(benchmark::State& state) {
  const auto hs = corpus(static_cast<std::size_t>(state.range(0)), 2, 256);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_atomic(hs[i++ % hs.size()]));
}
BENCHMARK(BM_BruteForceAtomic)->Arg(4)->Arg(6)->Arg(8);

static void BM_CheckRegular(benchmark::State& state) {
  const auto hs = corpus(static_cast<std::size_t>(state.range(0)), 1, 256);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_level(hs[i++ % hs.size()], SemanticsLevel::Regular).pass);
  }
}
BENCHMARK(BM_CheckRegular)->Arg(8)->Arg(32);

static void BM_TraceRoundTrip(benchmark::State& state) {
  const auto hs = corpus(16, 2, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_trace(serialize_trace(hs[i++ % hs.size()])));
  }
}
BENCHMARK(BM_TraceRoundTrip);

static void BM_EnumerateMultiwriter(benchmark::State& state) {
  const auto spec = build_multiwriter(2, small());
  const Workload w{{{OpKind::Write, 1}}, {{OpKind::Write, 2}, {OpKind::Read, 0}}};
  std::uint64_t n = 0;
  for (auto _ : state) {
    n = enumerate_executions(spec, w, {}, [](const Execution&) { return true; }).executions;
  }
  state.counters["executions"] = static_cast<double>(n);
}
BENCHMARK(BM_EnumerateMultiwriter)->Unit(benchmark::kMillisecond);

static void BM_EnumerateCts(benchmark::State& state) {
  const auto spec = build_cts(2, small());
  const Workload w{{{OpKind::Label, 1}}, {{OpKind::Label, 2}, {OpKind::Scan, 0}}};
  for (auto _ : state) {
    enumerate_executions(spec, w, {}, [](const Execution& e) {
      benchmark::DoNotOptimize(check_cts(extract_history(e, Scope::High)).pass);
      return true;
    });
  }
}
BENCHMARK(BM_EnumerateCts)->Unit(benchmark::kMillisecond);

static void BM_RandomExecutionMultireader(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = build_multireader(n, small());
  Workload w(n + 1);
  w[0] = {{OpKind::Write, 1}, {OpKind::Write, 2}};
  for (std::size_t r = 1; r <= n; ++r) w[r] = {{OpKind::Read, 0}, {OpKind::Read, 0}};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(random_execution(spec, w, seed++).events.size());
}
BENCHMARK(BM_RandomExecutionMultireader)->Arg(2)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
