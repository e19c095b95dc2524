// Throughput: serial vs OpenMP kernels, per-scheme hashing, PRG vs stdlib.
#include <benchmark/benchmark.h>

#include <cstdlib>
#include <random>

#include "tabhash/kernels.hpp"
#include "tabhash/prg.hpp"

using namespace tabhash;

namespace {

const TabConfig kCfg(8, 4, 32, 4);

std::vector<Key> keys_for(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<Key> keys(n);
  for (auto& k : keys) k = rng() & kCfg.max_key();
  return keys;
}

template <bool Parallel>
void BM_HashBatch(benchmark::State& state) {
  const auto keys = keys_for(static_cast<std::size_t>(state.range(0)));
  std::vector<std::uint64_t> out(keys.size());
  const auto h = std::get<SimpleTab>(make_hasher(Scheme::simple, kCfg, 7));
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::hash_batch_parallel(h, keys, out);
    } else {
      kernels::hash_batch_serial(h, keys, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_BinCounts(benchmark::State& state) {
  const auto keys = keys_for(static_cast<std::size_t>(state.range(0)));
  const auto h = std::get<TwistedTab>(make_hasher(Scheme::twisted, kCfg, 7));
  for (auto _ : state) {
    auto c = Parallel ? kernels::bin_counts_parallel(h, keys, 16) : kernels::bin_counts_serial(h, keys, 16);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Scheme(benchmark::State& state) {
  const auto scheme = static_cast<Scheme>(state.range(0));
  const auto h = make_hasher(scheme, kCfg, 3);
  const auto keys = keys_for(1 << 16);
  state.SetLabel(std::string(scheme_name(scheme)));
  with_hasher(h, [&](const auto& hh) {
    for (auto _ : state) {
      std::uint64_t acc = 0;
      for (auto k : keys) acc ^= hh(k);
      benchmark::DoNotOptimize(acc);
    }
  });
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(keys.size()));
}

void BM_TwistedPrg(benchmark::State& state) {
  auto src = EntropySource::seeded(4);
  const auto h = TwistedTab::random(TabConfig(8, 4, 32), src);
  TwistedPrg prg(h, 0);
  for (auto _ : state) {
    auto v = prg.next();
    if (!v) {
      prg.reset(0);
      v = prg.next();
    }
    benchmark::DoNotOptimize(*v);
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_Mt19937(benchmark::State& state) {
  std::mt19937 rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
  state.SetItemsProcessed(state.iterations());
}

void BM_Random(benchmark::State& state) {
  srandom(4);
  for (auto _ : state) benchmark::DoNotOptimize(random());
  state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK_TEMPLATE(BM_HashBatch, false)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_HashBatch, true)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_BinCounts, false)->Arg(1 << 20);
BENCHMARK_TEMPLATE(BM_BinCounts, true)->Arg(1 << 20);
BENCHMARK(BM_Scheme)->DenseRange(0, 5);
BENCHMARK(BM_TwistedPrg);
BENCHMARK(BM_Mt19937);
BENCHMARK(BM_Random);

BENCHMARK_MAIN();
