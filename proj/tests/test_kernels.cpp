#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "tabhash/kernels.hpp"

using namespace tabhash;

TEST_CASE("parallel hash batch equals serial for every scheme") {
  const TabConfig cfg(8, 4, 32, 4);
  std::mt19937_64 rng(1);
  std::vector<Key> keys(200000);
  for (auto& k : keys) k = rng() & cfg.max_key();
  for (auto s : {Scheme::simple, Scheme::twisted, Scheme::double_tab, Scheme::mixed, Scheme::poly,
                 Scheme::mult_shift, Scheme::truly_random}) {
    const auto h = make_hasher(s, cfg, 5);
    with_hasher(h, [&](const auto& hh) {
      std::vector<std::uint64_t> a(keys.size()), b(keys.size());
      kernels::hash_batch_serial(hh, keys, a);
      kernels::hash_batch_parallel(hh, keys, b);
      CHECK(a == b);
      for (std::size_t i = 0; i < 100; ++i) CHECK(a[i] == hh(keys[i]));
    });
  }
}

TEST_CASE("parallel bin counts equal serial") {
  const TabConfig cfg(8, 4, 32);
  std::vector<Key> keys(1 << 16);
  for (Key i = 0; i < keys.size(); ++i) keys[i] = i * 2654435761u & cfg.max_key();
  const auto h = make_hasher(Scheme::simple, cfg, 9);
  with_hasher(h, [&](const auto& hh) {
    const auto a = kernels::bin_counts_serial(hh, keys, 12);
    const auto b = kernels::bin_counts_parallel(hh, keys, 12);
    CHECK(a == b);
    REQUIRE(a.size() == 4096);
    std::uint64_t total = 0;
    for (auto c : a) total += c;
    CHECK(total == keys.size());
  });
}

TEST_CASE("batch errors propagate") {
  const TabConfig cfg(8, 2, 16);
  const auto h = make_hasher(Scheme::simple, cfg, 1);
  std::vector<Key> keys{1, 2, 0x10000};
  std::vector<std::uint64_t> out(3);
  with_hasher(h, [&](const auto& hh) {
    CHECK_THROWS_AS(kernels::hash_batch_parallel(hh, keys, out), DomainError);
    CHECK_THROWS_AS(kernels::hash_batch_serial(hh, keys, out), DomainError);
  });
  std::vector<std::uint64_t> shorter(2);
  with_hasher(h, [&](const auto& hh) { CHECK_THROWS(kernels::hash_batch_serial(hh, keys, shorter)); });
  CHECK(kernels::max_threads() >= 1);
}
