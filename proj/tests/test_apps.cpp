#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "tabhash/cuckoo.hpp"
#include "tabhash/linear_probe.hpp"
#include "tabhash/minwise.hpp"
#include "tabhash/two_choice.hpp"

using namespace tabhash;

namespace {
FunctionHasher constant(std::uint64_t v, unsigned bits = 32) {
  return FunctionHasher([v](Key) { return v; }, bits);
}
FunctionHasher identity(unsigned bits = 64) {
  return FunctionHasher([](Key x) { return x; }, bits);
}
std::vector<Key> distinct_keys(std::size_t n, std::uint64_t seed, unsigned bits = 32) {
  std::mt19937_64 rng(seed);
  std::unordered_set<Key> seen;
  std::vector<Key> out;
  while (out.size() < n) {
    const Key x = rng() & low_mask(bits);
    if (seen.insert(x).second) out.push_back(x);
  }
  return out;
}
}  // namespace

TEST_CASE("linear probing: first insert is one probe") {
  LinearProbeTable<SimpleTab> s(std::get<SimpleTab>(make_hasher(Scheme::simple, TabConfig(8, 4, 32), 1)), 4);
  CHECK(s.insert(42) == 1);
  CHECK(s.query(42).found);
  CHECK(s.query(42).probes == 1);
}

TEST_CASE("linear probing: colliding keys") {
  LinearProbeTable t(constant(0), 5);
  for (std::uint64_t i = 1; i <= 32; ++i) CHECK(t.insert(i * 7) == i);
  CHECK_THROWS_AS(t.insert(1000), CapacityError);
  CHECK(t.insert(7) == 1);  // update in place
  CHECK(t.check_invariant());
}

TEST_CASE("unsuccessful query scans what an insert would") {
  auto h = std::get<SimpleTab>(make_hasher(Scheme::simple, TabConfig(8, 4, 32), 3));
  LinearProbeTable t(h, 10);
  const auto keys = distinct_keys(800, 5);
  for (std::size_t i = 0; i < 700; ++i) t.insert(keys[i]);
  for (std::size_t i = 700; i < 800; ++i) {
    const auto q = t.query(keys[i]);
    CHECK_FALSE(q.found);
    CHECK(t.insert(keys[i]) == q.probes);
  }
}

TEST_CASE("linear probing: Knuth unsuccessful-search formula at half load") {
  double total = 0;
  const int seeds = 30;
  for (int s = 0; s < seeds; ++s) {
    LinearProbeTable t(TrulyRandomHasher(s, 32), 14);
    const auto keys = distinct_keys(1 << 13, 100 + s);
    for (auto k : keys) t.insert(k);
    const auto absent = distinct_keys(20000, 900 + s, 40);
    double sum = 0;
    int cnt = 0;
    std::unordered_set<Key> in(keys.begin(), keys.end());
    for (auto k : absent) {
      if (in.count(k)) continue;
      sum += static_cast<double>(t.query(k).probes);
      ++cnt;
    }
    total += sum / cnt;
  }
  const double mean = total / seeds;
  CHECK(mean == doctest::Approx(2.5).epsilon(0.10));
}

TEST_CASE("linear probing deletion") {
  LinearProbeTable t(identity(), 3);
  const auto empty = t.occupancy();
  t.insert(5);
  CHECK(t.erase(5));
  CHECK(t.occupancy() == empty);
  CHECK(t.size() == 0);
  t.insert(1);
  const auto before = t.occupancy();
  CHECK_FALSE(t.erase(2));
  CHECK(t.occupancy() == before);
  // wraparound cluster 6,7,0,1 with homes 6,6,7,0
  LinearProbeTable w(FunctionHasher([](Key x) { return x >> 8; }, 8), 3);
  w.insert(6 << 8 | 1);
  w.insert(6 << 8 | 2);
  w.insert(7 << 8 | 3);
  w.insert(0 << 8 | 4);
  CHECK(w.erase(6 << 8 | 1));
  CHECK(w.check_invariant());
  for (Key k : {Key(6 << 8 | 2), Key(7 << 8 | 3), Key(0 << 8 | 4)}) CHECK(w.query(k).found);
}

TEST_CASE("linear probing model test against a set") {
  for (auto scheme : {Scheme::simple, Scheme::twisted}) {
    const auto h = make_hasher(scheme, TabConfig(8, 4, 32), 11);
    with_hasher(h, [&](const auto& hh) {
      LinearProbeTable<const std::decay_t<decltype(hh)>&> t(hh, 10);
      std::set<Key> model;
      std::mt19937_64 rng(4);
      for (int i = 0; i < 20000; ++i) {
        const Key k = rng() % 1500;
        const unsigned op = rng() % 3;
        if (op == 0 && model.size() < 900) {
          t.insert(k);
          model.insert(k);
        } else if (op == 1) {
          REQUIRE(t.erase(k) == (model.erase(k) == 1));
        } else {
          REQUIRE(t.query(k).found == (model.count(k) == 1));
        }
        REQUIRE(t.size() == model.size());
        if (i % 97 == 0) REQUIRE(t.check_invariant());
      }
      REQUIRE(t.check_invariant());
    });
  }
}

TEST_CASE("probe statistics serialize") {
  LinearProbeTable t(constant(0), 3);
  t.insert(1);
  t.insert(2);
  t.query(3);
  const auto j = t.stats().to_json();
  CHECK(j["total_probes"] == 1 + 2 + 3);
  CHECK(j["insert_probes"].size() == 2);
}

TEST_CASE("window cost") {
  LinearProbeTable t(constant(0), 6);
  CHECK(window_cost(t, std::span<const TableOp>(), 4).empty());
  std::vector<TableOp> ops;
  for (Key i = 0; i < 8; ++i) ops.push_back({TableOp::Kind::insert, i});
  const auto costs = window_cost(t, std::span<const TableOp>(ops), 8);
  CHECK(costs == std::vector<std::uint64_t>{36});
  LinearProbeTable u(constant(0), 6);
  const auto w = window_cost(u, std::span<const TableOp>(ops), 3);
  CHECK(w == std::vector<std::uint64_t>{1 + 2 + 3, 4 + 5 + 6, 7 + 8});
  ChainingTable c(constant(0), 4);
  CHECK(window_cost(c, std::span<const TableOp>(ops), 8) == std::vector<std::uint64_t>{36});
  CHECK(default_window(1) == 1);
  CHECK(default_window(1 << 16) == 16);
  CHECK(default_window(1000) == 10);
  CHECK_THROWS_AS(window_cost(t, std::span<const TableOp>(ops), 0), DomainError);
}

TEST_CASE("window cost on a half-full twisted table") {
  std::uint64_t worst = 0;
  for (int s = 0; s < 5; ++s) {
    const auto h = std::get<TwistedTab>(make_hasher(Scheme::twisted, TabConfig(8, 4, 32), s));
    LinearProbeTable t(h, 17);
    const auto keys = distinct_keys(1 << 16, s);
    for (auto k : keys) t.insert(k);
    std::vector<TableOp> ops;
    for (auto k : distinct_keys(1 << 14, 1000 + s)) ops.push_back({TableOp::Kind::query, k});
    for (auto c : window_cost(t, std::span<const TableOp>(ops), 16)) worst = std::max(worst, c);
  }
  CHECK(worst <= 20 * 16);
}

TEST_CASE("chaining table") {
  ChainingTable c(identity(), 4);
  CHECK(c.insert(3) == 1);
  CHECK(c.insert(19) == 2);
  CHECK(c.query(19).found);
  CHECK(c.query(35).probes == 3);
  CHECK(c.erase(3));
  CHECK_FALSE(c.erase(3));
  CHECK(c.size() == 1);
}

TEST_CASE("cuckoo examples") {
  const std::vector<Key> one{77};
  const auto h0 = identity(), h1 = FunctionHasher([](Key x) { return x + 1; }, 64);
  const auto r = cuckoo_build(one, h0, h1, 100, 10);
  CHECK(r.success);
  CHECK(r.tables.table0[77] == Key{77});
  const std::vector<Key> three{1, 2, 3};
  const auto c0 = constant(4), c1 = constant(9);
  const auto bad = cuckoo_build(three, c0, c1, 16, kUnboundedKicks);
  CHECK_FALSE(bad.success);
  CHECK(bad.witness.has_value());
  CHECK_FALSE(cuckoo_feasible(three, c0, c1, 16));
  const std::vector<Key> dup{1, 1};
  CHECK_THROWS_AS(cuckoo_build(dup, h0, h1, 16, 10), InputError);
  CHECK(cuckoo_build(three, c0, c1, 16, 5).to_json()["success"] == false);
  CHECK(default_max_kicks(100000) == 32 * 17);
}

TEST_CASE("cuckoo success is insertion-order independent") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 200 + rng() % 800;
    const std::size_t m = static_cast<std::size_t>(n * (0.9 + 0.3 * (t % 4)));
    auto keys = distinct_keys(n, t);
    const auto h0 = std::get<SimpleTab>(make_hasher(Scheme::simple, TabConfig(8, 4, 32), 2 * t));
    const auto h1 = std::get<SimpleTab>(make_hasher(Scheme::simple, TabConfig(8, 4, 32), 2 * t + 1));
    const bool feasible = cuckoo_feasible(keys, h0, h1, m);
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      std::shuffle(keys.begin(), keys.end(), rng);
      const auto r = cuckoo_build(keys, h0, h1, m, kUnboundedKicks);
      REQUIRE(r.success == feasible);
      if (r.success) REQUIRE(cuckoo_valid(r.tables, h0, h1));
    }
  }
}

TEST_CASE("two-choice examples") {
  const std::vector<Key> one{5};
  const auto h = identity(32);
  const auto r = two_choice_place(one, h, 4);
  CHECK(r.max_load == 1);
  std::vector<Key> many;
  for (Key i = 0; i < 1000; ++i) many.push_back(i);
  // bins {0, 1}: low field 0, high field 1
  const auto forced = two_choice_place(many, FunctionHasher([](Key) { return std::uint64_t{1} << 10; }, 32), 10);
  CHECK(forced.max_load == 500);
  std::uint64_t sum = 0;
  for (auto l : forced.loads) sum += l;
  CHECK(sum == 1000);
  CHECK_THROWS_AS(two_choice_place(many, FunctionHasher([](Key x) { return x; }, 16), 10), ConfigError);
}

TEST_CASE("minwise examples") {
  const std::vector<Key> single{9};
  CHECK(minwise_sample(identity(), single).key == 9);
  const std::vector<Key> s{5, 3, 8};
  const auto r = minwise_sample(constant(0), s);
  CHECK(r.key == 3);
  CHECK(r.ties == 2);
  CHECK_THROWS_AS(minwise_sample(identity(), std::span<const Key>()), DomainError);
  const auto h = make_hasher(Scheme::twisted, TabConfig(8, 4, 32), 1);
  const auto keys = distinct_keys(500, 1);
  with_hasher(h, [&](const auto& hh) {
    CHECK(minwise_sample(hh, keys).key == minwise_sample(hh, keys).key);
  });
}

TEST_CASE("jaccard examples") {
  const auto a = distinct_keys(100, 3);
  std::vector<TrulyRandomHasher> hs;
  for (int i = 0; i < 32; ++i) hs.emplace_back(i, 64);
  CHECK(jaccard_estimate(std::span<const TrulyRandomHasher>(hs), a, a) == 1.0);
  std::vector<Key> b;
  for (auto x : a) b.push_back(x + (Key{1} << 40));
  CHECK(jaccard_estimate(std::span<const TrulyRandomHasher>(hs), a, b) == 0.0);
  CHECK_THROWS_AS(jaccard_estimate(std::span<const TrulyRandomHasher>(), a, b), DomainError);
  CHECK(jaccard_estimate_kpartition(identity(), a, a, 8) == 1.0);
  CHECK_THROWS_AS(jaccard_estimate_kpartition(identity(), a, a, 0), DomainError);
}

TEST_CASE("jaccard estimate accuracy with twisted tabulation") {
  // |A u B| = 2000, J = 0.5
  int good = 0;
  const int runs = 100;
  for (int run = 0; run < runs; ++run) {
    const auto u = distinct_keys(2000, 50 + run);
    const std::vector<Key> a(u.begin(), u.begin() + 1500);
    const std::vector<Key> b(u.begin() + 500, u.end());
    std::vector<TwistedTab> hs;
    for (int r = 0; r < 512; ++r) hs.push_back(std::get<TwistedTab>(make_hasher(Scheme::twisted, TabConfig(8, 4, 32), run * 1000 + r)));
    const double e = jaccard_estimate(std::span<const TwistedTab>(hs), a, b);
    good += std::abs(e - 0.5) <= 0.08;
  }
  CHECK(good >= 95);
}

TEST_CASE("k-partition examples") {
  const auto keys = distinct_keys(1000, 4);
  std::vector<LabeledKey> red;
  for (auto k : keys) red.push_back({k, true});
  const auto h = std::get<MixedTab>(make_hasher(Scheme::mixed, TabConfig(8, 4, 32, 4), 3));
  const auto all = kpartition_fraction(h, std::span<const LabeledKey>(red), 64);
  CHECK(all.fraction == 1.0);
  std::set<Key> distinct(all.sampled.begin(), all.sampled.end());
  CHECK(distinct.size() == all.sampled.size());
  std::vector<LabeledKey> mixed;
  for (std::size_t i = 0; i < keys.size(); ++i) mixed.push_back({keys[i], i % 3 == 0});
  const auto one = kpartition_fraction(h, std::span<const LabeledKey>(mixed), 1);
  const auto mw = minwise_sample(h, keys);
  const bool label = (std::find(keys.begin(), keys.end(), mw.key) - keys.begin()) % 3 == 0;
  CHECK(one.fraction == (label ? 1.0 : 0.0));
  CHECK_THROWS_AS(kpartition_fraction(h, std::span<const LabeledKey>(mixed), 3), DomainError);
  CHECK_THROWS_AS(kpartition_fraction(h, std::span<const LabeledKey>(), 4), DomainError);
  const auto sk = KPartitionSketch::build(identity(8), std::vector<Key>{0x81, 0x7f}, 2);
  CHECK(sk.bin(1)->key == 0x81);
  CHECK(sk.bin(1)->local == 1);
  CHECK(sk.bin(0)->local == 0x7f);
}

TEST_CASE("k-partition fraction accuracy with mixed tabulation") {
  const auto keys = distinct_keys(100000, 8);
  std::vector<LabeledKey> items;
  for (std::size_t i = 0; i < keys.size(); ++i) items.push_back({keys[i], i < 30000});
  int good = 0;
  for (int s = 0; s < 100; ++s) {
    const auto h = std::get<MixedTab>(make_hasher(Scheme::mixed, TabConfig(8, 4, 32, 4), 500 + s));
    good += std::abs(kpartition_fraction(h, std::span<const LabeledKey>(items), 1024).fraction - 0.3) <= 0.05;
  }
  CHECK(good >= 95);
}

TEST_CASE("threshold sampling") {
  const auto keys = distinct_keys(100, 2);
  std::vector<WeightedKey> ones, zeros;
  for (auto k : keys) {
    ones.push_back({k, 1.0});
    zeros.push_back({k, 0.0});
  }
  const auto h = make_hasher(Scheme::twisted, TabConfig(8, 4, 32), 7);
  with_hasher(h, [&](const auto& hh) {
    CHECK(threshold_sample(hh, std::span<const WeightedKey>(ones)).size() == 100);
    CHECK(threshold_sample(hh, std::span<const WeightedKey>(zeros)).empty());
  });
  CHECK(sample_threshold(0.1, 4) == 2);  // ceil(1.6)
  CHECK(effective_probability(0.1, 4) == 0.125);
  CHECK(effective_probability(1.0, 64) == 1.0);
  CHECK_THROWS_AS(sample_threshold(1.5, 8), DomainError);
  // h(x) = x with m = 16, p = 0.1: keys 0 and 1 only
  std::vector<WeightedKey> small;
  for (Key x = 0; x < 16; ++x) small.push_back({x, 0.1});
  CHECK(threshold_sample(identity(4), std::span<const WeightedKey>(small)) == std::vector<Key>{0, 1});
}
