#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tabhash/prg.hpp"

using namespace tabhash;

namespace {
TwistedTab seeded(const TabConfig& cfg, std::uint64_t seed) {
  auto src = EntropySource::seeded(seed);
  return TwistedTab::random(cfg, src);
}
}  // namespace

TEST_CASE("first emission is h(start)") {
  const TabConfig cfg(8, 4, 32);
  const auto h = seeded(cfg, 1);
  for (Key start : {0ULL, 5ULL, 255ULL, 256ULL, 0xfffffffeULL}) {
    TwistedPrg p(h, start);
    CHECK(*p.next() == h(start));
    CHECK(p.counter() == start + 1);
  }
}

TEST_CASE("same hasher and start give identical streams") {
  const auto h = seeded(TabConfig(8, 3, 24), 2);
  TwistedPrg a(h, 17), b(h, 17);
  for (int i = 0; i < 5000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("stream equals pointwise hashing") {
  const TabConfig cfg(8, 4, 32);
  const auto h = seeded(cfg, 3);
  TwistedPrg p(h, 0);
  for (Key x = 0; x < 1000000; ++x) REQUIRE(*p.next() == h(x));
}

TEST_CASE("exhaustive stream at tiny geometry, then exhaustion") {
  for (auto cfg : {TabConfig(2, 3, 5), TabConfig(1, 2, 1), TabConfig(4, 2, 16)}) {
    const auto h = seeded(cfg, 4);
    TwistedPrg p(h, 0);
    for (Key x = 0; x <= cfg.max_key(); ++x) REQUIRE(*p.next() == h(x));
    CHECK(p.exhausted());
    CHECK_FALSE(p.next().has_value());
    p.reset(3);
    CHECK_FALSE(p.exhausted());
    CHECK(*p.next() == h(3));
  }
}

TEST_CASE("all-zero tables give a zero stream") {
  const TabConfig cfg(4, 2, 8);
  TwistedTab z(cfg, {CharTable{std::vector<std::uint64_t>(16, 0), 12}}, CharTable{std::vector<std::uint64_t>(16, 0), 8});
  TwistedPrg p(z, 0);
  while (auto v = p.next()) CHECK(*v == 0);
}

TEST_CASE("tail recomputed once per alphabet sweep") {
  const TabConfig cfg(8, 4, 32);
  const auto h = seeded(cfg, 5);
  TwistedPrg p(h, 0);
  const std::uint64_t n = 256 * 1000;
  std::uint64_t last = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    p.next();
    if (p.tail_recomputations() != last) {
      CHECK(i % 256 == 0);
      last = p.tail_recomputations();
    }
  }
  CHECK(p.tail_recomputations() == n / 256);
  // 1 head lookup per emission + (c-1) star lookups per recomputation
  CHECK(p.lookups() == n + 3 * (n / 256));
  const double per = static_cast<double>(p.lookups()) / n;
  CHECK(per == doctest::Approx(1.0 + 3.0 / 256).epsilon(1e-12));
}

TEST_CASE("construction errors") {
  auto src = EntropySource::seeded(1);
  const auto c1 = TwistedTab::random(TabConfig(8, 1, 8), src);
  CHECK_THROWS_AS(TwistedPrg(c1, 0), ConfigError);
  const auto high = TwistedTab::random(TabConfig(8, 2, 8), src, HeadPosition::high);
  CHECK_THROWS_AS(TwistedPrg(high, 0), ConfigError);
  const auto ok = TwistedTab::random(TabConfig(8, 2, 8), src);
  CHECK_THROWS_AS(TwistedPrg(ok, 65536), DomainError);
}

TEST_CASE("stream-tail generator") {
  const TabConfig cfg(8, 3, 32);
  StreamTailPrg a(cfg, 9, 0), b(cfg, 9, 0), c(cfg, 10, 0);
  bool differs = false;
  for (std::uint64_t x = 0; x < 100000; ++x) {
    const auto va = *a.next();
    CHECK(va == *b.next());
    differs |= va != *c.next();
    const auto [t, part] = a.tail_value(x >> 8);
    REQUIRE(va == (part ^ a.head_table()[(x & 255) ^ t]));
    REQUIRE(va <= 0xffffffffULL);
  }
  CHECK(differs);
  StreamTailPrg late(cfg, 9, 70000);
  StreamTailPrg early(cfg, 9, 0);
  for (int i = 0; i < 70000; ++i) early.next();
  for (int i = 0; i < 1000; ++i) CHECK(late.next() == early.next());
}
