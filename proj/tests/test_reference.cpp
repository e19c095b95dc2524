#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "tabhash/reference.hpp"

using namespace tabhash;

namespace {

std::vector<std::pair<std::uint32_t, std::uint32_t>> golden(const std::string& name) {
  std::ifstream is(std::string(TABHASH_FIXTURES) + "/" + name);
  REQUIRE(is);
  std::string line;
  std::getline(is, line);
  CHECK(line == "key,hash");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  while (std::getline(is, line)) {
    const auto comma = line.find(',');
    out.emplace_back(std::stoul(line.substr(0, comma), nullptr, 16),
                     std::stoul(line.substr(comma + 1), nullptr, 16));
  }
  return out;
}

const TabConfig kRef(8, 4, 32);

}  // namespace

TEST_CASE("all-zero tables give zero") {
  Simple32Tables s{};
  Twisted32Tables t{};
  for (std::uint32_t x : {0u, 1u, 0xdeadbeefu}) {
    CHECK(simple_tab32(x, s) == 0);
    CHECK(twisted_tab32(x, t) == 0);
  }
}

TEST_CASE("simple_hash matches the reference routine") {
  auto src = EntropySource::seeded(42);
  const auto h = SimpleTab::random(kRef, src);
  const auto t = to_simple32(h);
  std::mt19937 rng(1);
  for (int i = 0; i < 1000000; ++i) {
    const std::uint32_t x = rng();
    REQUIRE(h(x) == simple_tab32(x, t));
  }
  CHECK(reference_hash32(RefKind::simple, 0x01020304u, AnyHasher(h)) == h(0x01020304u));
}

TEST_CASE("twisted_hash matches the reference routine") {
  auto src = EntropySource::seeded(42);
  const auto h = TwistedTab::random(kRef, src, HeadPosition::high);
  const auto t = to_twisted32(h);
  std::mt19937 rng(2);
  for (int i = 0; i < 1000000; ++i) {
    const std::uint32_t x = rng();
    REQUIRE(h(x) == twisted_tab32(x, t));
  }
  CHECK(reference_hash32(RefKind::twisted, 77u, AnyHasher(h)) == h(77u));
}

TEST_CASE("golden vectors from seed-42 tables") {
  auto s1 = EntropySource::seeded(42);
  const auto simple = SimpleTab::random(kRef, s1);
  auto s2 = EntropySource::seeded(42);
  const auto twisted = TwistedTab::random(kRef, s2, HeadPosition::high);
  const auto gs = golden("golden_simple32.csv");
  const auto gt = golden("golden_twisted32.csv");
  REQUIRE(gs.size() == 10);
  REQUIRE(gt.size() == 10);
  const auto ts = to_simple32(simple);
  const auto tt = to_twisted32(twisted);
  for (const auto& [x, v] : gs) {
    CHECK(simple_tab32(x, ts) == v);
    CHECK(simple(x) == v);
  }
  for (const auto& [x, v] : gt) {
    CHECK(twisted_tab32(x, tt) == v);
    CHECK(twisted(x) == v);
  }
}

TEST_CASE("wrong geometry is rejected") {
  auto src = EntropySource::seeded(1);
  CHECK_THROWS_AS(to_simple32(SimpleTab::random(TabConfig(8, 4, 16), src)), ConfigError);
  CHECK_THROWS_AS(to_simple32(SimpleTab::random(TabConfig(16, 2, 32), src)), ConfigError);
  CHECK_THROWS_AS(to_twisted32(TwistedTab::random(kRef, src, HeadPosition::low)), ConfigError);
  CHECK_THROWS_AS(reference_hash32(RefKind::simple, 1, make_hasher(Scheme::twisted, kRef, 1)), ConfigError);
}
