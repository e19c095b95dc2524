#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tabhash/keyspace.hpp"

using namespace tabhash;

namespace {
std::filesystem::path tmp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tabhash_ks_" + name);
}
}  // namespace

TEST_CASE("make_config accepts the documented geometries") {
  const auto a = make_config(8, 4, 32, 0);
  CHECK(a.key_bits() == 32);
  CHECK(a.alphabet() == 256);
  CHECK(a.max_key() == 0xffffffffULL);
  const auto b = make_config(1, 2, 1, 0);
  CHECK(b.max_key() + 1 == 4);
  const auto c = make_config(16, 2, 64, 4);
  CHECK(c.key_bits() == 32);
  CHECK(c.derived_chars() == 4);
  CHECK(make_config(8, 8, 64).max_key() == ~0ULL);
}

TEST_CASE("make_config names the violated bound") {
  auto msg = [](auto f) {
    try {
      f();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg([] { make_config(0, 2, 1); }).find("char_bits") != std::string::npos);
  CHECK(msg([] { make_config(17, 2, 1); }).find("char_bits") != std::string::npos);
  CHECK(msg([] { make_config(8, 0, 1); }).find("c") != std::string::npos);
  CHECK(msg([] { make_config(8, 9, 1); }).find("c") != std::string::npos);
  CHECK(msg([] { make_config(16, 5, 1); }).find("64") != std::string::npos);
  CHECK(msg([] { make_config(8, 4, 0); }).find("out_bits") != std::string::npos);
  CHECK(msg([] { make_config(8, 4, 65); }).find("out_bits") != std::string::npos);
  CHECK(msg([] { make_config(8, 4, 32, 9); }).find("derived") != std::string::npos);
}

TEST_CASE("split_key examples") {
  const auto cfg = make_config(8, 4, 32);
  CHECK(split_key(0, cfg) == std::vector<Char>{0, 0, 0, 0});
  CHECK(split_key(0x04030201, cfg) == std::vector<Char>{1, 2, 3, 4});
  CHECK(split_key(3, make_config(1, 2, 1)) == std::vector<Char>{1, 1});
  CHECK_THROWS_AS(split_key(0x100000000ULL, cfg), DomainError);
}

TEST_CASE("join_chars examples and errors") {
  const auto tiny = make_config(1, 2, 1);
  const std::vector<Char> z{0, 0}, one{1, 0}, four{1, 2, 3, 4};
  CHECK(join_chars(z, tiny) == 0);
  CHECK(join_chars(one, tiny) == 1);
  CHECK(join_chars(four, make_config(8, 4, 32)) == 0x04030201);
  const std::vector<Char> too_short{1};
  const std::vector<Char> too_big{2, 0};
  CHECK_THROWS_AS(join_chars(too_short, tiny), DomainError);
  CHECK_THROWS_AS(join_chars(too_big, tiny), DomainError);
}

TEST_CASE("split/join round trip") {
  for (auto cfg : {make_config(8, 2, 8), make_config(4, 4, 8), make_config(2, 8, 8)}) {
    for (Key x = 0; x <= cfg.max_key(); ++x) {
      const auto v = split_key(x, cfg);
      const auto ref = oracle::shift_mask_split(x, cfg.char_bits(), cfg.chars());
      REQUIRE(std::equal(v.begin(), v.end(), ref.begin()));
      REQUIRE(join_chars(v, cfg) == x);
    }
  }
  std::mt19937_64 rng(7);
  for (auto cfg : {make_config(8, 8, 8), make_config(16, 4, 8), make_config(11, 5, 8)}) {
    for (int i = 0; i < 100000; ++i) {
      const Key x = rng() & cfg.max_key();
      REQUIRE(join_chars(split_key(x, cfg), cfg) == x);
    }
  }
}

TEST_CASE("seeded stream is the ChaCha20 keystream") {
  // Zero key, zero nonce, block 0.
  auto src = EntropySource::seeded(0);
  std::array<std::uint8_t, 8> b{};
  src.read(b);
  const std::array<std::uint8_t, 8> expect{0x76, 0xb8, 0xe0, 0xad, 0xa0, 0xf1, 0x3d, 0x90};
  CHECK(b == expect);
  CHECK(src.kind() == EntropySource::Kind::seeded);
}

TEST_CASE("fill_tables determinism and masking") {
  auto a = EntropySource::seeded(42);
  auto b = EntropySource::seeded(42);
  const auto ta = fill_tables(a, 4, 256, 13);
  CHECK(ta == fill_tables(b, 4, 256, 13));
  REQUIRE(ta.size() == 4);
  for (const auto& t : ta) {
    REQUIRE(t.size() == 256);
    CHECK(t.entry_bits == 13);
    for (auto e : t.entries) CHECK(e < (1u << 13));
  }
  auto c = EntropySource::seeded(1);
  auto d = EntropySource::seeded(2);
  CHECK(fill_tables(c, 2, 16, 32) != fill_tables(d, 2, 16, 32));
}

TEST_CASE("fill_tables consumes bytes in documented order") {
  // Two tables of 2 entries, 12 bits: 2 bytes per entry little-endian, masked.
  const auto path = tmp_path("order.bin");
  {
    std::ofstream os(path, std::ios::binary);
    const unsigned char bytes[] = {0x01, 0xf2, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08};
    os.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
  }
  auto src = EntropySource::from_file(path);
  const auto t = fill_tables(src, 2, 2, 12);
  CHECK(t[0].entries == std::vector<std::uint64_t>{0x201, 0x403});
  CHECK(t[1].entries == std::vector<std::uint64_t>{0x605, 0x807});
  std::filesystem::remove(path);
}

TEST_CASE("file entropy: zeros, exhaustion, unreadable") {
  const auto path = tmp_path("zeros.bin");
  {
    std::ofstream os(path, std::ios::binary);
    const std::string zeros(4 * 256 * 4, '\0');
    os << zeros;
  }
  {
    auto src = EntropySource::from_file(path);
    for (const auto& t : fill_tables(src, 4, 256, 32)) {
      for (auto e : t.entries) CHECK(e == 0);
    }
    CHECK_THROWS_AS(fill_tables(src, 1, 256, 32), EntropyExhausted);
  }
  {
    auto src = EntropySource::from_file(path);
    CHECK_THROWS_AS(fill_tables(src, 5, 256, 32), EntropyExhausted);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(EntropySource::from_file(tmp_path("missing/nothing.bin")), IoError);
}

TEST_CASE("table file round trip") {
  auto src = EntropySource::seeded(9);
  std::vector<TableSection> sections{{8, fill_tables(src, 3, 256, 40)}, {4, fill_tables(src, 2, 16, 7)}};
  const auto path = tmp_path("tables.tbh");
  save_tables(path, sections);
  const auto back = load_tables(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].char_bits == 8);
  CHECK(back[0].tables == sections[0].tables);
  CHECK(back[1].char_bits == 4);
  CHECK(back[1].tables == sections[1].tables);
  // 16-byte header + 3*256*5 bytes + 16 + 2*16*1
  CHECK(std::filesystem::file_size(path) == 16 + 3 * 256 * 5 + 16 + 2 * 16);
  std::filesystem::remove(path);
}

TEST_CASE("table file rejects a bad header") {
  std::stringstream ss;
  ss << "XXXX" << std::string(12, '\0');
  CHECK_THROWS_AS(read_table_section(ss), IoError);
}

TEST_CASE("seed derivation is deterministic and spreads") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(chacha_word(5, 0, 3) == chacha_word(5, 0, 3));
  CHECK(chacha_word(0, 0, 0) == 0x903df1a0ade0b876ULL);
}
