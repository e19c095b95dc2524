#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tabhash/error.hpp"

namespace tabhash {

using Key = std::uint64_t;
using Char = std::uint32_t;

// Mask of the low `bits` bits; bits may be 64.
constexpr std::uint64_t low_mask(unsigned bits) noexcept {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Key geometry: c characters of char_bits each, r = out_bits hash bits and
// d = derived_chars derived characters (double / mixed tabulation only).
class TabConfig {
 public:
  // Throws ConfigError naming the violated bound.
  TabConfig(unsigned char_bits, unsigned chars, unsigned out_bits,
            unsigned derived_chars = 0);

  unsigned char_bits() const noexcept { return char_bits_; }
  unsigned chars() const noexcept { return chars_; }
  unsigned out_bits() const noexcept { return out_bits_; }
  unsigned derived_chars() const noexcept { return derived_; }

  std::uint64_t alphabet() const noexcept { return std::uint64_t{1} << char_bits_; }
  unsigned key_bits() const noexcept { return char_bits_ * chars_; }
  // Largest valid key; u - 1 (u itself may be 2^64).
  Key max_key() const noexcept { return low_mask(key_bits()); }
  bool contains(Key x) const noexcept { return x <= max_key(); }

  friend bool operator==(const TabConfig&, const TabConfig&) = default;

 private:
  unsigned char_bits_;
  unsigned chars_;
  unsigned out_bits_;
  unsigned derived_;
};

TabConfig make_config(unsigned char_bits, unsigned chars, unsigned out_bits,
                      unsigned derived_chars = 0);

// Character 0 holds the lowest-order bits.
std::vector<Char> split_key(Key x, const TabConfig& cfg);
Key join_chars(std::span<const Char> chars, const TabConfig& cfg);

inline Char char_at(Key x, unsigned i, unsigned char_bits) noexcept {
  return static_cast<Char>((x >> (i * char_bits)) & low_mask(char_bits));
}

struct CharTable {
  std::vector<std::uint64_t> entries;
  unsigned entry_bits = 0;

  std::size_t size() const noexcept { return entries.size(); }
  std::uint64_t operator[](std::size_t i) const noexcept { return entries[i]; }
  friend bool operator==(const CharTable&, const CharTable&) = default;
};

// Byte stream feeding the character tables.
//
// seeded: ChaCha20 (djb variant, 64-bit nonce) keyed by the seed written
//   little-endian into the first 8 key bytes, remaining key and nonce bytes
//   zero, keystream starting at block 0. Identical seed => identical stream.
// os: libsodium randombytes.
// file: raw bytes of a file, consumed front to back.
class EntropySource {
 public:
  enum class Kind { seeded, os, file };

  static EntropySource seeded(std::uint64_t seed);
  static EntropySource os_random();
  static EntropySource from_file(const std::filesystem::path& path);

  EntropySource(EntropySource&&) noexcept;
  EntropySource& operator=(EntropySource&&) noexcept;
  ~EntropySource();

  Kind kind() const noexcept;
  std::uint64_t seed() const noexcept;

  // Fills `out` with the next bytes of the stream. Throws EntropyExhausted
  // when a file source runs dry.
  void read(std::span<std::uint8_t> out);
  std::uint64_t next_u64();

 private:
  struct Impl;
  explicit EntropySource(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// `count` tables of `alphabet` entries. Table 0 entry 0 is drawn first; each
// entry consumes ceil(entry_bits/8) bytes, packed little-endian, masked to
// entry_bits.
std::vector<CharTable> fill_tables(EntropySource& src, std::size_t count,
                                   std::uint64_t alphabet, unsigned entry_bits);

// Table file: 16-byte header {"TBH1", u16 char_bits, u16 entry_bits,
// u32 count, u32 reserved=0} followed by count * 2^char_bits entries of
// ceil(entry_bits/8) little-endian bytes each. Several sections may be
// concatenated in one file.
struct TableSection {
  unsigned char_bits = 0;
  std::vector<CharTable> tables;
};

void write_table_section(std::ostream& os, const TableSection& section);
TableSection read_table_section(std::istream& is);
void save_tables(const std::filesystem::path& path,
                 std::span<const TableSection> sections);
std::vector<TableSection> load_tables(const std::filesystem::path& path);

// ChaCha20 block `index` keyed by (seed, nonce) truncated to 8 bytes LE.
// Random access, used for per-trial seed splitting and the idealized
// truly-random hasher.
std::uint64_t chacha_word(std::uint64_t seed, std::uint64_t nonce,
                          std::uint64_t index);

// Per-trial seed: chacha_word(master, "trialsd", index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace tabhash
