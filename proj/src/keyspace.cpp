#include "tabhash/keyspace.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace tabhash {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error("libsodium initialisation failed");
}

std::array<unsigned char, crypto_stream_chacha20_KEYBYTES> key_from_seed(std::uint64_t seed) {
  std::array<unsigned char, crypto_stream_chacha20_KEYBYTES> key{};
  for (int i = 0; i < 8; ++i) key[i] = static_cast<unsigned char>(seed >> (8 * i));
  return key;
}

std::array<unsigned char, crypto_stream_chacha20_NONCEBYTES> nonce_from(std::uint64_t v) {
  std::array<unsigned char, crypto_stream_chacha20_NONCEBYTES> n{};
  for (int i = 0; i < 8; ++i) n[i] = static_cast<unsigned char>(v >> (8 * i));
  return n;
}

void check_range(unsigned value, unsigned lo, unsigned hi, const char* name) {
  if (value < lo || value > hi) {
    throw ConfigError(std::string(name) + " = " + std::to_string(value) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

constexpr std::uint64_t kTrialNonce = 0x0064737369617274ULL;  // "trialsd\0"

}  // namespace

TabConfig::TabConfig(unsigned char_bits, unsigned chars, unsigned out_bits,
                     unsigned derived_chars)
    : char_bits_(char_bits), chars_(chars), out_bits_(out_bits), derived_(derived_chars) {
  check_range(char_bits, 1, 16, "char_bits");
  check_range(chars, 1, 8, "c");
  check_range(out_bits, 1, 64, "out_bits");
  check_range(derived_chars, 0, 8, "derived_chars");
  if (char_bits * chars > 64) {
    throw ConfigError("c * char_bits = " + std::to_string(char_bits * chars) +
                      " exceeds 64");
  }
}

TabConfig make_config(unsigned char_bits, unsigned chars, unsigned out_bits,
                      unsigned derived_chars) {
  return TabConfig(char_bits, chars, out_bits, derived_chars);
}

std::vector<Char> split_key(Key x, const TabConfig& cfg) {
  if (!cfg.contains(x)) {
    throw DomainError("key " + std::to_string(x) + " outside universe of " +
                      std::to_string(cfg.key_bits()) + "-bit keys");
  }
  std::vector<Char> out(cfg.chars());
  for (unsigned i = 0; i < cfg.chars(); ++i) out[i] = char_at(x, i, cfg.char_bits());
  return out;
}

Key join_chars(std::span<const Char> chars, const TabConfig& cfg) {
  if (chars.size() != cfg.chars()) {
    throw DomainError("expected " + std::to_string(cfg.chars()) + " characters, got " +
                      std::to_string(chars.size()));
  }
  Key x = 0;
  for (unsigned i = 0; i < cfg.chars(); ++i) {
    if (chars[i] >= cfg.alphabet()) {
      throw DomainError("character " + std::to_string(chars[i]) + " at position " +
                        std::to_string(i) + " outside alphabet");
    }
    x |= static_cast<Key>(chars[i]) << (i * cfg.char_bits());
  }
  return x;
}

// ---------------------------------------------------------------------------

struct EntropySource::Impl {
  Kind kind;
  std::uint64_t seed = 0;

  // seeded
  std::array<unsigned char, crypto_stream_chacha20_KEYBYTES> key{};
  std::uint64_t next_block = 0;
  std::vector<unsigned char> buffer;
  std::size_t pos = 0;

  // file
  std::ifstream file;
  std::string path;

  static constexpr std::size_t kBlocksPerRefill = 64;

  void refill() {
    buffer.assign(kBlocksPerRefill * 64, 0);
    const auto nonce = nonce_from(0);
    crypto_stream_chacha20_xor_ic(buffer.data(), buffer.data(), buffer.size(), nonce.data(),
                                  next_block, key.data());
    next_block += kBlocksPerRefill;
    pos = 0;
  }

  void read(std::span<std::uint8_t> out) {
    switch (kind) {
      case Kind::seeded: {
        std::size_t done = 0;
        while (done < out.size()) {
          if (pos == buffer.size()) refill();
          const std::size_t n = std::min(out.size() - done, buffer.size() - pos);
          std::memcpy(out.data() + done, buffer.data() + pos, n);
          pos += n;
          done += n;
        }
        break;
      }
      case Kind::os:
        randombytes_buf(out.data(), out.size());
        break;
      case Kind::file: {
        file.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
        if (static_cast<std::size_t>(file.gcount()) != out.size()) {
          throw EntropyExhausted("entropy file " + path + " exhausted");
        }
        break;
      }
    }
  }
};

EntropySource::EntropySource(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
EntropySource::EntropySource(EntropySource&&) noexcept = default;
EntropySource& EntropySource::operator=(EntropySource&&) noexcept = default;
EntropySource::~EntropySource() = default;

EntropySource EntropySource::seeded(std::uint64_t seed) {
  ensure_sodium();
  auto impl = std::make_unique<Impl>();
  impl->kind = Kind::seeded;
  impl->seed = seed;
  impl->key = key_from_seed(seed);
  return EntropySource(std::move(impl));
}

EntropySource EntropySource::os_random() {
  ensure_sodium();
  auto impl = std::make_unique<Impl>();
  impl->kind = Kind::os;
  return EntropySource(std::move(impl));
}

EntropySource EntropySource::from_file(const std::filesystem::path& path) {
  auto impl = std::make_unique<Impl>();
  impl->kind = Kind::file;
  impl->path = path.string();
  impl->file.open(path, std::ios::binary);
  if (!impl->file) throw IoError("cannot open entropy file " + path.string());
  return EntropySource(std::move(impl));
}

EntropySource::Kind EntropySource::kind() const noexcept { return impl_->kind; }
std::uint64_t EntropySource::seed() const noexcept { return impl_->seed; }

void EntropySource::read(std::span<std::uint8_t> out) { impl_->read(out); }

std::uint64_t EntropySource::next_u64() {
  std::array<std::uint8_t, 8> b{};
  read(b);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::vector<CharTable> fill_tables(EntropySource& src, std::size_t count,
                                   std::uint64_t alphabet, unsigned entry_bits) {
  if (entry_bits < 1 || entry_bits > 64) {
    throw ConfigError("entry_bits = " + std::to_string(entry_bits) + " outside [1, 64]");
  }
  const std::size_t width = (entry_bits + 7) / 8;
  const std::uint64_t mask = low_mask(entry_bits);
  std::vector<CharTable> out(count);
  std::vector<std::uint8_t> raw(alphabet * width);
  for (auto& table : out) {
    src.read(raw);
    table.entry_bits = entry_bits;
    table.entries.resize(alphabet);
    for (std::size_t e = 0; e < alphabet; ++e) {
      std::uint64_t v = 0;
      for (std::size_t b = 0; b < width; ++b) {
        v |= static_cast<std::uint64_t>(raw[e * width + b]) << (8 * b);
      }
      table.entries[e] = v & mask;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic{'T', 'B', 'H', '1'};

void put_le(std::ostream& os, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::istream& is, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i) {
    const int ch = is.get();
    if (ch == std::char_traits<char>::eof()) throw IoError("truncated table file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
  }
  return v;
}

}  // namespace

void write_table_section(std::ostream& os, const TableSection& section) {
  if (section.tables.empty()) throw ConfigError("table section without tables");
  const unsigned entry_bits = section.tables.front().entry_bits;
  const std::uint64_t alphabet = std::uint64_t{1} << section.char_bits;
  for (const auto& t : section.tables) {
    if (t.entry_bits != entry_bits || t.size() != alphabet) {
      throw ConfigError("table section with inconsistent table shapes");
    }
  }
  os.write(kMagic.data(), kMagic.size());
  put_le(os, section.char_bits, 2);
  put_le(os, entry_bits, 2);
  put_le(os, section.tables.size(), 4);
  put_le(os, 0, 4);
  const std::size_t width = (entry_bits + 7) / 8;
  for (const auto& t : section.tables) {
    for (auto e : t.entries) put_le(os, e, width);
  }
  if (!os) throw IoError("failed writing table section");
}

TableSection read_table_section(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (is.gcount() != 4 || magic != kMagic) throw IoError("bad table file magic");
  TableSection section;
  section.char_bits = static_cast<unsigned>(get_le(is, 2));
  const auto entry_bits = static_cast<unsigned>(get_le(is, 2));
  const auto count = get_le(is, 4);
  (void)get_le(is, 4);
  if (section.char_bits < 1 || section.char_bits > 16 || entry_bits < 1 || entry_bits > 64) {
    throw IoError("table file header out of range");
  }
  const std::uint64_t alphabet = std::uint64_t{1} << section.char_bits;
  const std::size_t width = (entry_bits + 7) / 8;
  const std::uint64_t mask = low_mask(entry_bits);
  section.tables.resize(count);
  for (auto& t : section.tables) {
    t.entry_bits = entry_bits;
    t.entries.resize(alphabet);
    for (auto& e : t.entries) {
      e = get_le(is, width);
      if (e & ~mask) throw IoError("table entry exceeds declared entry_bits");
    }
  }
  return section;
}

void save_tables(const std::filesystem::path& path, std::span<const TableSection> sections) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& s : sections) write_table_section(os, s);
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

std::vector<TableSection> load_tables(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<TableSection> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_table_section(is));
  return out;
}

std::uint64_t chacha_word(std::uint64_t seed, std::uint64_t nonce, std::uint64_t index) {
  ensure_sodium();
  const auto key = key_from_seed(seed);
  const auto n = nonce_from(nonce);
  std::array<unsigned char, 8> buf{};
  crypto_stream_chacha20_xor_ic(buf.data(), buf.data(), buf.size(), n.data(), index,
                                key.data());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return chacha_word(master, kTrialNonce, index);
}

}  // namespace tabhash
