#include "tabhash/reference.hpp"

namespace tabhash {

std::uint32_t simple_tab32(std::uint32_t x, const Simple32Tables& H) {
  std::uint32_t i;
  std::uint32_t h = 0;
  std::uint8_t c;
  for (i = 0; i < 4; i++) {
    c = static_cast<std::uint8_t>(x);
    h ^= H[i][c];
    x = x >> 8;
  }
  return h;
}

std::uint32_t twisted_tab32(std::uint32_t x, const Twisted32Tables& H) {
  std::uint32_t i;
  std::uint64_t h = 0;
  std::uint8_t c;
  for (i = 0; i < 3; i++) {
    c = static_cast<std::uint8_t>(x);
    h ^= H[i][c];
    x = x >> 8;
  }
  c = static_cast<std::uint8_t>(x ^ h);
  h ^= H[i][c];
  h >>= 32;
  return static_cast<std::uint32_t>(h);
}

namespace {
void require_geometry(const TabConfig& cfg) {
  if (cfg.char_bits() != 8 || cfg.chars() != 4 || cfg.out_bits() != 32) {
    throw ConfigError("32-bit reference routines need geometry (8, 4, 32)");
  }
}
}  // namespace

Simple32Tables to_simple32(const SimpleTab& h) {
  require_geometry(h.config());
  Simple32Tables out{};
  const auto tables = h.tables();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t v = 0; v < 256; ++v) out[i][v] = static_cast<std::uint32_t>(tables[i][v]);
  }
  return out;
}

Twisted32Tables to_twisted32(const TwistedTab& h) {
  require_geometry(h.config());
  if (h.head_position() != HeadPosition::high) {
    throw ConfigError("32-bit twisted reference twists the most significant character");
  }
  Twisted32Tables out{};
  const auto star = h.star_tables();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t v = 0; v < 256; ++v) {
      const std::uint64_t e = star[i][v];
      out[i][v] = ((e >> 8) << 32) | (e & 0xff);
    }
  }
  const auto head = h.head_table();
  for (std::size_t v = 0; v < 256; ++v) out[3][v] = head[v] << 32;
  return out;
}

std::uint32_t reference_hash32(RefKind kind, std::uint32_t x, const AnyHasher& h) {
  if (kind == RefKind::simple) {
    const auto* s = std::get_if<SimpleTab>(&h);
    if (s == nullptr) throw ConfigError("simple reference needs a simple tabulation hasher");
    return simple_tab32(x, to_simple32(*s));
  }
  const auto* t = std::get_if<TwistedTab>(&h);
  if (t == nullptr) throw ConfigError("twisted reference needs a twisted tabulation hasher");
  return twisted_tab32(x, to_twisted32(*t));
}

}  // namespace tabhash
