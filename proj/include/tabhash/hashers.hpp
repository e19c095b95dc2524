#pragma once

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tabhash/keyspace.hpp"

namespace tabhash {

template <class H>
concept Hasher = requires(const H& h, Key x) {
  { h(x) } -> std::convertible_to<std::uint64_t>;
  { h.out_bits() } -> std::convertible_to<unsigned>;
};

namespace detail {
[[noreturn]] void throw_key_range(Key x, const TabConfig& cfg);
}

// h(x) = XOR_i tables[i][x_i].
class SimpleTab {
 public:
  SimpleTab(const TabConfig& cfg, std::vector<CharTable> tables);
  static SimpleTab random(const TabConfig& cfg, EntropySource& src);

  std::uint64_t operator()(Key x) const {
    if (!cfg_.contains(x)) detail::throw_key_range(x, cfg_);
    return eval(x);
  }
  // No range check; x must be a valid key.
  std::uint64_t eval(Key x) const noexcept {
    const unsigned b = cfg_.char_bits();
    const std::uint64_t mask = low_mask(b);
    const std::uint64_t* t = flat_.data();
    std::uint64_t h = 0;
    for (unsigned i = 0; i < cfg_.chars(); ++i, x >>= b, t += stride_) h ^= t[x & mask];
    return h;
  }

  const TabConfig& config() const noexcept { return cfg_; }
  unsigned out_bits() const noexcept { return cfg_.out_bits(); }
  std::vector<CharTable> tables() const;

 private:
  TabConfig cfg_;
  std::size_t stride_;
  std::vector<std::uint64_t> flat_;
};

enum class HeadPosition { low, high };

// Twisted tabulation. Star entries pack the twister in the low char_bits
// bits and the hash part above it:
//   (t, h_tail) = XOR over tail characters of star[i][x_i]
//   h(x)        = h_tail XOR head[x_head XOR t]
class TwistedTab {
 public:
  // star_tables are ordered by tail position (ascending character index,
  // head skipped). Requires char_bits + out_bits <= 64.
  TwistedTab(const TabConfig& cfg, std::vector<CharTable> star_tables, CharTable head_table,
             HeadPosition head = HeadPosition::low);
  // Draws the c-1 star tables first, then the head table.
  static TwistedTab random(const TabConfig& cfg, EntropySource& src,
                           HeadPosition head = HeadPosition::low);

  std::uint64_t operator()(Key x) const {
    if (!cfg_.contains(x)) detail::throw_key_range(x, cfg_);
    return eval(x);
  }
  std::uint64_t eval(Key x) const noexcept {
    const std::uint64_t s = star_xor(x);
    const Char head = char_at(x, head_index_, cfg_.char_bits());
    return (s >> cfg_.char_bits()) ^ head_[head ^ (s & char_mask_)];
  }

  // Raw packed XOR of the star entries over x's tail characters.
  std::uint64_t star_xor(Key x) const noexcept {
    const unsigned b = cfg_.char_bits();
    std::uint64_t s = 0;
    const std::uint64_t* t = star_flat_.data();
    for (unsigned i = 0; i < cfg_.chars(); ++i) {
      if (i == head_index_) continue;
      s ^= t[char_at(x, i, b)];
      t += stride_;
    }
    return s;
  }

  Key twist_key(Key x) const;
  std::uint64_t head_lookup(Char twisted_head) const noexcept { return head_[twisted_head]; }

  // The mathematically equivalent two-step form: a twister
  // tau: Sigma^{c-1} -> Sigma over the tail and a simple tabulation function
  // over the twisted key. Requires c >= 2.
  struct Decomposed {
    SimpleTab twister;
    SimpleTab simple;
  };
  Decomposed decompose() const;

  const TabConfig& config() const noexcept { return cfg_; }
  unsigned out_bits() const noexcept { return cfg_.out_bits(); }
  HeadPosition head_position() const noexcept { return head_pos_; }
  unsigned head_index() const noexcept { return head_index_; }
  std::vector<CharTable> star_tables() const;
  CharTable head_table() const;

  // Returns a copy whose head-table entry at `twisted_head` is replaced.
  TwistedTab with_head_entry(Char twisted_head, std::uint64_t value) const;

 private:
  TabConfig cfg_;
  HeadPosition head_pos_;
  unsigned head_index_;
  std::uint64_t char_mask_;
  std::size_t stride_;
  std::vector<std::uint64_t> star_flat_;
  std::vector<std::uint64_t> head_;
};

// Double tabulation: outer(inner(x)), inner: Sigma^c -> Sigma^d.
class DoubleTab {
 public:
  DoubleTab(SimpleTab inner, SimpleTab outer);
  // Inner tables are drawn first.
  static DoubleTab random(const TabConfig& cfg, EntropySource& src);

  std::uint64_t operator()(Key x) const { return outer_.eval(inner_(x)); }
  // Derived characters packed as a d-character key.
  Key derived(Key x) const { return inner_(x); }

  const TabConfig& config() const noexcept { return cfg_; }
  unsigned out_bits() const noexcept { return cfg_.out_bits(); }
  const SimpleTab& inner() const noexcept { return inner_; }
  const SimpleTab& outer() const noexcept { return outer_; }

 private:
  TabConfig cfg_;
  SimpleTab inner_;
  SimpleTab outer_;
};

// Mixed tabulation, c + d lookup form. Combined entries pack the d derived
// characters in the low d*char_bits bits and the hash part above.
class MixedTab {
 public:
  MixedTab(const TabConfig& cfg, std::vector<CharTable> combined, SimpleTab derived_part);
  // Combined tables first, then the derived-part tables.
  static MixedTab random(const TabConfig& cfg, EntropySource& src);

  std::uint64_t operator()(Key x) const {
    if (!cfg_.contains(x)) detail::throw_key_range(x, cfg_);
    return eval(x);
  }
  std::uint64_t eval(Key x) const noexcept {
    const std::uint64_t v = combined_.eval(x);
    return (v >> derived_bits_) ^ derived_part_.eval(v & low_mask(derived_bits_));
  }

  // x's c characters followed by its d derived characters.
  std::vector<Char> derive_key(Key x) const;

  const TabConfig& config() const noexcept { return cfg_; }
  unsigned out_bits() const noexcept { return cfg_.out_bits(); }
  std::vector<CharTable> combined_tables() const { return combined_.tables(); }
  const SimpleTab& derived_part() const noexcept { return derived_part_; }

 private:
  TabConfig cfg_;
  unsigned derived_bits_;
  SimpleTab combined_;
  SimpleTab derived_part_;
};

// ((a_{k-1} x^{k-1} + ... + a_0) mod p) mod m with p = 2^61 - 1.
class PolyHasher {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  PolyHasher(std::vector<std::uint64_t> coefficients, std::uint64_t range);
  static PolyHasher random(unsigned k, std::uint64_t range, EntropySource& src);

  std::uint64_t operator()(Key x) const;
  unsigned out_bits() const noexcept { return out_bits_; }
  std::uint64_t range() const noexcept { return range_; }
  const std::vector<std::uint64_t>& coefficients() const noexcept { return coeffs_; }

 private:
  std::vector<std::uint64_t> coeffs_;
  std::uint64_t range_;
  unsigned out_bits_;
};

// ((a*x + b) mod 2^64) >> (64 - out_bits), a odd.
class MultShiftHasher {
 public:
  MultShiftHasher(std::uint64_t a, std::uint64_t b, unsigned out_bits);
  static MultShiftHasher random(unsigned out_bits, EntropySource& src);

  std::uint64_t operator()(Key x) const noexcept {
    return (a_ * x + b_) >> (64 - out_bits_);
  }
  unsigned out_bits() const noexcept { return out_bits_; }
  std::uint64_t multiplier() const noexcept { return a_; }
  std::uint64_t addend() const noexcept { return b_; }

 private:
  std::uint64_t a_;
  std::uint64_t b_;
  unsigned out_bits_;
};

// Idealized baseline: ChaCha20 keyed by the seed, evaluated at block x.
class TrulyRandomHasher {
 public:
  TrulyRandomHasher(std::uint64_t seed, unsigned out_bits);
  std::uint64_t operator()(Key x) const;
  unsigned out_bits() const noexcept { return out_bits_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  unsigned out_bits_;
};

// Arbitrary callable, mostly for degenerate hashers in tests.
class FunctionHasher {
 public:
  FunctionHasher(std::function<std::uint64_t(Key)> fn, unsigned out_bits)
      : fn_(std::move(fn)), out_bits_(out_bits) {}
  std::uint64_t operator()(Key x) const { return fn_(x); }
  unsigned out_bits() const noexcept { return out_bits_; }

 private:
  std::function<std::uint64_t(Key)> fn_;
  unsigned out_bits_;
};

enum class Scheme { simple, twisted, double_tab, mixed, poly, mult_shift, truly_random };

std::string_view scheme_name(Scheme s) noexcept;
Scheme parse_scheme(std::string_view name);  // "poly-k" accepted as poly

using AnyHasher = std::variant<SimpleTab, TwistedTab, DoubleTab, MixedTab, PolyHasher,
                               MultShiftHasher, TrulyRandomHasher>;

// Seeded construction of any scheme. poly_k is the number of coefficients.
AnyHasher make_hasher(Scheme scheme, const TabConfig& cfg, std::uint64_t seed,
                      unsigned poly_k = 2);

Scheme scheme_of(const AnyHasher& h) noexcept;

// std::visit wrapper for call sites that take a concrete Hasher.
template <class F>
decltype(auto) with_hasher(const AnyHasher& h, F&& f) {
  return std::visit(std::forward<F>(f), h);
}

inline std::uint64_t hash_any(const AnyHasher& h, Key x) {
  return std::visit([x](const auto& hh) -> std::uint64_t { return hh(x); }, h);
}

inline unsigned out_bits_of(const AnyHasher& h) {
  return std::visit([](const auto& hh) { return hh.out_bits(); }, h);
}

// One-line JSON descriptor: {"kind":..,"cfg":{..},...}.
std::string hasher_descriptor(const AnyHasher& h);

// Writes PATH (table sections, possibly none) and PATH.json (descriptor).
void save_hasher(const std::filesystem::path& path, const AnyHasher& h);
AnyHasher load_hasher(const std::filesystem::path& path);

}  // namespace tabhash
