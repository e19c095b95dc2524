#include "tabhash/prg.hpp"

namespace tabhash {

TwistedPrg::TwistedPrg(const TwistedTab& hasher, Key start)
    : hasher_(&hasher),
      bits_(hasher.config().char_bits()),
      alphabet_(hasher.config().alphabet()),
      tail_limit_(std::uint64_t{1} << (bits_ * (hasher.config().chars() - 1))) {
  const auto& cfg = hasher.config();
  if (cfg.chars() < 2) throw ConfigError("twisted PRG needs c >= 2 (no tail otherwise)");
  if (hasher.head_position() != HeadPosition::low) {
    throw ConfigError("twisted PRG needs the least significant character as head");
  }
  reset(start);
}

void TwistedPrg::reset(Key start) {
  if (!hasher_->config().contains(start)) {
    throw DomainError("PRG start outside universe");
  }
  head_ = start & low_mask(bits_);
  tail_ = start >> bits_;
  exhausted_ = false;
  stale_ = false;
  refresh_tail();
}

void TwistedPrg::refresh_tail() {
  const std::uint64_t s = hasher_->star_xor(tail_ << bits_);
  twister_ = s & low_mask(bits_);
  tail_hash_ = s >> bits_;
  stale_ = false;
  ++recomputations_;
  lookups_ += hasher_->config().chars() - 1;
}

namespace {
constexpr std::uint64_t kTailNonce = 0x0067727024656174ULL;
}

StreamTailPrg::StreamTailPrg(const TabConfig& cfg, std::uint64_t seed, Key start)
    : cfg_(cfg),
      seed_(seed),
      alphabet_(cfg.alphabet()),
      tail_limit_(std::uint64_t{1} << (cfg.char_bits() * (cfg.chars() - 1))) {
  if (cfg.chars() < 2) throw ConfigError("twisted PRG needs c >= 2 (no tail otherwise)");
  if (!cfg.contains(start)) throw DomainError("PRG start outside universe");
  auto src = EntropySource::seeded(seed);
  head_table_ = fill_tables(src, 1, cfg.alphabet(), cfg.out_bits()).front().entries;
  head_ = start & low_mask(cfg.char_bits());
  tail_ = start >> cfg.char_bits();
  refresh_tail();
}

std::pair<Char, std::uint64_t> StreamTailPrg::tail_value(std::uint64_t tail) const {
  // Two keystream words per tail: word 2t -> twister, word 2t+1 -> hash part.
  const std::uint64_t tw = chacha_word(seed_, kTailNonce, 2 * tail);
  const std::uint64_t hp = chacha_word(seed_, kTailNonce, 2 * tail + 1);
  return {static_cast<Char>(tw & low_mask(cfg_.char_bits())), hp & low_mask(cfg_.out_bits())};
}

void StreamTailPrg::refresh_tail() {
  const auto [t, h] = tail_value(tail_);
  twister_ = t;
  tail_hash_ = h;
  stale_ = false;
}

}  // namespace tabhash
