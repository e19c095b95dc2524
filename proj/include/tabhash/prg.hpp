#pragma once

#include <cstdint>
#include <optional>

#include "tabhash/hashers.hpp"

namespace tabhash {

// Sequential twisted-tabulation generator emitting h(start), h(start+1), ...
// The star XOR of the current tail is cached and recomputed only when the
// head character wraps to 0, so most emissions cost one head lookup and two
// XORs.
class TwistedPrg {
 public:
  // Requires c >= 2 and a low-position head; throws ConfigError otherwise.
  // start must be a valid key (DomainError).
  TwistedPrg(const TwistedTab& hasher, Key start = 0);

  // nullopt once the counter has passed the last key of the universe.
  std::optional<std::uint64_t> next() {
    if (exhausted_) return std::nullopt;
    if (head_ == 0 && stale_) refresh_tail();
    const std::uint64_t out = tail_hash_ ^ hasher_->head_lookup(head_ ^ twister_);
    ++lookups_;
    if (++head_ == alphabet_) {
      head_ = 0;
      if (++tail_ == tail_limit_) {
        exhausted_ = true;
      } else {
        stale_ = true;
      }
    }
    return out;
  }

  // Repositions at `start` (same contract as construction).
  void reset(Key start);

  Key counter() const noexcept { return (tail_ << bits_) | head_; }
  bool exhausted() const noexcept { return exhausted_; }
  std::uint64_t tail_recomputations() const noexcept { return recomputations_; }
  // Character lookups so far, including the initial tail computation.
  std::uint64_t lookups() const noexcept { return lookups_; }

 private:
  void refresh_tail();

  const TwistedTab* hasher_;
  unsigned bits_;
  std::uint64_t alphabet_;
  std::uint64_t tail_limit_;
  std::uint64_t head_ = 0;
  std::uint64_t tail_ = 0;
  std::uint64_t twister_ = 0;
  std::uint64_t tail_hash_ = 0;
  bool stale_ = true;
  bool exhausted_ = false;
  std::uint64_t recomputations_ = 0;
  std::uint64_t lookups_ = 0;
};

// Same construction, but the tail function h* is a seeded ChaCha20 stream
// instead of star tables: h*(tail) is read from keystream block `tail`.
// Only the head table is stored.
class StreamTailPrg {
 public:
  StreamTailPrg(const TabConfig& cfg, std::uint64_t seed, Key start = 0);

  std::optional<std::uint64_t> next() {
    if (exhausted_) return std::nullopt;
    if (head_ == 0 && stale_) refresh_tail();
    const std::uint64_t out = tail_hash_ ^ head_table_[head_ ^ twister_];
    if (++head_ == alphabet_) {
      head_ = 0;
      if (++tail_ == tail_limit_) {
        exhausted_ = true;
      } else {
        stale_ = true;
      }
    }
    return out;
  }

  // The (twister, hash part) pair the stream assigns to a tail value.
  std::pair<Char, std::uint64_t> tail_value(std::uint64_t tail) const;
  const std::vector<std::uint64_t>& head_table() const noexcept { return head_table_; }
  const TabConfig& config() const noexcept { return cfg_; }

 private:
  void refresh_tail();

  TabConfig cfg_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> head_table_;
  std::uint64_t alphabet_;
  std::uint64_t tail_limit_;
  std::uint64_t head_ = 0;
  std::uint64_t tail_ = 0;
  std::uint64_t twister_ = 0;
  std::uint64_t tail_hash_ = 0;
  bool stale_ = true;
  bool exhausted_ = false;
};

}  // namespace tabhash
