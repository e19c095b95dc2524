#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tabhash/hashers.hpp"

namespace tabhash {

struct MinwiseResult {
  Key key = 0;
  std::uint64_t hash = 0;
  std::size_t ties = 0;  // other members sharing the minimum hash value
};

// Key of S with the minimum hash; ties go to the smaller key.
template <Hasher H>
MinwiseResult minwise_sample(const H& h, std::span<const Key> set) {
  if (set.empty()) throw DomainError("minwise sample of an empty set");
  MinwiseResult r{set[0], h(set[0]), 0};
  for (std::size_t i = 1; i < set.size(); ++i) {
    const std::uint64_t v = h(set[i]);
    if (v < r.hash) {
      r = {set[i], v, 0};
    } else if (v == r.hash) {
      ++r.ties;
      if (set[i] < r.key) r.key = set[i];
    }
  }
  return r;
}

// Fraction of hashers whose minimum hash over A equals that over B.
template <Hasher H>
double jaccard_estimate(std::span<const H> hashers, std::span<const Key> a,
                        std::span<const Key> b) {
  if (hashers.empty()) throw DomainError("jaccard estimate needs reps > 0");
  if (a.empty() || b.empty()) throw DomainError("jaccard estimate of an empty set");
  std::size_t agree = 0;
  for (const auto& h : hashers) agree += minwise_sample(h, a).hash == minwise_sample(h, b).hash;
  return static_cast<double>(agree) / static_cast<double>(hashers.size());
}

// One hash split into k = 2^lg_k bins: bin = high lg_k bits of the r-bit
// hash, local value = the remaining low bits. Each bin keeps its minimum
// local value and the (smallest) key attaining it.
class KPartitionSketch {
 public:
  struct Bottom {
    std::uint64_t local;
    Key key;
  };

  template <Hasher H>
  static KPartitionSketch build(const H& h, std::span<const Key> keys, std::size_t k) {
    KPartitionSketch s(h.out_bits(), k);
    for (auto x : keys) s.add(x, h(x));
    return s;
  }

  KPartitionSketch(unsigned out_bits, std::size_t k) : out_bits_(out_bits), bins_(k) {
    if (k == 0 || (k & (k - 1)) != 0) throw DomainError("k-partition needs k a power of two");
    while ((std::size_t{1} << lg_k_) < k) ++lg_k_;
    if (lg_k_ > out_bits) throw ConfigError("k-partition needs lg k <= out_bits");
  }

  void add(Key x, std::uint64_t hash) {
    const unsigned local_bits = out_bits_ - lg_k_;
    const std::size_t bin = lg_k_ == 0 ? 0 : static_cast<std::size_t>(hash >> local_bits);
    const std::uint64_t local = hash & low_mask(local_bits);
    auto& b = bins_[bin];
    if (!b || local < b->local || (local == b->local && x < b->key)) b = Bottom{local, x};
  }

  std::size_t k() const noexcept { return bins_.size(); }
  const std::optional<Bottom>& bin(std::size_t i) const { return bins_.at(i); }

 private:
  unsigned out_bits_;
  unsigned lg_k_ = 0;
  std::vector<std::optional<Bottom>> bins_;
};

// Over bins non-empty for both sets, the fraction whose bottom keys agree.
template <Hasher H>
double jaccard_estimate_kpartition(const H& h, std::span<const Key> a, std::span<const Key> b,
                                   std::size_t k) {
  if (k == 0) throw DomainError("jaccard estimate needs k > 0");
  if (a.empty() || b.empty()) throw DomainError("jaccard estimate of an empty set");
  const auto sa = KPartitionSketch::build(h, a, k);
  const auto sb = KPartitionSketch::build(h, b, k);
  std::size_t both = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (sa.bin(i) && sb.bin(i)) {
      ++both;
      agree += sa.bin(i)->key == sb.bin(i)->key;
    }
  }
  return both == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(both);
}

struct LabeledKey {
  Key key;
  bool red;
};

struct KPartitionEstimate {
  double fraction = 0;
  std::size_t nonempty_bins = 0;
  std::vector<Key> sampled;  // distinct: one bottom key per non-empty bin
};

template <Hasher H>
KPartitionEstimate kpartition_fraction(const H& h, std::span<const LabeledKey> items,
                                       std::size_t k) {
  if (items.empty()) throw DomainError("k-partition estimate of an empty item set");
  KPartitionSketch s(h.out_bits(), k);
  std::unordered_map<Key, bool> red;
  red.reserve(items.size() * 2);
  for (const auto& it : items) {
    s.add(it.key, h(it.key));
    red[it.key] = it.red;
  }
  KPartitionEstimate e;
  std::size_t reds = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!s.bin(i)) continue;
    ++e.nonempty_bins;
    e.sampled.push_back(s.bin(i)->key);
    reds += red[s.bin(i)->key];
  }
  e.fraction = static_cast<double>(reds) / static_cast<double>(e.nonempty_bins);
  return e;
}

struct WeightedKey {
  Key key;
  double p;
};

// ceil(p * 2^out_bits); the effective sampling probability is this over
// 2^out_bits.
inline unsigned __int128 sample_threshold(double p, unsigned out_bits) {
  if (!(p >= 0 && p <= 1)) throw DomainError("sampling probability outside [0, 1]");
  const long double m = std::ldexp(1.0L, static_cast<int>(out_bits));
  return static_cast<unsigned __int128>(std::ceil(static_cast<long double>(p) * m));
}

inline double effective_probability(double p, unsigned out_bits) {
  return static_cast<double>(static_cast<long double>(sample_threshold(p, out_bits)) /
                             std::ldexp(1.0L, static_cast<int>(out_bits)));
}

// x is sampled iff h(x) < ceil(p_x * m), m = 2^out_bits.
template <Hasher H>
std::vector<Key> threshold_sample(const H& h, std::span<const WeightedKey> items) {
  std::vector<Key> out;
  for (const auto& it : items) {
    if (static_cast<unsigned __int128>(h(it.key)) < sample_threshold(it.p, h.out_bits())) {
      out.push_back(it.key);
    }
  }
  return out;
}

}  // namespace tabhash
