#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "tabhash/hashers.hpp"

namespace tabhash {

struct TwoChoiceResult {
  std::vector<std::uint32_t> loads;
  std::uint32_t max_load = 0;

  nlohmann::json to_json() const { return {{"loads", loads}, {"max_load", max_load}}; }
};

// Two candidate bins from one evaluation: bits [0, lg n) and [lg n, 2 lg n).
// The ball goes to the lighter bin, the lower index on ties.
template <Hasher H>
TwoChoiceResult two_choice_place(std::span<const Key> keys, const H& h, unsigned bins_log2) {
  if (2 * bins_log2 > h.out_bits()) {
    throw ConfigError("two-choice needs out_bits >= 2 lg(bins)");
  }
  TwoChoiceResult r;
  r.loads.assign(std::size_t{1} << bins_log2, 0);
  const std::uint64_t mask = low_mask(bins_log2);
  for (auto x : keys) {
    const std::uint64_t v = h(x);
    const std::size_t a = v & mask;
    const std::size_t b = (v >> bins_log2) & mask;
    std::size_t pick;
    if (r.loads[a] != r.loads[b]) {
      pick = r.loads[a] < r.loads[b] ? a : b;
    } else {
      pick = std::min(a, b);
    }
    r.max_load = std::max(r.max_load, ++r.loads[pick]);
  }
  return r;
}

}  // namespace tabhash
