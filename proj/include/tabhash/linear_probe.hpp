#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "tabhash/hashers.hpp"

namespace tabhash {

struct ProbeStats {
  std::map<std::uint64_t, std::uint64_t> insert_probes;  // probes -> count
  std::map<std::uint64_t, std::uint64_t> query_probes;
  std::uint64_t total_probes = 0;

  nlohmann::json to_json() const {
    auto hist = [](const auto& m) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& [p, c] : m) j.push_back({p, c});
      return j;
    };
    return {{"insert_probes", hist(insert_probes)},
            {"query_probes", hist(query_probes)},
            {"total_probes", total_probes}};
  }
};

struct LookupResult {
  bool found = false;
  std::uint64_t probes = 0;
  std::uint64_t payload = 0;
};

// Open addressing with linear probing over 2^log2_slots slots. Home slot is
// h(x) mod m; a probe is one slot inspection. Deletion shifts later cluster
// members back instead of leaving tombstones.
template <Hasher H>
class LinearProbeTable {
 public:
  LinearProbeTable(H hasher, unsigned log2_slots)
      : hasher_(std::move(hasher)), mask_(low_mask(log2_slots)), slots_(std::size_t{1} << log2_slots) {
    if (log2_slots > 40) throw ConfigError("linear probing table too large");
  }

  std::size_t capacity() const noexcept { return slots_.size(); }
  std::size_t size() const noexcept { return size_; }
  std::size_t home(Key x) const { return static_cast<std::size_t>(hasher_(x) & mask_); }

  // Probes used. An existing key has its payload overwritten.
  std::uint64_t insert(Key x, std::uint64_t payload = 0) {
    std::size_t i = home(x);
    std::uint64_t probes = 0;
    while (true) {
      ++probes;
      auto& s = slots_[i];
      if (!s) {
        s = Slot{x, payload};
        ++size_;
        record(stats_.insert_probes, probes);
        return probes;
      }
      if (s->key == x) {
        s->payload = payload;
        record(stats_.insert_probes, probes);
        return probes;
      }
      if (probes == slots_.size()) break;
      i = (i + 1) & mask_;
    }
    throw CapacityError("linear probing table full");
  }

  LookupResult query(Key x) const {
    std::size_t i = home(x);
    LookupResult r;
    while (r.probes < slots_.size()) {
      ++r.probes;
      const auto& s = slots_[i];
      if (!s) break;
      if (s->key == x) {
        r.found = true;
        r.payload = s->payload;
        break;
      }
      i = (i + 1) & mask_;
    }
    record(stats_.query_probes, r.probes);
    return r;
  }

  bool erase(Key x) {
    std::size_t i = home(x);
    for (std::size_t n = 0;; i = (i + 1) & mask_) {
      if (!slots_[i]) return false;
      if (slots_[i]->key == x) break;
      if (++n == slots_.size()) return false;
    }
    // Backward shift: move any later cluster member whose home is not in
    // the cyclic interval (i, j] into the hole.
    std::size_t j = i;
    while (true) {
      j = (j + 1) & mask_;
      if (!slots_[j]) break;
      const std::size_t k = home(slots_[j]->key);
      const bool stays = i <= j ? (i < k && k <= j) : (i < k || k <= j);
      if (!stays) {
        slots_[i] = slots_[j];
        i = j;
      }
    }
    slots_[i].reset();
    --size_;
    return true;
  }

  // Every stored key is reachable from its home slot without crossing an
  // empty slot.
  bool check_invariant() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!slots_[i]) continue;
      ++count;
      for (std::size_t k = home(slots_[i]->key); k != i; k = (k + 1) & mask_) {
        if (!slots_[k]) return false;
      }
    }
    return count == size_;
  }

  std::vector<std::optional<Key>> occupancy() const {
    std::vector<std::optional<Key>> out(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i]) out[i] = slots_[i]->key;
    }
    return out;
  }

  const ProbeStats& stats() const noexcept { return stats_; }
  const H& hasher() const noexcept { return hasher_; }

 private:
  struct Slot {
    Key key;
    std::uint64_t payload;
  };

  void record(std::map<std::uint64_t, std::uint64_t>& hist, std::uint64_t probes) const {
    ++hist[probes];
    stats_.total_probes += probes;
  }

  H hasher_;
  std::uint64_t mask_;
  std::vector<std::optional<Slot>> slots_;
  std::size_t size_ = 0;
  mutable ProbeStats stats_;
};

// Hashing with chaining over 2^log2_buckets buckets. Cost of an operation is
// one bucket access plus one per chain element inspected.
template <Hasher H>
class ChainingTable {
 public:
  ChainingTable(H hasher, unsigned log2_buckets)
      : hasher_(std::move(hasher)), mask_(low_mask(log2_buckets)), buckets_(std::size_t{1} << log2_buckets) {}

  std::uint64_t insert(Key x, std::uint64_t /*payload*/ = 0) {
    auto& b = buckets_[hasher_(x) & mask_];
    std::uint64_t probes = 1;
    for (auto k : b) {
      if (k == x) return probes;
      ++probes;
    }
    b.push_back(x);
    ++size_;
    return probes;
  }

  LookupResult query(Key x) const {
    const auto& b = buckets_[hasher_(x) & mask_];
    LookupResult r{false, 1, 0};
    for (auto k : b) {
      if (k == x) {
        r.found = true;
        return r;
      }
      ++r.probes;
    }
    return r;
  }

  bool erase(Key x) {
    auto& b = buckets_[hasher_(x) & mask_];
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] == x) {
        b[i] = b.back();
        b.pop_back();
        --size_;
        return true;
      }
    }
    return false;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t bucket_count() const noexcept { return buckets_.size(); }

 private:
  H hasher_;
  std::uint64_t mask_;
  std::vector<std::vector<Key>> buckets_;
  std::size_t size_ = 0;
};

struct TableOp {
  enum class Kind { insert, query, erase };
  Kind kind;
  Key key;
};

// ceil(lg n), at least 1.
inline std::size_t default_window(std::size_t n) {
  std::size_t w = 0;
  while ((std::size_t{1} << w) < n) ++w;
  return w == 0 ? 1 : w;
}

// Applies `ops` in order and returns the total probe count of each
// consecutive window of `window` operations (last window may be short).
template <class Table>
std::vector<std::uint64_t> window_cost(Table& table, std::span<const TableOp> ops,
                                       std::size_t window) {
  if (window == 0) throw DomainError("window length must be positive");
  std::vector<std::uint64_t> out;
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    switch (op.kind) {
      case TableOp::Kind::insert: acc += table.insert(op.key); break;
      case TableOp::Kind::query: acc += table.query(op.key).probes; break;
      case TableOp::Kind::erase: {
        acc += table.query(op.key).probes;
        table.erase(op.key);
        break;
      }
    }
    if ((i + 1) % window == 0 || i + 1 == ops.size()) {
      out.push_back(acc);
      acc = 0;
    }
  }
  return out;
}

}  // namespace tabhash
