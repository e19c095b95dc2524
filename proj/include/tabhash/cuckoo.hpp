#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tabhash/hashers.hpp"

namespace tabhash {

// Each table has m slots; key x may live at h0(x) mod m in table 0 or at
// h1(x) mod m in table 1.
struct CuckooTables {
  std::size_t m = 0;
  std::vector<std::optional<Key>> table0;
  std::vector<std::optional<Key>> table1;
};

struct CuckooResult {
  bool success = false;
  std::optional<Key> witness;  // key left without a slot on failure
  std::uint64_t kicks = 0;
  CuckooTables tables;

  nlohmann::json to_json() const {
    nlohmann::json j{{"success", success}, {"kicks", kicks}, {"m", tables.m}};
    j["witness"] = witness ? nlohmann::json(*witness) : nlohmann::json(nullptr);
    return j;
  }
};

// Per-insertion eviction budget selecting the cycle-detecting limit: a
// feasible insertion into a graph with n edges never needs more than
// 2n + 2 evictions, so exceeding it proves the component is overfull.
inline constexpr std::uint64_t kUnboundedKicks = ~std::uint64_t{0};

inline std::uint64_t default_max_kicks(std::size_t n) {
  std::uint64_t lg = 1;
  while ((std::uint64_t{1} << lg) < n) ++lg;
  return 32 * lg;
}

template <Hasher H0, Hasher H1>
CuckooResult cuckoo_build(std::span<const Key> keys, const H0& h0, const H1& h1, std::size_t m,
                          std::uint64_t max_kicks) {
  if (m == 0) throw ConfigError("cuckoo tables need m > 0");
  {
    std::unordered_set<Key> seen;
    seen.reserve(keys.size() * 2);
    for (auto k : keys) {
      if (!seen.insert(k).second) throw InputError("duplicate key in cuckoo input");
    }
  }
  CuckooResult r;
  r.tables.m = m;
  r.tables.table0.assign(m, std::nullopt);
  r.tables.table1.assign(m, std::nullopt);
  const std::uint64_t budget =
      max_kicks == kUnboundedKicks ? 2 * static_cast<std::uint64_t>(keys.size()) + 2 : max_kicks;
  for (auto x : keys) {
    Key cur = x;
    int side = 0;
    bool placed = false;
    for (std::uint64_t kicks = 0; kicks <= budget; ++kicks) {
      auto& slot = side == 0 ? r.tables.table0[h0(cur) % m] : r.tables.table1[h1(cur) % m];
      if (!slot) {
        slot = cur;
        placed = true;
        break;
      }
      std::swap(cur, *slot);
      side ^= 1;
      ++r.kicks;
    }
    if (!placed) {
      r.witness = cur;
      return r;
    }
  }
  r.success = true;
  return r;
}

// Graph criterion: placement exists iff no connected component of the
// bipartite graph {(h0(x), h1(x))} has more edges than vertices.
template <Hasher H0, Hasher H1>
bool cuckoo_feasible(std::span<const Key> keys, const H0& h0, const H1& h1, std::size_t m) {
  std::vector<std::size_t> parent(2 * m);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> vertices(2 * m, 1);
  std::vector<std::size_t> edges(2 * m, 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (auto x : keys) {
    std::size_t a = find(h0(x) % m);
    std::size_t b = find(m + h1(x) % m);
    if (a != b) {
      if (vertices[a] < vertices[b]) std::swap(a, b);
      parent[b] = a;
      vertices[a] += vertices[b];
      edges[a] += edges[b];
    }
    if (++edges[a] > vertices[a]) return false;
  }
  return true;
}

// Every stored key sits in one of its two slots.
template <Hasher H0, Hasher H1>
bool cuckoo_valid(const CuckooTables& t, const H0& h0, const H1& h1) {
  for (std::size_t i = 0; i < t.m; ++i) {
    if (t.table0[i] && h0(*t.table0[i]) % t.m != i) return false;
    if (t.table1[i] && h1(*t.table1[i]) % t.m != i) return false;
  }
  return true;
}

}  // namespace tabhash
