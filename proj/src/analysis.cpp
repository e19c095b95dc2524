#include "tabhash/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace tabhash {

// --- exact enumeration -------------------------------------------------------

std::uint64_t table_bits(const TabConfig& cfg, TabScheme scheme) {
  const std::uint64_t s = cfg.alphabet();
  const std::uint64_t r = cfg.out_bits();
  if (scheme == TabScheme::simple) return cfg.chars() * s * r;
  return (cfg.chars() - 1) * s * (cfg.char_bits() + r) + s * r;
}

namespace {

constexpr std::uint64_t kMaxEnumerationBits = 24;

// Slices the low bits of `filling` into `count` tables of `entry_bits`.
std::vector<CharTable> tables_from_bits(std::uint64_t& filling, std::size_t count,
                                        std::uint64_t alphabet, unsigned entry_bits) {
  std::vector<CharTable> out(count);
  for (auto& t : out) {
    t.entry_bits = entry_bits;
    t.entries.resize(alphabet);
    for (auto& e : t.entries) {
      e = filling & low_mask(entry_bits);
      filling >>= entry_bits;
    }
  }
  return out;
}

}  // namespace

JointDistribution exact_joint_distribution(const TabConfig& cfg, TabScheme scheme,
                                           std::span<const Key> keys) {
  const std::uint64_t bits = table_bits(cfg, scheme);
  if (bits > kMaxEnumerationBits) {
    throw FeasibilityError("enumeration needs " + std::to_string(bits) +
                           " table bits; limit is " + std::to_string(kMaxEnumerationBits));
  }
  const std::uint64_t cell_bits = std::uint64_t{cfg.out_bits()} * keys.size();
  if (cell_bits > kMaxEnumerationBits) {
    throw FeasibilityError("joint histogram needs " + std::to_string(cell_bits) + " bits");
  }
  for (auto k : keys) {
    if (!cfg.contains(k)) throw DomainError("key outside universe");
  }
  {
    std::unordered_set<Key> seen(keys.begin(), keys.end());
    if (seen.size() != keys.size()) throw DomainError("keys must be distinct");
  }
  if (scheme == TabScheme::twisted && cfg.char_bits() + cfg.out_bits() > 64) {
    throw ConfigError("twisted tabulation needs char_bits + out_bits <= 64");
  }

  JointDistribution out;
  out.keys.assign(keys.begin(), keys.end());
  out.out_bits = cfg.out_bits();
  out.total = std::uint64_t{1} << bits;
  const std::uint64_t cells = std::uint64_t{1} << cell_bits;
  out.histogram.assign(cells, 0);
  const auto fillings = static_cast<std::int64_t>(out.total);
  const unsigned r = cfg.out_bits();

  std::vector<std::uint64_t> outcome(out.total);
#pragma omp parallel for schedule(static)
  for (std::int64_t f = 0; f < fillings; ++f) {
    std::uint64_t rest = static_cast<std::uint64_t>(f);
    std::uint64_t cell = 0;
    if (scheme == TabScheme::simple) {
      SimpleTab h(cfg, tables_from_bits(rest, cfg.chars(), cfg.alphabet(), r));
      for (std::size_t i = 0; i < keys.size(); ++i) cell |= h(keys[i]) << (i * r);
    } else {
      auto star = tables_from_bits(rest, cfg.chars() - 1, cfg.alphabet(), cfg.char_bits() + r);
      auto head = tables_from_bits(rest, 1, cfg.alphabet(), r);
      TwistedTab h(cfg, std::move(star), std::move(head.front()));
      for (std::size_t i = 0; i < keys.size(); ++i) cell |= h(keys[i]) << (i * r);
    }
    outcome[static_cast<std::size_t>(f)] = cell;
  }
  for (auto cell : outcome) ++out.histogram[cell];
  return out;
}

bool JointDistribution::uniform() const {
  if (histogram.empty() || total % histogram.size() != 0) return false;
  const std::uint64_t each = total / histogram.size();
  return std::all_of(histogram.begin(), histogram.end(), [&](auto c) { return c == each; });
}

JointDistribution JointDistribution::marginal(std::span<const std::size_t> subset) const {
  JointDistribution m;
  m.out_bits = out_bits;
  m.total = total;
  for (auto i : subset) {
    if (i >= keys.size()) throw DomainError("marginal index out of range");
    m.keys.push_back(keys[i]);
  }
  m.histogram.assign(std::uint64_t{1} << (out_bits * subset.size()), 0);
  const std::uint64_t mask = low_mask(out_bits);
  for (std::uint64_t cell = 0; cell < histogram.size(); ++cell) {
    std::uint64_t mc = 0;
    for (std::size_t j = 0; j < subset.size(); ++j) {
      mc |= ((cell >> (subset[j] * out_bits)) & mask) << (j * out_bits);
    }
    m.histogram[mc] += histogram[cell];
  }
  return m;
}

// --- derived matrices and peeling -----------------------------------------

DerivedKeyMatrix::DerivedKeyMatrix(unsigned width, unsigned char_bits)
    : width_(width), char_bits_(char_bits) {
  if (width < 1 || width > 8) throw ConfigError("derived matrix width outside [1, 8]");
  if (char_bits < 1 || char_bits > 16) throw ConfigError("char_bits outside [1, 16]");
}

void DerivedKeyMatrix::add_row(Key id, std::span<const Char> chars) {
  if (chars.size() != width_) throw DomainError("row width mismatch");
  for (auto c : chars) {
    if (c >> char_bits_) throw DomainError("row character outside alphabet");
  }
  cells_.insert(cells_.end(), chars.begin(), chars.end());
  ids_.push_back(id);
}

void DerivedKeyMatrix::add_packed(Key id, std::uint64_t packed) {
  for (unsigned j = 0; j < width_; ++j) cells_.push_back(char_at(packed, j, char_bits_));
  ids_.push_back(id);
}

DerivedKeyMatrix derived_matrix(const SimpleTab& inner, unsigned derived_chars,
                                std::span<const Key> keys) {
  const unsigned b = inner.config().char_bits();
  if (inner.config().out_bits() != derived_chars * b) {
    throw ConfigError("inner function does not produce derived_chars characters");
  }
  DerivedKeyMatrix m(derived_chars, b);
  for (auto k : keys) m.add_packed(k, inner(k));
  return m;
}

PeelVerdict peel_unique(const DerivedKeyMatrix& m) {
  PeelVerdict v;
  const std::size_t n = m.rows();
  const unsigned w = m.width();
  const std::size_t alphabet = std::size_t{1} << m.char_bits();
  std::vector<std::uint32_t> count(w * alphabet, 0);
  std::vector<std::uint64_t> row_xor(w * alphabet, 0);
  auto slot = [&](std::size_t row, unsigned pos) { return pos * alphabet + m.at(row, pos); };
  for (std::size_t r = 0; r < n; ++r) {
    for (unsigned j = 0; j < w; ++j) {
      ++count[slot(r, j)];
      row_xor[slot(r, j)] ^= r;
    }
  }
  using Item = std::pair<Key, std::size_t>;  // (key id, row)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (std::size_t r = 0; r < n; ++r) {
    for (unsigned j = 0; j < w; ++j) {
      if (count[slot(r, j)] == 1) {
        ready.emplace(m.id(r), r);
        break;
      }
    }
  }
  std::vector<bool> removed(n, false);
  while (!ready.empty()) {
    const auto [id, r] = ready.top();
    ready.pop();
    if (removed[r]) continue;
    removed[r] = true;
    v.order.push_back(id);
    for (unsigned j = 0; j < w; ++j) {
      const auto s = slot(r, j);
      --count[s];
      row_xor[s] ^= r;
      if (count[s] == 1) {
        const auto holder = static_cast<std::size_t>(row_xor[s]);
        if (!removed[holder]) ready.emplace(m.id(holder), holder);
      }
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (!removed[r]) v.residual.push_back(m.id(r));
  }
  v.peelable = v.residual.empty();
  return v;
}

// --- k-uniqueness ------------------------------------------------------------

bool has_unique_output_char(const FunctionTable& f, std::span<const Key> subset) {
  for (unsigned j = 0; j < f.width; ++j) {
    for (std::size_t a = 0; a < subset.size(); ++a) {
      const Char ca = char_at(f.values[subset[a]], j, f.char_bits);
      bool shared = false;
      for (std::size_t b = 0; b < subset.size() && !shared; ++b) {
        shared = b != a && char_at(f.values[subset[b]], j, f.char_bits) == ca;
      }
      if (!shared) return true;
    }
  }
  return false;
}

namespace {

constexpr std::uint64_t kMaxSubsetWork = std::uint64_t{1} << 32;
constexpr std::uint64_t kMaxBruteSubsets = std::uint64_t{1} << 24;

void check_function(const FunctionTable& f) {
  if (f.width < 1 || f.width > 8 || f.char_bits < 1 || f.char_bits > 16 ||
      f.width * f.char_bits > 64) {
    throw ConfigError("function table geometry out of range");
  }
  for (auto v : f.values) {
    if (v & ~low_mask(f.width * f.char_bits)) throw DomainError("function value out of range");
  }
}

// Number of subsets of size 1..k of a u-set, saturating at limit + 1.
std::uint64_t subset_count(std::uint64_t u, unsigned k, std::uint64_t limit) {
  std::uint64_t total = 0;
  long double binom = 1;
  for (unsigned s = 1; s <= k && s <= u; ++s) {
    binom = binom * static_cast<long double>(u - s + 1) / s;
    if (binom + total > static_cast<long double>(limit)) return limit + 1;
    total += static_cast<std::uint64_t>(binom + 0.5L);
  }
  return total;
}

UniquenessVerdict brute_force_unique(const FunctionTable& f, unsigned k) {
  UniquenessVerdict v;
  const std::size_t u = f.values.size();
  std::vector<Key> pick;
  for (unsigned s = 1; s <= k && s <= u; ++s) {
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      pick.assign(idx.begin(), idx.end());
      ++v.subsets_checked;
      if (!has_unique_output_char(f, pick)) {
        v.unique = false;
        v.witness = pick;
        return v;
      }
      // next combination
      std::size_t i = s;
      while (i > 0 && idx[i - 1] == u - s + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return v;
}

// k <= 4. Subsets of size 2 or 3 without a unique character need two keys
// with identical images. A 4-set without one has, at every position, each
// value repeated; so the four images XOR to zero and at the first position
// where a pair (w, p) sharing a position-j0 value differs, the remaining two
// keys split between w's and p's values.
UniquenessVerdict structured_unique(const FunctionTable& f, unsigned k) {
  UniquenessVerdict v;
  const std::size_t u = f.values.size();
  if (k < 2 || u < 2) return v;

  std::vector<Key> order(u);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Key a, Key b) {
    return f.values[a] != f.values[b] ? f.values[a] < f.values[b] : a < b;
  });
  for (std::size_t i = 1; i < u; ++i) {
    ++v.subsets_checked;
    if (f.values[order[i]] == f.values[order[i - 1]]) {
      v.unique = false;
      v.witness = {std::min(order[i - 1], order[i]), std::max(order[i - 1], order[i])};
      return v;
    }
  }
  if (k < 4 || u < 4) return v;

  const unsigned w = f.width;
  const std::size_t alphabet = std::size_t{1} << f.char_bits;
  std::vector<std::vector<std::vector<Key>>> buckets(w, std::vector<std::vector<Key>>(alphabet));
  for (Key x = 0; x < u; ++x) {
    for (unsigned j = 0; j < w; ++j) buckets[j][char_at(f.values[x], j, f.char_bits)].push_back(x);
  }
  unsigned j0 = 0;
  std::uint64_t best_pairs = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max_bucket = 0;
  for (unsigned j = 0; j < w; ++j) {
    std::uint64_t pairs = 0;
    for (const auto& b : buckets[j]) {
      pairs += b.size() * (b.size() - (b.empty() ? 0 : 1)) / 2;
      max_bucket = std::max<std::uint64_t>(max_bucket, b.size());
    }
    if (pairs < best_pairs) {
      best_pairs = pairs;
      j0 = j;
    }
  }
  if (static_cast<long double>(best_pairs) * max_bucket > kMaxSubsetWork) {
    throw FeasibilityError("exhaustive 4-subset search exceeds work limit");
  }
  std::unordered_map<std::uint64_t, Key> by_image;
  by_image.reserve(u * 2);
  for (Key x = 0; x < u; ++x) by_image.emplace(f.values[x], x);

  for (const auto& bucket : buckets[j0]) {
    for (std::size_t a = 0; a < bucket.size(); ++a) {
      for (std::size_t b = a + 1; b < bucket.size(); ++b) {
        const Key x = bucket[a];
        const Key p = bucket[b];
        const std::uint64_t diff = f.values[x] ^ f.values[p];
        unsigned js = 0;
        while (char_at(diff, js, f.char_bits) == 0) ++js;
        for (Key y : buckets[js][char_at(f.values[x], js, f.char_bits)]) {
          if (y == x || y == p) continue;
          const auto it = by_image.find(diff ^ f.values[y]);
          if (it == by_image.end()) continue;
          const Key z = it->second;
          if (z == x || z == p || z == y) continue;
          ++v.subsets_checked;
          std::vector<Key> set{x, p, y, z};
          if (!has_unique_output_char(f, set)) {
            std::sort(set.begin(), set.end());
            v.unique = false;
            v.witness = set;
            return v;
          }
        }
      }
    }
  }
  return v;
}

}  // namespace

UniquenessVerdict is_k_unique(const FunctionTable& f, unsigned k) {
  check_function(f);
  const std::uint64_t u = f.values.size();
  if (u > (std::uint64_t{1} << 20)) {
    throw FeasibilityError("exhaustive k-uniqueness limited to u <= 2^20, got " +
                           std::to_string(u));
  }
  if (k == 0 || u == 0) return {};
  if (k <= 4) return structured_unique(f, k);
  if (subset_count(u, k, kMaxBruteSubsets) > kMaxBruteSubsets) {
    throw FeasibilityError("exhaustive k-uniqueness for k = " + std::to_string(k) +
                           " exceeds subset limit");
  }
  return brute_force_unique(f, k);
}

UniquenessVerdict is_k_unique_sampled(const FunctionTable& f, unsigned k,
                                      std::uint64_t samples, std::uint64_t seed) {
  check_function(f);
  UniquenessVerdict v;
  v.mode = UniquenessVerdict::Mode::randomized;
  const std::uint64_t u = f.values.size();
  if (k < 2 || u < 2) return v;
  auto src = EntropySource::seeded(seed);
  const unsigned kmax = static_cast<unsigned>(std::min<std::uint64_t>(k, u));
  std::vector<Key> set;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const unsigned size = 2 + static_cast<unsigned>(src.next_u64() % (kmax - 1));
    set.clear();
    while (set.size() < size) {
      const Key x = src.next_u64() % u;
      if (std::find(set.begin(), set.end(), x) == set.end()) set.push_back(x);
    }
    ++v.subsets_checked;
    if (!has_unique_output_char(f, set)) {
      std::sort(set.begin(), set.end());
      v.unique = false;
      v.witness = set;
      return v;
    }
  }
  return v;
}

// --- concentration -----------------------------------------------------------

namespace {
void check_query(const BoundQuery& q) {
  if (!(q.mu >= 0) || !std::isfinite(q.mu)) throw DomainError("Chernoff mu must be >= 0");
  if (!(q.delta > 0) || !std::isfinite(q.delta)) throw DomainError("Chernoff delta must be > 0");
  if (q.side == BoundQuery::Side::lower && q.delta > 1) {
    throw DomainError("lower-tail Chernoff bound needs delta <= 1");
  }
}
}  // namespace

double chernoff_log_bound(const BoundQuery& q) {
  check_query(q);
  double log_base;
  if (q.side == BoundQuery::Side::upper) {
    log_base = q.delta - (1 + q.delta) * std::log1p(q.delta);
  } else {
    // (1-d)^(1-d) -> 1 as d -> 1.
    const double tail = q.delta == 1 ? 0.0 : (1 - q.delta) * std::log1p(-q.delta);
    log_base = -q.delta - tail;
  }
  return std::min(0.0, q.mu * log_base);
}

double chernoff_bound(const BoundQuery& q) { return std::exp(chernoff_log_bound(q)); }

double chernoff_simplified(const BoundQuery& q) {
  check_query(q);
  if (q.delta > 1) throw DomainError("simplified Chernoff form needs delta <= 1");
  const double denom = q.side == BoundQuery::Side::upper ? 3.0 : 2.0;
  return std::exp(-q.delta * q.delta * q.mu / denom);
}

double empirical_central_moment(std::span<const double> samples, unsigned k, double mu) {
  if (samples.empty()) throw DomainError("central moment of an empty sample");
  if (k < 1) throw DomainError("moment order must be >= 1");
  long double acc = 0;
  for (double x : samples) {
    long double d = x - mu;
    long double p = 1;
    for (unsigned i = 0; i < k; ++i) p *= d;
    acc += p;
  }
  return static_cast<double>(acc / samples.size());
}

ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts) {
  ChiSquareResult r;
  r.cells = counts.size();
  if (counts.size() < 2) throw BinningError("chi-square needs at least two cells");
  r.trials = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  const double expected = static_cast<double>(r.trials) / counts.size();
  if (expected < 5) {
    throw BinningError("expected cell count " + std::to_string(expected) +
                       " below 5; coarsen the cells");
  }
  double stat = 0;
  std::uint64_t nonzero = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
    nonzero += c != 0;
  }
  r.statistic = stat;
  r.dof = static_cast<double>(counts.size() - 1);
  r.degenerate = nonzero == 1;
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  return r;
}

ChiSquareResult independence_chi_square(Scheme scheme, const TabConfig& cfg,
                                        std::span<const Key> keys, std::uint64_t trials,
                                        std::uint64_t seed, ChiStatistic stat) {
  if (keys.empty() || keys.size() > 4) throw DomainError("chi-square test takes 1..4 keys");
  {
    std::unordered_set<Key> seen(keys.begin(), keys.end());
    if (seen.size() != keys.size()) throw DomainError("keys must be distinct");
  }
  const unsigned r = cfg.out_bits();
  const std::uint64_t cell_bits = stat == ChiStatistic::joint ? r * keys.size() : r;
  if (cell_bits > kMaxEnumerationBits) throw BinningError("too many chi-square cells");
  const std::uint64_t cells = std::uint64_t{1} << cell_bits;
  if (static_cast<double>(trials) / static_cast<double>(cells) < 5) {
    throw BinningError("expected cell count below 5 with " + std::to_string(trials) +
                       " trials over " + std::to_string(cells) + " cells");
  }
  std::vector<std::uint64_t> outcome(trials);
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < n; ++t) {
    const auto h = make_hasher(scheme, cfg, derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::uint64_t cell = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const std::uint64_t v = hash_any(h, keys[i]) & low_mask(r);
      cell = stat == ChiStatistic::joint ? cell | (v << (i * r)) : cell ^ v;
    }
    outcome[static_cast<std::size_t>(t)] = cell;
  }
  std::vector<std::uint64_t> counts(cells, 0);
  for (auto c : outcome) ++counts[c];
  return chi_square_uniform(counts);
}

}  // namespace tabhash
