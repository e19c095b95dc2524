#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabhash/hashers.hpp"

namespace tabhash {

// --- exact enumeration -------------------------------------------------------

enum class TabScheme { simple, twisted };

struct JointDistribution {
  std::vector<Key> keys;
  unsigned out_bits = 0;
  // Outcome index packs h(keys[0]) in the low out_bits bits, h(keys[1])
  // above it, and so on.
  std::vector<std::uint64_t> histogram;
  std::uint64_t total = 0;  // number of enumerated fillings

  bool uniform() const;
  // Marginal over the key positions in `subset` (same packing, renumbered).
  JointDistribution marginal(std::span<const std::size_t> subset) const;
};

// Table bits of one filling: simple c*S*r, twisted (c-1)*S*(b+r) + S*r.
std::uint64_t table_bits(const TabConfig& cfg, TabScheme scheme);

// Exact joint distribution of the hashes of `keys` over all table fillings.
// Throws FeasibilityError when table bits exceed 24 or the histogram would
// exceed 2^24 cells.
JointDistribution exact_joint_distribution(const TabConfig& cfg, TabScheme scheme,
                                           std::span<const Key> keys);

// --- uniqueness / peeling ----------------------------------------------------

// Rows of d characters (each < 2^char_bits), one per key of a set.
class DerivedKeyMatrix {
 public:
  DerivedKeyMatrix(unsigned width, unsigned char_bits);

  void add_row(Key id, std::span<const Char> chars);
  // Splits a packed d-character value into a row.
  void add_packed(Key id, std::uint64_t packed);

  std::size_t rows() const noexcept { return ids_.size(); }
  unsigned width() const noexcept { return width_; }
  unsigned char_bits() const noexcept { return char_bits_; }
  Char at(std::size_t row, unsigned pos) const noexcept { return cells_[row * width_ + pos]; }
  Key id(std::size_t row) const noexcept { return ids_[row]; }

 private:
  unsigned width_;
  unsigned char_bits_;
  std::vector<Char> cells_;
  std::vector<Key> ids_;
};

// From a DoubleTab's inner function applied to a key set.
DerivedKeyMatrix derived_matrix(const SimpleTab& inner, unsigned derived_chars,
                                std::span<const Key> keys);

struct PeelVerdict {
  bool peelable = false;
  std::vector<Key> residual;     // key ids left when peeling stalls
  std::vector<Key> order;        // removal order
};

// Repeatedly removes the lowest-indexed row holding a (position, value)
// pair no other remaining row shares. Peelable iff every non-empty subset
// of the rows has a unique output character.
PeelVerdict peel_unique(const DerivedKeyMatrix& m);

// Explicit function [u] -> Sigma^d; values[x] packs the d characters of
// f(x), character j in bits [j*char_bits, (j+1)*char_bits).
struct FunctionTable {
  unsigned width = 1;
  unsigned char_bits = 1;
  std::vector<std::uint64_t> values;
};

struct UniquenessVerdict {
  enum class Mode { exhaustive, randomized };
  bool unique = true;
  std::vector<Key> witness;  // a subset without a unique output character
  Mode mode = Mode::exhaustive;
  std::uint64_t subsets_checked = 0;
};

// Exhaustive for u <= 2^20 and k <= 4 (FeasibilityError if the search is
// too large). Use is_k_unique_sampled beyond that.
UniquenessVerdict is_k_unique(const FunctionTable& f, unsigned k);
UniquenessVerdict is_k_unique_sampled(const FunctionTable& f, unsigned k,
                                      std::uint64_t samples, std::uint64_t seed);

// True if some key in `subset` has an output character no other member has.
bool has_unique_output_char(const FunctionTable& f, std::span<const Key> subset);

// --- concentration -----------------------------------------------------------

struct BoundQuery {
  enum class Side { upper, lower };
  double mu = 0;
  double delta = 0;
  Side side = Side::upper;
};

// Classic Chernoff bounds evaluated in log space, capped at 1.
//   upper: (e^d / (1+d)^(1+d))^mu
//   lower: (e^-d / (1-d)^(1-d))^mu, d <= 1
double chernoff_bound(const BoundQuery& q);
double chernoff_log_bound(const BoundQuery& q);
// exp(-d^2 mu / 3) and exp(-d^2 mu / 2), valid for d <= 1.
double chernoff_simplified(const BoundQuery& q);

double empirical_central_moment(std::span<const double> samples, unsigned k, double mu);

struct ChiSquareResult {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
  std::uint64_t cells = 0;
  std::uint64_t trials = 0;
  bool degenerate = false;  // all mass in one cell
};

enum class ChiStatistic { joint, xor_all };

// Draws `trials` independently seeded hashers (seeds split from `seed`) and
// tests the empirical distribution of the hashes of `keys` against uniform.
// joint: cell = packed tuple of the k hashes; xor_all: cell = XOR of them.
// Throws BinningError if the cell expectation is below 5.
ChiSquareResult independence_chi_square(Scheme scheme, const TabConfig& cfg,
                                        std::span<const Key> keys, std::uint64_t trials,
                                        std::uint64_t seed,
                                        ChiStatistic stat = ChiStatistic::joint);

// Chi-square against uniform of raw cell counts.
ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts);

}  // namespace tabhash
