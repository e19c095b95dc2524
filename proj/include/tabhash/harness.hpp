#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tabhash/hashers.hpp"

namespace tabhash {

enum class Experiment {
  independence,
  xor_witness,
  bins,
  moments,
  linprobe,
  window,
  cuckoo,
  two_choice,
  minwise,
  jaccard,
  kpartition,
  sample,
  peel,
  kunique,
  prg_equiv,
  prg_dump,
  conditioned_bins,
};

std::string_view experiment_name(Experiment e) noexcept;
Experiment parse_experiment(std::string_view name);

enum class InputKind { random, consecutive, rectangle };

std::string_view input_name(InputKind k) noexcept;
InputKind parse_input(std::string_view name);

struct ExperimentSpec {
  Experiment experiment = Experiment::bins;
  Scheme scheme = Scheme::simple;
  TabConfig cfg{8, 4, 32, 0};
  std::uint64_t n = 1000;
  std::uint64_t m = 0;   // bins / slots; 0 selects the experiment default
  std::uint64_t k = 4;   // keys per tuple, moment order, reps or partitions
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  std::uint64_t reps = 1;  // chi-square repetitions
  InputKind input = InputKind::random;
  bool baseline = false;
  double fraction = 0.3;   // red fraction (kpartition) / Jaccard similarity
  double p = 0.1;          // sampling probability
  unsigned poly_k = 2;     // coefficients for poly-k
};

// Throws ConfigError on an incompatible experiment/scheme/geometry.
void validate(const ExperimentSpec& spec);

struct ReportRow {
  std::string experiment;
  std::string scheme;
  std::vector<std::pair<std::string, std::string>> params;
  std::string statistic;
  double value = 0;
  std::optional<double> baseline;
  std::uint64_t seed = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

// random: n distinct uniform keys; consecutive: base .. base+n-1;
// rectangle: the first n keys, in increasing order, of the cube [0, s)^c
// with s the smallest side holding n keys.
std::vector<Key> gen_input(InputKind kind, std::uint64_t n, const TabConfig& cfg,
                           std::uint64_t seed, Key base = 0);

// Deterministic in (spec, seed); trials run in parallel and are reported in
// trial order.
std::vector<ReportRow> run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { csv, json };

inline constexpr std::string_view kCsvHeader = "experiment,scheme,params,statistic,value,baseline,seed";

std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format);
void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::filesystem::path& path);

// Writes `count` PRG outputs as little-endian 8-byte words.
void dump_prg(std::uint64_t seed, const TabConfig& cfg, std::uint64_t count,
              const std::filesystem::path& path);

}  // namespace tabhash
