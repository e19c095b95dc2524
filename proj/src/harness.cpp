#include "tabhash/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "tabhash/analysis.hpp"
#include "tabhash/cuckoo.hpp"
#include "tabhash/kernels.hpp"
#include "tabhash/linear_probe.hpp"
#include "tabhash/minwise.hpp"
#include "tabhash/prg.hpp"
#include "tabhash/two_choice.hpp"

namespace tabhash {

namespace {

constexpr std::pair<Experiment, std::string_view> kExperiments[] = {
    {Experiment::independence, "independence"},
    {Experiment::xor_witness, "xor-witness"},
    {Experiment::bins, "bins"},
    {Experiment::moments, "moments"},
    {Experiment::linprobe, "linprobe"},
    {Experiment::window, "window"},
    {Experiment::cuckoo, "cuckoo"},
    {Experiment::two_choice, "two-choice"},
    {Experiment::minwise, "minwise"},
    {Experiment::jaccard, "jaccard"},
    {Experiment::kpartition, "kpartition"},
    {Experiment::sample, "sample"},
    {Experiment::peel, "peel"},
    {Experiment::kunique, "kunique"},
    {Experiment::prg_equiv, "prg-equiv"},
    {Experiment::prg_dump, "prg-dump"},
    {Experiment::conditioned_bins, "conditioned-bins"},
};

// Sub-streams of a trial seed.
enum Stream : std::uint64_t {
  kHasherStream = 0,
  kBaselineStream = 1,
  kInputStream = 2,
  kAuxStream = 3,
  kSecondHasherStream = 4,
  kRetryStream = 5,
};

constexpr std::uint64_t kMasterInput = ~std::uint64_t{0};

unsigned exact_log2(std::uint64_t m, const char* what) {
  if (m == 0 || (m & (m - 1)) != 0) {
    throw ConfigError(std::string(what) + " must be a power of two, got " + std::to_string(m));
  }
  return static_cast<unsigned>(std::countr_zero(m));
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t default_m(const ExperimentSpec& s) {
  if (s.m != 0) return s.m;
  std::uint64_t p = 1;
  while (p < s.n) p <<= 1;
  switch (s.experiment) {
    case Experiment::linprobe:
    case Experiment::window: return 2 * p;
    case Experiment::cuckoo: return static_cast<std::uint64_t>(std::ceil(1.2 * s.n));
    default: return p;
  }
}

struct Context {
  const ExperimentSpec& spec;
  std::uint64_t m;
  std::vector<std::pair<std::string, std::string>> params;

  ReportRow row(std::string stat, double value, std::optional<double> baseline,
                std::uint64_t seed) const {
    return {std::string(experiment_name(spec.experiment)), std::string(scheme_name(spec.scheme)),
            params, std::move(stat), value, baseline, seed};
  }
  AnyHasher hasher(std::uint64_t trial_seed, std::uint64_t stream = kHasherStream) const {
    return make_hasher(spec.scheme, spec.cfg, derive_seed(trial_seed, stream), spec.poly_k);
  }
  std::optional<TrulyRandomHasher> baseline(std::uint64_t trial_seed,
                                            std::uint64_t stream = kBaselineStream) const {
    if (!spec.baseline) return std::nullopt;
    return TrulyRandomHasher(derive_seed(trial_seed, stream), spec.cfg.out_bits());
  }
};

// Runs fn(trial, trial_seed) for every trial in parallel, concatenating rows
// in trial order.
template <class F>
std::vector<ReportRow> per_trial(std::uint64_t trials, std::uint64_t master, F fn) {
  std::vector<std::vector<ReportRow>> parts(trials);
  std::exception_ptr error;
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < n; ++t) {
    try {
      const auto ut = static_cast<std::uint64_t>(t);
      parts[ut] = fn(ut, derive_seed(master, ut));
    } catch (...) {
#pragma omp critical(tabhash_trial_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  std::vector<ReportRow> out;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

template <class F>
auto with_baseline(const std::optional<TrulyRandomHasher>& b, F f) -> std::optional<double> {
  if (!b) return std::nullopt;
  return f(*b);
}

// Keys of the universe not in `set`, drawn from `seed`.
std::vector<Key> absent_keys(std::uint64_t count, const TabConfig& cfg,
                             const std::vector<Key>& set, std::uint64_t seed) {
  std::unordered_set<Key> present(set.begin(), set.end());
  auto src = EntropySource::seeded(seed);
  std::vector<Key> out;
  std::unordered_set<Key> used;
  while (out.size() < count) {
    const Key x = src.next_u64() & cfg.max_key();
    if (!present.count(x) && used.insert(x).second) out.push_back(x);
  }
  return out;
}

template <Hasher H>
std::pair<double, double> bin_stats(const H& h, const std::vector<Key>& keys, unsigned lg_m) {
  const auto counts = kernels::bin_counts_serial(h, keys, lg_m);
  const double mu = static_cast<double>(keys.size()) / static_cast<double>(counts.size());
  double max_load = 0;
  double max_dev = 0;
  for (auto c : counts) {
    max_load = std::max<double>(max_load, c);
    max_dev = std::max(max_dev, std::abs(c - mu));
  }
  return {max_load, max_dev};
}

template <Hasher H>
double bin_moment(const H& h, const std::vector<Key>& keys, unsigned lg_m, unsigned k) {
  const auto counts = kernels::bin_counts_serial(h, keys, lg_m);
  const double mu = static_cast<double>(keys.size()) / static_cast<double>(counts.size());
  std::vector<double> samples(counts.begin(), counts.end());
  return empirical_central_moment(samples, k, mu);
}

struct ProbeSummary {
  double mean_insert = 0;
  double mean_unsuccessful = 0;
  double max_probes = 0;
};

template <Hasher H>
ProbeSummary probe_summary(const H& h, unsigned lg_m, const std::vector<Key>& keys,
                           const std::vector<Key>& absent) {
  LinearProbeTable<const H&> t(h, lg_m);
  ProbeSummary s;
  double total = 0;
  for (auto x : keys) {
    const double p = static_cast<double>(t.insert(x));
    total += p;
    s.max_probes = std::max(s.max_probes, p);
  }
  s.mean_insert = keys.empty() ? 0 : total / static_cast<double>(keys.size());
  total = 0;
  for (auto x : absent) {
    const double p = static_cast<double>(t.query(x).probes);
    total += p;
    s.max_probes = std::max(s.max_probes, p);
  }
  s.mean_unsuccessful = absent.empty() ? 0 : total / static_cast<double>(absent.size());
  return s;
}

template <Hasher H>
std::pair<double, double> window_summary(const H& h, unsigned lg_m, const std::vector<Key>& keys,
                                         const std::vector<Key>& probes) {
  LinearProbeTable<const H&> t(h, lg_m);
  for (auto x : keys) t.insert(x);
  std::vector<TableOp> ops;
  ops.reserve(probes.size());
  for (auto x : probes) ops.push_back({TableOp::Kind::query, x});
  const auto costs = window_cost(t, std::span<const TableOp>(ops), default_window(keys.size()));
  if (costs.empty()) return {0, 0};
  const double mx = static_cast<double>(*std::max_element(costs.begin(), costs.end()));
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
  return {mx, mean};
}

// 4 keys {a0,a1} x {b0,b1} at positions (i, j), other characters random.
std::vector<Key> random_rectangle(const TabConfig& cfg, EntropySource& src) {
  const unsigned c = cfg.chars();
  const std::uint64_t sigma = cfg.alphabet();
  const unsigned i = static_cast<unsigned>(src.next_u64() % c);
  unsigned j = static_cast<unsigned>(src.next_u64() % (c - 1));
  if (j >= i) ++j;
  Key base = src.next_u64() & cfg.max_key();
  const auto b = cfg.char_bits();
  base &= ~((low_mask(b) << (i * b)) | (low_mask(b) << (j * b)));
  auto two = [&]() {
    const std::uint64_t x = src.next_u64() % sigma;
    std::uint64_t y = src.next_u64() % (sigma - 1);
    if (y >= x) ++y;
    return std::pair{x, y};
  };
  const auto [a0, a1] = two();
  const auto [b0, b1] = two();
  auto key = [&](std::uint64_t a, std::uint64_t bb) { return base | (a << (i * b)) | (bb << (j * b)); };
  return {key(a0, b0), key(a1, b0), key(a0, b1), key(a1, b1)};
}

std::vector<ReportRow> run_independence(const Context& ctx) {
  const auto& s = ctx.spec;
  const auto keys =
      gen_input(s.input, s.k, s.cfg, derive_seed(s.seed, kMasterInput));
  const bool tab = s.scheme == Scheme::simple || s.scheme == Scheme::twisted;
  const TabScheme ts = s.scheme == Scheme::simple ? TabScheme::simple : TabScheme::twisted;
  if (tab && table_bits(s.cfg, ts) <= 24 && s.cfg.out_bits() * keys.size() <= 24) {
    const auto dist = exact_joint_distribution(s.cfg, ts, keys);
    const std::uint64_t each = dist.total / dist.histogram.size();
    std::uint64_t off = 0;
    for (auto c : dist.histogram) off += c != each;
    return {ctx.row("fillings", static_cast<double>(dist.total), std::nullopt, s.seed),
            ctx.row("nonuniform_cells", static_cast<double>(off), std::nullopt, s.seed),
            ctx.row("uniform", dist.uniform() ? 1.0 : 0.0, std::nullopt, s.seed)};
  }
  std::vector<ReportRow> rows;
  for (std::uint64_t r = 0; r < s.reps; ++r) {
    const std::uint64_t rs = derive_seed(s.seed, r);
    const auto res = independence_chi_square(s.scheme, s.cfg, keys, s.trials, rs);
    std::optional<double> base;
    if (s.baseline) {
      base = independence_chi_square(Scheme::truly_random, s.cfg, keys, s.trials, rs).p_value;
    }
    rows.push_back(ctx.row("chi_square", res.statistic, std::nullopt, rs));
    rows.push_back(ctx.row("p_value", res.p_value, base, rs));
  }
  return rows;
}

std::vector<ReportRow> run_experiment_impl(const ExperimentSpec& s) {
  validate(s);
  Context ctx{s, default_m(s), {}};
  const auto& cfg = s.cfg;
  ctx.params = {{"cfg", std::to_string(cfg.char_bits()) + "/" + std::to_string(cfg.chars()) + "/" +
                            std::to_string(cfg.out_bits()) + "/" + std::to_string(cfg.derived_chars())},
                {"n", std::to_string(s.n)},
                {"m", std::to_string(ctx.m)},
                {"k", std::to_string(s.k)},
                {"trials", std::to_string(s.trials)},
                {"input", std::string(input_name(s.input))}};
  const std::uint64_t input_seed = derive_seed(s.seed, kMasterInput);

  switch (s.experiment) {
    case Experiment::independence:
      return run_independence(ctx);

    case Experiment::xor_witness:
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const auto h = ctx.hasher(ts);
        auto src = EntropySource::seeded(derive_seed(ts, kInputStream));
        const auto rect = cfg.chars() == 2 && cfg.char_bits() == 1
                              ? gen_input(InputKind::rectangle, 4, cfg, 0)
                              : random_rectangle(cfg, src);
        std::uint64_t x = 0;
        for (auto k : rect) x ^= hash_any(h, k);
        return std::vector{ctx.row("xor4", static_cast<double>(x), std::nullopt, ts)};
      });

    case Experiment::bins: {
      const unsigned lg = exact_log2(ctx.m, "m");
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const auto [ml, md] =
            with_hasher(ctx.hasher(ts), [&](const auto& h) { return bin_stats(h, keys, lg); });
        const auto b = ctx.baseline(ts);
        std::optional<double> bl, bd;
        if (b) std::tie(bl, bd) = bin_stats(*b, keys, lg);
        return std::vector{ctx.row("max_load", ml, bl, ts), ctx.row("max_deviation", md, bd, ts)};
      });
    }

    case Experiment::moments: {
      const unsigned lg = exact_log2(ctx.m, "m");
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      const auto k = static_cast<unsigned>(s.k);
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const double v = with_hasher(ctx.hasher(ts),
                                     [&](const auto& h) { return bin_moment(h, keys, lg, k); });
        const auto bv = with_baseline(ctx.baseline(ts), [&](const auto& h) {
          return bin_moment(h, keys, lg, k);
        });
        return std::vector{ctx.row("central_moment", v, bv, ts)};
      });
    }

    case Experiment::linprobe: {
      const unsigned lg = exact_log2(ctx.m, "m");
      if (s.n >= ctx.m) throw ConfigError("linprobe needs n < m");
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      const auto absent = absent_keys(s.n, cfg, keys, derive_seed(input_seed, kAuxStream));
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const auto p = with_hasher(ctx.hasher(ts), [&](const auto& h) {
          return probe_summary(h, lg, keys, absent);
        });
        std::optional<ProbeSummary> b;
        if (auto bh = ctx.baseline(ts)) b = probe_summary(*bh, lg, keys, absent);
        auto opt = [&](double ProbeSummary::*f) -> std::optional<double> {
          return b ? std::optional<double>((*b).*f) : std::nullopt;
        };
        return std::vector{
            ctx.row("mean_insert_probes", p.mean_insert, opt(&ProbeSummary::mean_insert), ts),
            ctx.row("mean_unsuccessful_probes", p.mean_unsuccessful,
                    opt(&ProbeSummary::mean_unsuccessful), ts),
            ctx.row("max_probes", p.max_probes, opt(&ProbeSummary::max_probes), ts)};
      });
    }

    case Experiment::window: {
      const unsigned lg = exact_log2(ctx.m, "m");
      if (s.n >= ctx.m) throw ConfigError("window needs n < m");
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      const auto probes = absent_keys(s.n, cfg, keys, derive_seed(input_seed, kAuxStream));
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const auto [mx, mean] = with_hasher(ctx.hasher(ts), [&](const auto& h) {
          return window_summary(h, lg, keys, probes);
        });
        std::optional<double> bmx, bmean;
        if (auto bh = ctx.baseline(ts)) std::tie(bmx, bmean) = window_summary(*bh, lg, keys, probes);
        return std::vector{ctx.row("max_window_cost", mx, bmx, ts),
                           ctx.row("mean_window_cost", mean, bmean, ts)};
      });
    }

    case Experiment::cuckoo: {
      const std::uint64_t m = ctx.m;
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const auto keys = s.input == InputKind::random
                              ? gen_input(s.input, s.n, cfg, derive_seed(ts, kInputStream))
                              : gen_input(s.input, s.n, cfg, input_seed);
        const auto kicks = default_max_kicks(keys.size());
        auto attempt = [&](std::uint64_t stream_a, std::uint64_t stream_b) {
          const auto h0 = ctx.hasher(ts, stream_a);
          const auto h1 = ctx.hasher(ts, stream_b);
          return with_hasher(h0, [&](const auto& a) {
            return with_hasher(h1, [&](const auto& b) { return cuckoo_build(keys, a, b, m, kicks); });
          });
        };
        const auto first = attempt(kHasherStream, kSecondHasherStream);
        bool ok = first.success;
        if (!ok) ok = attempt(kRetryStream, kRetryStream + 1).success;
        std::optional<double> base;
        if (s.baseline) {
          const TrulyRandomHasher a(derive_seed(ts, kBaselineStream), cfg.out_bits());
          const TrulyRandomHasher b(derive_seed(ts, kBaselineStream + 100), cfg.out_bits());
          base = cuckoo_build(keys, a, b, m, kicks).success ? 1.0 : 0.0;
        }
        return std::vector{ctx.row("success_first", first.success ? 1 : 0, base, ts),
                           ctx.row("success_with_retry", ok ? 1 : 0, std::nullopt, ts),
                           ctx.row("kicks", static_cast<double>(first.kicks), std::nullopt, ts)};
      });
    }

    case Experiment::two_choice: {
      const unsigned lg = exact_log2(ctx.m, "m");
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const double v = with_hasher(ctx.hasher(ts), [&](const auto& h) {
          return static_cast<double>(two_choice_place(keys, h, lg).max_load);
        });
        const auto b = with_baseline(ctx.baseline(ts), [&](const auto& h) {
          return static_cast<double>(two_choice_place(keys, h, lg).max_load);
        });
        return std::vector{ctx.row("max_load", v, b, ts)};
      });
    }

    case Experiment::minwise: {
      const auto set = gen_input(s.input, s.n, cfg, input_seed);
      const Key q = set.front();
      std::vector<std::uint8_t> hit(s.trials), tie(s.trials), bhit(s.trials);
      (void)per_trial(s.trials, s.seed, [&](std::uint64_t t, std::uint64_t ts) {
        const auto r = with_hasher(ctx.hasher(ts), [&](const auto& h) { return minwise_sample(h, set); });
        hit[t] = r.key == q;
        tie[t] = r.ties > 0;
        if (auto b = ctx.baseline(ts)) bhit[t] = minwise_sample(*b, set).key == q;
        return std::vector<ReportRow>{};
      });
      const double T = static_cast<double>(s.trials);
      const double pr = std::accumulate(hit.begin(), hit.end(), 0.0) / T;
      std::optional<double> bpr;
      if (s.baseline) bpr = std::accumulate(bhit.begin(), bhit.end(), 0.0) / T;
      const double expected = 1.0 / static_cast<double>(set.size());
      return {ctx.row("pr_q_min", pr, bpr, s.seed),
              ctx.row("expected", expected, std::nullopt, s.seed),
              ctx.row("standard_error", std::sqrt(expected * (1 - expected) / T), std::nullopt, s.seed),
              ctx.row("collision_trials", std::accumulate(tie.begin(), tie.end(), 0.0), std::nullopt,
                      s.seed)};
    }

    case Experiment::jaccard: {
      const auto u = gen_input(s.input, s.n, cfg, input_seed);
      const auto shared = static_cast<std::size_t>(std::llround(s.fraction * static_cast<double>(s.n)));
      const std::size_t only = (s.n - shared) / 2;
      std::vector<Key> a(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(shared + only));
      std::vector<Key> b(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(shared));
      b.insert(b.end(), u.begin() + static_cast<std::ptrdiff_t>(shared + only),
               u.begin() + static_cast<std::ptrdiff_t>(shared + 2 * only));
      const double truth = static_cast<double>(shared) / static_cast<double>(shared + 2 * only);
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        std::vector<AnyHasher> hs;
        for (std::uint64_t r = 0; r < s.k; ++r) hs.push_back(ctx.hasher(derive_seed(ts, r)));
        std::size_t agree = 0;
        for (const auto& h : hs) {
          agree += with_hasher(h, [&](const auto& hh) {
            return minwise_sample(hh, a).hash == minwise_sample(hh, b).hash;
          });
        }
        std::optional<double> base;
        if (s.baseline) {
          std::vector<TrulyRandomHasher> bs;
          for (std::uint64_t r = 0; r < s.k; ++r)
            bs.emplace_back(derive_seed(derive_seed(ts, r), kBaselineStream), cfg.out_bits());
          base = jaccard_estimate(std::span<const TrulyRandomHasher>(bs), a, b);
        }
        return std::vector{
            ctx.row("estimate", static_cast<double>(agree) / static_cast<double>(s.k), base, ts),
            ctx.row("true_jaccard", truth, std::nullopt, ts)};
      });
    }

    case Experiment::kpartition: {
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      const auto reds = static_cast<std::size_t>(std::llround(s.fraction * static_cast<double>(s.n)));
      std::vector<LabeledKey> items;
      for (std::size_t i = 0; i < keys.size(); ++i) items.push_back({keys[i], i < reds});
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const double v = with_hasher(ctx.hasher(ts), [&](const auto& h) {
          return kpartition_fraction(h, std::span<const LabeledKey>(items), s.k).fraction;
        });
        const auto b = with_baseline(ctx.baseline(ts), [&](const auto& h) {
          return kpartition_fraction(h, std::span<const LabeledKey>(items), s.k).fraction;
        });
        return std::vector{ctx.row("estimate", v, b, ts)};
      });
    }

    case Experiment::sample: {
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      std::vector<WeightedKey> items;
      for (auto k : keys) items.push_back({k, s.p});
      const double pt = effective_probability(s.p, cfg.out_bits());
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const double v = with_hasher(ctx.hasher(ts), [&](const auto& h) {
          return static_cast<double>(threshold_sample(h, std::span<const WeightedKey>(items)).size());
        });
        const auto b = with_baseline(ctx.baseline(ts), [&](const auto& h) {
          return static_cast<double>(threshold_sample(h, std::span<const WeightedKey>(items)).size());
        });
        const double n = static_cast<double>(items.size());
        return std::vector{ctx.row("sample_size", v, b, ts),
                           ctx.row("expected_size", n * pt, std::nullopt, ts),
                           ctx.row("binomial_sd", std::sqrt(n * pt * (1 - pt)), std::nullopt, ts)};
      });
    }

    case Experiment::peel: {
      const unsigned d = cfg.derived_chars();
      const TabConfig inner_cfg(cfg.char_bits(), cfg.chars(), d * cfg.char_bits());
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        const auto keys = s.input == InputKind::random
                              ? gen_input(s.input, s.n, cfg, derive_seed(ts, kInputStream))
                              : gen_input(s.input, s.n, cfg, input_seed);
        auto src = EntropySource::seeded(derive_seed(ts, kHasherStream));
        const auto inner = SimpleTab::random(inner_cfg, src);
        const auto v = peel_unique(derived_matrix(inner, d, keys));
        return std::vector{ctx.row("peelable", v.peelable ? 1 : 0, std::nullopt, ts),
                           ctx.row("residual", static_cast<double>(v.residual.size()), std::nullopt, ts)};
      });
    }

    case Experiment::kunique: {
      const unsigned d = cfg.derived_chars();
      const TabConfig inner_cfg(cfg.char_bits(), cfg.chars(), d * cfg.char_bits());
      if (cfg.key_bits() > 20) throw ConfigError("kunique enumerates the universe; needs c*char_bits <= 20");
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        auto src = EntropySource::seeded(derive_seed(ts, kHasherStream));
        const auto inner = SimpleTab::random(inner_cfg, src);
        FunctionTable f{d, cfg.char_bits(), {}};
        f.values.resize(std::size_t{1} << cfg.key_bits());
        for (Key x = 0; x < f.values.size(); ++x) f.values[x] = inner(x);
        const auto v = is_k_unique(f, static_cast<unsigned>(s.k));
        return std::vector{
            ctx.row("k_unique", v.unique ? 1 : 0, std::nullopt, ts),
            ctx.row("witness_size", static_cast<double>(v.witness.size()), std::nullopt, ts),
            ctx.row("subsets_checked", static_cast<double>(v.subsets_checked), std::nullopt, ts)};
      });
    }

    case Experiment::prg_equiv:
    case Experiment::prg_dump: {
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        auto src = EntropySource::seeded(derive_seed(ts, kHasherStream));
        const auto h = TwistedTab::random(cfg, src);
        TwistedPrg prg(h, 0);
        std::uint64_t mismatches = 0;
        std::uint64_t emitted = 0;
        std::uint64_t fold = 0;
        for (std::uint64_t i = 0; i < s.n; ++i) {
          const auto v = prg.next();
          if (!v) break;
          ++emitted;
          fold ^= *v + 0x9e3779b97f4a7c15ULL * i;
          if (s.experiment == Experiment::prg_equiv && *v != h.eval(i)) ++mismatches;
        }
        const double per = emitted ? static_cast<double>(prg.lookups()) / static_cast<double>(emitted) : 0;
        if (s.experiment == Experiment::prg_equiv) {
          return std::vector{ctx.row("mismatches", static_cast<double>(mismatches), std::nullopt, ts)};
        }
        return std::vector{ctx.row("emitted", static_cast<double>(emitted), std::nullopt, ts),
                           ctx.row("lookups_per_emission", per, std::nullopt, ts),
                           ctx.row("checksum_low32", static_cast<double>(fold & 0xffffffffULL),
                                   std::nullopt, ts),
                           ctx.row("tail_recomputations", static_cast<double>(prg.tail_recomputations()),
                                   std::nullopt, ts)};
      });
    }

    case Experiment::conditioned_bins: {
      const unsigned lg = exact_log2(ctx.m, "m");
      const auto keys = gen_input(s.input, s.n, cfg, input_seed);
      const Key q = absent_keys(1, cfg, keys, derive_seed(input_seed, kAuxStream)).front();
      return per_trial(s.trials, s.seed, [&](std::uint64_t, std::uint64_t ts) {
        auto src = EntropySource::seeded(derive_seed(ts, kHasherStream));
        const auto h = TwistedTab::random(cfg, src);
        const std::uint64_t a = derive_seed(ts, kAuxStream) & low_mask(cfg.out_bits());
        // Force h(q) = a by fixing the head entry of q's twisted head after
        // every other entry has been drawn.
        const std::uint64_t star = h.star_xor(q);
        const Char alpha = char_at(h.twist_key(q), h.head_index(), cfg.char_bits());
        const auto hc = h.with_head_entry(alpha, a ^ (star >> cfg.char_bits()));
        const double dev_u = bin_stats(h, keys, lg).second;
        const double dev_c = bin_stats(hc, keys, lg).second;
        return std::vector{ctx.row("max_dev_unconditioned", dev_u, std::nullopt, ts),
                           ctx.row("max_dev_conditioned", dev_c, std::nullopt, ts),
                           ctx.row("query_hash_matches", hc(q) == a ? 1 : 0, std::nullopt, ts)};
      });
    }
  }
  throw ConfigError("unknown experiment");
}

}  // namespace

std::string_view experiment_name(Experiment e) noexcept {
  for (const auto& [k, v] : kExperiments) {
    if (k == e) return v;
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [k, v] : kExperiments) {
    if (v == name) return k;
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

std::string_view input_name(InputKind k) noexcept {
  switch (k) {
    case InputKind::random: return "random";
    case InputKind::consecutive: return "consecutive";
    case InputKind::rectangle: return "rectangle";
  }
  return "?";
}

InputKind parse_input(std::string_view name) {
  if (name == "random") return InputKind::random;
  if (name == "consecutive") return InputKind::consecutive;
  if (name == "rectangle") return InputKind::rectangle;
  throw ConfigError("unknown input kind '" + std::string(name) + "'");
}

void validate(const ExperimentSpec& s) {
  const auto& cfg = s.cfg;
  auto need = [&](bool ok, const std::string& why) {
    if (!ok) throw ConfigError(std::string(experiment_name(s.experiment)) + ": " + why);
  };
  need(s.trials >= 1, "trials must be >= 1");
  if (cfg.key_bits() < 64) {
    need(s.n <= (std::uint64_t{1} << cfg.key_bits()), "n exceeds the key universe");
  }
  if (s.scheme == Scheme::poly) need(cfg.key_bits() <= 61, "poly-k needs keys below 2^61 - 1");
  if (s.scheme == Scheme::double_tab || s.scheme == Scheme::mixed) {
    need(cfg.derived_chars() >= 1, "double/mixed need --derived >= 1");
  }
  if (s.scheme == Scheme::twisted) need(cfg.char_bits() + cfg.out_bits() <= 64, "twisted needs char_bits + out_bits <= 64");
  switch (s.experiment) {
    case Experiment::independence:
      need(s.k >= 1 && s.k <= 4, "k must be in [1, 4]");
      need(s.reps >= 1, "reps must be >= 1");
      break;
    case Experiment::xor_witness:
      need(cfg.chars() >= 2, "needs c >= 2");
      break;
    case Experiment::moments:
      need(s.k >= 1, "moment order k must be >= 1");
      break;
    case Experiment::jaccard:
      need(s.k >= 1, "k (reps) must be >= 1");
      need(s.fraction > 0 && s.fraction <= 1, "fraction (Jaccard similarity) in (0, 1]");
      break;
    case Experiment::kpartition:
      need(s.k >= 1 && (s.k & (s.k - 1)) == 0, "k must be a power of two");
      need(s.n >= 1, "needs n >= 1");
      break;
    case Experiment::sample:
      need(s.p >= 0 && s.p <= 1, "p in [0, 1]");
      break;
    case Experiment::minwise:
      need(s.n >= 1, "needs n >= 1");
      break;
    case Experiment::peel:
    case Experiment::kunique:
      need(s.scheme == Scheme::double_tab, "requires scheme double");
      need(cfg.derived_chars() >= 1 && cfg.derived_chars() * cfg.char_bits() <= 64,
           "needs 1 <= derived chars with d*char_bits <= 64");
      break;
    case Experiment::prg_equiv:
    case Experiment::prg_dump:
      need(s.scheme == Scheme::twisted, "requires scheme twisted");
      need(cfg.chars() >= 2, "needs c >= 2");
      break;
    case Experiment::conditioned_bins:
      need(s.scheme == Scheme::twisted, "requires scheme twisted");
      break;
    case Experiment::two_choice:
      break;
    default:
      break;
  }
  const std::uint64_t m = default_m(s);
  switch (s.experiment) {
    case Experiment::bins:
    case Experiment::moments:
    case Experiment::linprobe:
    case Experiment::window:
    case Experiment::conditioned_bins:
      exact_log2(m, "m");
      need(static_cast<unsigned>(std::countr_zero(m)) <= cfg.out_bits(), "m exceeds hash range");
      break;
    case Experiment::two_choice:
      exact_log2(m, "m");
      need(2u * static_cast<unsigned>(std::countr_zero(m)) <= cfg.out_bits(),
           "two-choice needs out_bits >= 2 lg m");
      break;
    case Experiment::cuckoo:
      need(m >= 1, "m must be positive");
      break;
    default:
      break;
  }
}

std::vector<Key> gen_input(InputKind kind, std::uint64_t n, const TabConfig& cfg,
                           std::uint64_t seed, Key base) {
  const std::uint64_t max = cfg.max_key();
  if (cfg.key_bits() < 64 && n > max + 1) {
    throw DomainError("n = " + std::to_string(n) + " exceeds universe size " +
                      std::to_string(max + 1));
  }
  std::vector<Key> out;
  out.reserve(n);
  switch (kind) {
    case InputKind::random: {
      auto src = EntropySource::seeded(seed);
      if (cfg.key_bits() <= 26 && n > (max + 1) / 2) {
        std::vector<Key> all(max + 1);
        std::iota(all.begin(), all.end(), Key{0});
        for (std::uint64_t i = 0; i < n; ++i) {
          const std::uint64_t j = i + src.next_u64() % (all.size() - i);
          std::swap(all[i], all[j]);
        }
        all.resize(n);
        return all;
      }
      std::unordered_set<Key> seen;
      seen.reserve(n * 2);
      while (out.size() < n) {
        const Key x = src.next_u64() & max;
        if (seen.insert(x).second) out.push_back(x);
      }
      return out;
    }
    case InputKind::consecutive: {
      if (n > 0 && (base > max || n - 1 > max - base)) {
        throw DomainError("consecutive range exceeds universe");
      }
      for (std::uint64_t i = 0; i < n; ++i) out.push_back(base + i);
      return out;
    }
    case InputKind::rectangle: {
      const unsigned c = cfg.chars();
      std::uint64_t side = 1;
      auto holds = [&](std::uint64_t s) {
        long double cube = 1;
        for (unsigned i = 0; i < c; ++i) cube *= static_cast<long double>(s);
        return cube >= static_cast<long double>(n);
      };
      while (!holds(side)) ++side;
      std::vector<std::uint64_t> digit(c, 0);
      for (std::uint64_t t = 0; t < n; ++t) {
        Key x = 0;
        for (unsigned i = 0; i < c; ++i) x |= digit[i] << (i * cfg.char_bits());
        out.push_back(x);
        for (unsigned i = 0; i < c; ++i) {
          if (++digit[i] < side) break;
          digit[i] = 0;
        }
      }
      return out;
    }
  }
  return out;
}

std::vector<ReportRow> run_experiment(const ExperimentSpec& spec) { return run_experiment_impl(spec); }

std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format) {
  if (rows.empty()) throw DomainError("empty report");
  if (format == ReportFormat::csv) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
      std::string params;
      for (const auto& [k, v] : r.params) {
        if (!params.empty()) params += ';';
        params += k + "=" + v;
      }
      out += r.experiment + "," + r.scheme + "," + params + "," + r.statistic + "," + fmt(r.value) +
             "," + (r.baseline ? fmt(*r.baseline) : std::string()) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
  }
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j["rows"].push_back({{"experiment", r.experiment},
                         {"scheme", r.scheme},
                         {"params", params},
                         {"statistic", r.statistic},
                         {"value", r.value},
                         {"baseline", r.baseline ? nlohmann::ordered_json(*r.baseline) : nlohmann::ordered_json(nullptr)},
                         {"seed", r.seed}});
  }
  return j.dump() + "\n";
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::filesystem::path& path) {
  const std::string text = render_report(rows, format);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

void dump_prg(std::uint64_t seed, const TabConfig& cfg, std::uint64_t count,
              const std::filesystem::path& path) {
  auto src = EntropySource::seeded(seed);
  const auto h = TwistedTab::random(cfg, src);
  TwistedPrg prg(h, 0);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  char buf[8];
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto v = prg.next();
    if (!v) throw DomainError("PRG stream exhausted after " + std::to_string(i) + " values");
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((*v >> (8 * b)) & 0xff);
    os.write(buf, 8);
  }
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace tabhash
