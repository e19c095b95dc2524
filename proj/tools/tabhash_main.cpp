// tabhash: run experiments, dump tables, emit PRG streams.
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tabhash/error.hpp"
#include "tabhash/harness.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kIoExit = 3;

std::uint64_t env_seed() {
  const char* s = std::getenv("TABHASH_SEED");
  if (s == nullptr || *s == '\0') return 1;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 0);
    if (pos != std::string(s).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw tabhash::ConfigError(std::string("TABHASH_SEED is not an integer: ") + s);
  }
}

struct Geometry {
  unsigned char_bits = 8;
  unsigned chars = 4;
  unsigned out_bits = 32;
  unsigned derived = 0;

  void attach(CLI::App* app) {
    app->add_option("--char-bits", char_bits, "bits per character");
    app->add_option("--chars", chars, "characters per key");
    app->add_option("--out-bits", out_bits, "hash output bits");
    app->add_option("--derived", derived, "derived characters (double / mixed)");
  }
  tabhash::TabConfig config() const { return {char_bits, chars, out_bits, derived}; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabulation hashing experiments"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  try {
    seed = env_seed();
  } catch (const tabhash::ConfigError& e) {
    std::cerr << "tabhash: " << e.what() << "\n";
    return kConfigExit;
  }

  Geometry geo;
  std::string experiment, scheme = "simple", input = "random", format = "csv", out;
  tabhash::ExperimentSpec spec;
  spec.seed = seed;
  auto* run = app.add_subcommand("run", "run an experiment and write a report");
  run->add_option("--experiment", experiment, "experiment id")->required();
  run->add_option("--scheme", scheme, "hash scheme");
  geo.attach(run);
  run->add_option("--n", spec.n, "number of keys");
  run->add_option("--m", spec.m, "bins / slots (0 = experiment default)");
  run->add_option("--k", spec.k, "tuple size, moment order, reps or partitions");
  run->add_option("--trials", spec.trials, "independent trials");
  run->add_option("--seed", spec.seed, "master seed");
  run->add_option("--input", input, "random | consecutive | rectangle");
  run->add_flag("--baseline", spec.baseline, "add a truly-random baseline column");
  run->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--out", out, "report path")->required();
  run->add_option("--reps", spec.reps, "chi-square repetitions");
  run->add_option("--fraction", spec.fraction, "red fraction / Jaccard similarity");
  run->add_option("--p", spec.p, "sampling probability");
  run->add_option("--poly-k", spec.poly_k, "coefficients for poly-k");

  Geometry dump_geo;
  std::string dump_scheme = "simple", dump_out;
  std::uint64_t dump_seed = seed;
  auto* dump = app.add_subcommand("dump-tables", "write a seeded hasher's tables");
  dump->add_option("--seed", dump_seed, "seed");
  dump->add_option("--out", dump_out, "table file path")->required();
  dump->add_option("--scheme", dump_scheme, "hash scheme");
  dump_geo.attach(dump);

  Geometry prg_geo;
  std::uint64_t prg_seed = seed, count = 0;
  std::string prg_out;
  auto* prg = app.add_subcommand("prg", "write a twisted PRG stream");
  prg->add_option("--seed", prg_seed, "seed");
  prg->add_option("--count", count, "number of 64-bit outputs")->required();
  prg->add_option("--out", prg_out, "output path")->required();
  prg_geo.attach(prg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*run) {
      spec.experiment = tabhash::parse_experiment(experiment);
      spec.scheme = tabhash::parse_scheme(scheme);
      spec.input = tabhash::parse_input(input);
      spec.cfg = geo.config();
      const auto rows = tabhash::run_experiment(spec);
      tabhash::emit_report(rows, format == "json" ? tabhash::ReportFormat::json : tabhash::ReportFormat::csv, out);
    } else if (*dump) {
      const auto h = tabhash::make_hasher(tabhash::parse_scheme(dump_scheme), dump_geo.config(), dump_seed);
      tabhash::save_hasher(dump_out, h);
    } else if (*prg) {
      tabhash::dump_prg(prg_seed, prg_geo.config(), count, prg_out);
    }
  } catch (const tabhash::IoError& e) {
    std::cerr << "tabhash: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "tabhash: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::exception& e) {
    std::cerr << "tabhash: " << e.what() << "\n";
    return kConfigExit;
  }
  return 0;
}
