// msmax: run scenario files, compute weight constants, or verify one check
// from flags. Exit 0 when every asserted check passes, 1 when one fails, 2 on
// configuration errors.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "msmax/harness.hpp"

namespace fs = std::filesystem;
using msmax::harness::ConfigError;
using msmax::harness::Scenario;

namespace {

struct Flags {
  std::optional<int> n;
  std::optional<double> alpha;
  std::vector<double> p;
  std::optional<double> q;
  std::vector<std::string> weights;
  std::string nu;
  std::string family;
  std::vector<int> levels;
  std::optional<int> count;
  std::optional<double> b;
  std::optional<std::size_t> samples;
  std::vector<int> k;
  std::optional<int> partition_level;
  std::optional<int> lambdas;
  std::optional<int> generated;
};

void scenario_flags(CLI::App* app, Flags& f, bool full) {
  app->add_option("--n", f.n, "Dimension");
  app->add_option("--alpha", f.alpha, "Fractional order");
  app->add_option("--p", f.p, "Exponents p_1 ... p_m")->delimiter(',');
  app->add_option("--q", f.q, "Target exponent (omit for 1/q = 1/p - alpha/n)");
  app->add_option("--weight", f.weights, "Weight spec, one per function");
  app->add_option("--nu", f.nu, "Weight spec for nu");
  app->add_option("--family", f.family, "dyadic|all");
  app->add_option("--L", f.levels, "Resolutions")->delimiter(',');
  if (!full) return;
  app->add_option("--count", f.count, "Corpus size");
  app->add_option("--b", f.b, "lemma31: b");
  app->add_option("--samples", f.samples, "lemma31: sample count");
  app->add_option("--k", f.k, "shiftdom: truncation exponents")->delimiter(',');
  app->add_option("--partition-level", f.partition_level, "goodlambda: cube level");
  app->add_option("--lambdas", f.lambdas, "goodlambda: number of lambdas");
  app->add_option("--generated", f.generated, "prop42: generated weights");
}

void apply(const Flags& f, Scenario& s) {
  if (f.n) s.n = *f.n;
  if (f.alpha) s.alpha = *f.alpha;
  if (!f.p.empty()) s.p = f.p;
  if (f.q) s.q = *f.q;
  if (!f.weights.empty()) s.weights = f.weights;
  if (!f.nu.empty()) s.nu = f.nu;
  if (!f.family.empty()) {
    try {
      s.family = msmax::parse_family(f.family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!f.levels.empty()) s.resolutions = f.levels;
  if (f.count) s.corpus.count = *f.count;
  if (f.b) s.b = *f.b;
  if (f.samples) s.samples = *f.samples;
  if (!f.k.empty()) s.k = f.k;
  if (f.partition_level) s.partition_level = *f.partition_level;
  if (f.lambdas) s.lambdas = *f.lambdas;
  if (f.generated) s.generated = *f.generated;
}

int emit(const msmax::VerificationReport& rep, const std::string& out) {
  const std::string json = rep.to_json().dump(2) + "\n";
  if (out.empty()) {
    std::cout << json;
  } else {
    fs::create_directories(out);
    std::ofstream(fs::path(out) / (rep.check + ".json")) << json;
    std::ofstream(fs::path(out) / (rep.check + "_constants.csv")) << rep.constants_csv();
  }
  std::cerr << rep.check << ": " << rep.findings.size() << " findings, " << rep.failures()
            << " failed, " << rep.constants.size() << " constants\n";
  for (const auto& f : rep.findings) {
    if (f.status == msmax::Status::fail) std::cerr << "  FAIL " << f.name << " " << f.detail << "\n";
  }
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilinear fractional strong maximal operators: checks and constants"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--out", out, "Directory for <check>.json and <check>_constants.csv");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string scenario_path;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", scenario_path, "Scenario YAML")->required();

  Flags cflags;
  auto* constants = app.add_subcommand("constants", "Weight constants over the chosen family");
  scenario_flags(constants, cflags, false);

  Flags vflags;
  std::string check;
  auto* verify = app.add_subcommand("verify", "Run one check configured by flags");
  verify->add_option("check", check, "Check id")->required();
  scenario_flags(verify, vflags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Scenario s;
    if (*run) {
      s = Scenario::load(scenario_path);
    } else if (*constants) {
      s.check = "constants";
      apply(cflags, s);
    } else {
      s.check = check;
      apply(vflags, s);
    }
    if (seed) s.seed = *seed;
    return emit(msmax::harness::run_check(s, threads), out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
