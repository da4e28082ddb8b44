#pragma once

// Scenarios, corpora and the end-to-end checks behind the `msmax` CLI.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msmax/grid.hpp"
#include "msmax/profile.hpp"
#include "msmax/random.hpp"
#include "msmax/report.hpp"

namespace msmax::harness {

/// Malformed or inconsistent scenario; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids{"lemma31", "carleson", "cor43",   "shiftdom",
                                            "thm21",   "thm22",    "prop41",  "prop42",
                                            "goodlambda", "prop51", "remark53", "constants"};
  return ids;
}

struct CorpusSpec {
  int count = 64;
  std::vector<std::string> kinds{"indicator", "bump", "noise"};
};

struct Tolerances {
  double identity = 1e-9;
  double quadrature = 0.05;
  double stability = 1.5;
};

struct Scenario {
  std::string check;
  std::string name;
  std::uint64_t seed = 0;

  int n = 1;
  double alpha = 0.0;
  std::vector<double> p{2.0};
  double q = 0.0;  // 0: one-weight relation 1/q = 1/p - alpha/n

  std::vector<std::string> weights;  // weight specs, one per function
  std::string nu;                    // empty: per-check default
  RectFamily family = RectFamily::dyadic;
  std::vector<int> resolutions{4};
  CorpusSpec corpus;
  Tolerances tol;

  // lemma31
  double b = 1.9;
  std::size_t samples = 100000;
  // shiftdom
  std::vector<int> k{-3, -1};
  // goodlambda
  int partition_level = 1;
  double B = 1.0;
  int lambdas = 32;
  // prop42
  int generated = 20;

  /// Throws ConfigError on unknown keys, bad values or a bad check id.
  static Scenario from_yaml(const std::string& text);
  static Scenario load(const std::string& path);

  /// Throws ConfigError when a field violates its invariants.
  void validate() const;

  int m() const { return static_cast<int>(p.size()); }
  ExponentProfile profile() const;
  GridShape shape(int level) const { return GridShape::unit(n, level); }
  nlohmann::ordered_json to_json() const;
};

/// A corpus function described in box-relative coordinates, so one member can
/// be sampled at every resolution.
struct CorpusMember {
  std::string kind;
  std::vector<double> params;
  std::uint64_t seed = 0;

  GridFunction sample(const GridShape& shape) const;
  std::string to_string() const;
};

/// Members cycle through spec.kinds; parameters come from rng in order.
std::vector<CorpusMember> draw_corpus(const CorpusSpec& spec, int n, Rng& rng);

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

VerificationReport verify_lemma31(const Scenario& s, int threads = 1);
VerificationReport verify_carleson(const Scenario& s, int threads = 1);
VerificationReport verify_cor43(const Scenario& s, int threads = 1);
VerificationReport verify_shiftdom(const Scenario& s, int threads = 1);
VerificationReport verify_thm21(const Scenario& s, int threads = 1);
VerificationReport verify_thm22(const Scenario& s, int threads = 1);
VerificationReport verify_prop41(const Scenario& s, int threads = 1);
VerificationReport verify_prop42(const Scenario& s, int threads = 1);
VerificationReport verify_goodlambda(const Scenario& s, int threads = 1);
VerificationReport verify_prop51(const Scenario& s, int threads = 1);
VerificationReport verify_remark53(const Scenario& s, int threads = 1);
VerificationReport weight_constants(const Scenario& s, int threads = 1);

/// Validates, dispatches on s.check, and fills check, scenario echo, seed and
/// runtime. Argument errors from the library surface as ConfigError.
VerificationReport run_check(const Scenario& s, int threads = 1);

}  // namespace msmax::harness
