#pragma once

// Elementary inequality search, dyadic Carleson embedding sums, and Carleson
// sequences indexed by dyadic rectangles.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "msmax/grid.hpp"
#include "msmax/profile.hpp"
#include "msmax/random.hpp"
#include "msmax/report.hpp"

namespace msmax::carleson {

/// (F, f, nu) with F >= 0, nu > 0, 0 <= f <= F^{1/p} nu^{1/p'}.
struct Triple {
  double F = 0.0;
  double f = 0.0;
  double nu = 0.0;
};

bool in_domain(const Triple& t, double p);

/// Componentwise mean of a tuple.
Triple mean(std::span<const Triple> tuple);

/// [(F - f^p/(2 nu^{p/p'}))^{q/p} - 2^{-nq/p} sum_i (F_i - f_i^p/(2 nu_i^{p/p'}))^{q/p}]
///   * nu^{q/p'} / f^q
/// for the mean (F, f, nu) of a 2^n-tuple. NaN when f = 0.
double normalized_gap(std::span<const Triple> tuple, double p, double q, int n);

struct GapResult {
  double c_emp = 0.0;  // +inf when no sample constrains
  std::vector<Triple> witness;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t degenerate = 0;  // f = 0
};

/// Infimum of normalized_gap over admissible tuples. Tuples must have 2^n
/// entries; those outside the domain or with some nu_i > b nu are rejected.
/// Throws std::invalid_argument unless 0 < b < 2^n.
GapResult elementary_inequality_gap(double p, double q, int n, double b,
                                    std::span<const std::vector<Triple>> samples);

/// Draws `count` admissible tuples: F_i, nu_i log-uniform on [1e-3, 1e3],
/// f_i uniform on [0, F_i^{1/p} nu_i^{1/p'}], rejecting nu_i > b nu. Rejected
/// draws are counted in `rejected`. Returns fewer than `count` when b < 1
/// (no tuple is admissible).
std::vector<std::vector<Triple>> sample_tuples(double p, int n, double b, std::size_t count,
                                               Rng& rng, std::size_t* rejected = nullptr);

/// Random search plus, for p >= q and b >= 1, the all-ones tuple, whose gap
/// is exactly 0 when p = q.
GapResult lemma31_search(double p, double q, int n, double b, std::size_t count,
                         std::uint64_t seed);

/// Dyadic sub-rectangles of root, root first.
std::vector<DyadicRectangle> dyadic_descendants(const GridShape& shape, const DyadicRectangle& root);

enum class EmbeddingForm {
  statement,  // (integral_I f)^q
  proof,      // (avg_I f)^q
};

/// sum_{I in D(root)} (integral_I omega^{1-p'})^{-q/p'} (integral_I f)^q
///   / (integral_root f^p omega)^{q/p}
/// Requires 1 < p < q, omega > 0, f >= 0 not identically 0 on root.
double embedding_ratio(const GridFunction& omega, const GridFunction& f, double p, double q,
                       const DyadicRectangle& root,
                       EmbeddingForm form = EmbeddingForm::statement);

struct EmbeddingSup {
  double value = 0.0;
  std::size_t argmax = 0;
};

/// Members vanishing on root are skipped.
EmbeddingSup embedding_sup(const GridFunction& omega, double p, double q,
                           const DyadicRectangle& root, std::span<const GridFunction> corpus,
                           EmbeddingForm form = EmbeddingForm::statement);

/// Nonnegative numbers mu_I on dyadic rectangles of one grid.
struct CarlesonSequence {
  GridShape shape;
  std::map<DyadicRectangle, double> mu;

  /// Throws on negative or non-finite values and on rectangles off the grid.
  void set(const DyadicRectangle& r, double value);
};

/// Text form: one `levels... indices... value` line per entry; `#` comments.
void write_sequence(std::ostream& out, const CarlesonSequence& seq);
CarlesonSequence read_sequence(std::istream& in, const GridShape& shape);

struct ConditionConstant {
  double value = 0.0;
  DyadicRectangle witness;
};

/// sup_I mu_I / (integral_I omega)^{q/p}
ConditionConstant carleson_condition_constant(const CarlesonSequence& seq,
                                              const GridFunction& omega, double p, double q);

/// sum_I mu_I (avg_I f)^q / (integral f^p omega)^{q/p}
double carleson_quotient(const CarlesonSequence& seq, const GridFunction& omega,
                         const GridFunction& f, double p, double q);

/// C_2 from the condition, C_1 over corpus and every chi_I, and the exact
/// chi_I inequalities quotient(chi_I) >= mu_I / (integral_I omega)^{q/p}.
VerificationReport carleson_embedding_check(const CarlesonSequence& seq, const GridFunction& omega,
                                            double p, double q,
                                            std::span<const GridFunction> corpus);

/// Indicator of a grid rectangle.
GridFunction indicator(const GridShape& shape, const GridRectangle& r);

}  // namespace msmax::carleson
