#pragma once

// Weight-class constants as suprema over a rectangle family, reverse doubling,
// and weight generators. avg_R g = |R|^{-1} integral_R g throughout.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "msmax/grid.hpp"
#include "msmax/profile.hpp"
#include "msmax/report.hpp"

namespace msmax::weights {

/// m strictly positive weights on one grid with their products.
struct WeightVector {
  std::vector<GridFunction> omega;
  GridFunction nu_prod;  // prod omega_i
  GridFunction nu_glpt;  // prod omega_i^{p/p_i}

  /// Throws std::domain_error on a non-positive or non-finite weight and
  /// ShapeError on mismatched grids.
  static WeightVector make(std::vector<GridFunction> omega, const ExponentProfile& prof);

  const GridShape& shape() const { return omega.front().shape(); }
};

struct ConstantReport {
  double value = 0.0;
  GridRectangle witness;
  RectFamily family = RectFamily::all;
  Index levels{0, 0, 0};

  ConstantEntry entry(const std::string& name) const;
};

/// sup_R (avg nu_prod^q)^{1/q} prod_i (avg omega_i^{-p_i'})^{1/p_i'}
ConstantReport a_pq_rect_constant(const WeightVector& w, const ExponentProfile& prof,
                                  RectFamily family);
double a_pq_expression(const WeightVector& w, const ExponentProfile& prof, const GridRectangle& r);

/// sup_R |R|^{alpha/n + 1/q - 1/p} (avg nu)^{1/q} prod_i (avg omega_i^{1-p_i'})^{1/p_i'}.
/// Requires p < q.
ConstantReport two_weight_constant(const WeightVector& w, const GridFunction& nu,
                                   const ExponentProfile& prof, RectFamily family);
double two_weight_expression(const WeightVector& w, const GridFunction& nu,
                             const ExponentProfile& prof, const GridRectangle& r);

/// sup_R (avg omega)(avg omega^{1-p'})^{p-1}. The K of the reverse doubling
/// estimate is value^{1/p}; see ap_K.
ConstantReport a_p_rect_constant(const GridFunction& omega, double p, RectFamily family);
double a_p_expression(const GridFunction& omega, double p, const GridRectangle& r);
inline double ap_K(double a_p_value, double p) { return std::pow(a_p_value, 1.0 / p); }

/// sup_R (avg nu_glpt) prod_i (avg omega_i^{1-p_i'})^{p/p_i'}
ConstantReport multilinear_ap_constant(const WeightVector& w, const ExponentProfile& prof,
                                       RectFamily family);
double multilinear_ap_expression(const WeightVector& w, const ExponentProfile& prof,
                                 const GridRectangle& r);

/// min over dyadic parent J and child I (every axis halved) of
/// integral_J omega / integral_I omega. Pairs with a massless child are
/// skipped; +inf if every pair is skipped or no axis can be halved.
double reverse_doubling_constant(const GridFunction& omega);

struct DerivedExponents {
  double r = 0.0;
  std::vector<double> r_i;
};

/// r = 1 + q(m - 1/p), r_i = 1 + (p_i'/q)[1 + (m-1)q - q/p + q/p_i].
DerivedExponents derived_exponents(const ExponentProfile& prof);

/// alpha/n < (m-2) + 1/p_i + 1/p_j for every pair i, j (i = j included).
bool r_i_hypothesis(const ExponentProfile& prof);

/// d with 1/d = 1 - (1 - 2^{-n}) / (2^{n p'/p} K^{p'}). Requires K >= 1, p > 1.
double rd_prediction(double K, double p, int n);

/// |x - anchor|^a sampled at cell centers (Euclidean norm).
GridFunction power_weight(const GridShape& shape, double a, const Point& anchor);

/// Product over dyadic cubes Q of level l < depth of (1 + s_Q amp decay^l),
/// s_Q = +-1 drawn from (seed, l, Q). Signs depend only on the cube, so the
/// weight is the same continuum function at every resolution that resolves
/// level depth - 1. Levels beyond the grid are dropped.
GridFunction dyadic_martingale_weight(const GridShape& shape, std::uint64_t seed, int depth,
                                      double amplitude, double decay);

/// Parsed weight description: `const:c=1`, `power:a=0.5,anchor=0`,
/// `martingale:seed=7,depth=5,amp=0.3,decay=0.7`. A power anchor may be
/// given per axis as `anchor=0.5/0.25`.
struct WeightSpec {
  std::string kind;
  std::map<std::string, std::string> params;

  /// Throws std::invalid_argument on unknown kinds, keys, or bad numbers.
  static WeightSpec parse(const std::string& text);
  GridFunction sample(const GridShape& shape) const;
  std::string to_string() const;
};

/// Builds the weight vector on a given grid; used for refinement sweeps.
using WeightFactory = std::function<std::vector<GridFunction>(const GridShape&)>;

WeightFactory factory(const std::vector<WeightSpec>& specs);

struct SweepRow {
  std::string name;
  std::vector<double> values;  // one per resolution
  double worst_ratio = 1.0;    // max consecutive growth ratio
  bool stable = true;
};

/// Evaluates `constant` on shape refined 0..extra times and flags growth
/// above `threshold` between consecutive resolutions.
SweepRow refinement_sweep(const std::string& name, const GridShape& base, int extra,
                          double threshold, const std::function<double(const GridShape&)>& constant);

/// Derived memberships for a one-weight vector: A_r and A_{mq} constants of
/// nu_prod^q, A_{m p_i'} of omega_i^{-p_i'}, and A_{r_i} of omega_i^{-p_i'}
/// when the pairwise hypothesis holds. Each constant is swept over
/// resolutions base..base+extra; growth is reported as evidence only.
VerificationReport characterize(const WeightFactory& weights, const ExponentProfile& prof,
                                RectFamily family, const GridShape& base, int extra = 2,
                                double threshold = 1.5);

}  // namespace msmax::weights
