#pragma once

// Multilinear fractional integral by cell-center quadrature, the good-lambda
// comparison between I_alpha and M_alpha, and the dyadic counterexample on
// [-1, 1]^n.
//
//   I_alpha(f)(x) = int f_1(y_1)...f_m(y_m) / (|x-y_1| + ... + |x-y_m|)^{mn-alpha} dy

#include <span>
#include <vector>

#include "msmax/grid.hpp"
#include "msmax/profile.hpp"
#include "msmax/report.hpp"

namespace msmax::fracint {

/// Quadrature at one cell. The tuple with every y_i in the cell of x uses
/// half the smallest cell side in place of |x - y|. Cost O(N^m).
double fractional_integral_at(std::span<const GridFunction> fs, const ExponentProfile& prof,
                              const Index& cell);

/// All cells; cost O(N^{m+1}), split over `threads` workers.
GridFunction fractional_integral(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                 int threads = 1);

struct GoodLambdaParams {
  double b = 1.0;
  double d = 1.0;
  std::vector<double> lambdas;  // positive, increasing
  int partition_level = 2;      // dyadic cubes Q of this level
};

/// n log-spaced values from lo to hi.
std::vector<double> log_grid(double lo, double hi, int count);

/// 32 log-spaced values spanning the positive range of I.
std::vector<double> default_lambdas(const GridFunction& I, int count = 32);

struct GoodLambdaResult {
  double k_emp = 0.0;                 // max |E| / (|Q| (d/b)^{n/(mn-alpha)})
  double k_lambda = 0.0;              // lambda attaining it
  GridRectangle k_cube;               // cube attaining it
  std::size_t cubes_used = 0;         // (lambda, Q) pairs meeting the premise
  std::vector<double> margins;        // RHS - LHS of the good-lambda inequality, per lambda
  std::vector<double> lhs;
  std::vector<double> rhs;
};

/// Set-measure evaluation on precomputed I = I_alpha(f) and M = M_alpha(f).
/// The premise "I <= lambda somewhere in 4Q" is checked on 4Q clipped to the
/// box. Requires a grid whose cubes of partition_level have equal sides.
GoodLambdaResult good_lambda_sets(const GridFunction& I, const GridFunction& M,
                                  const ExponentProfile& prof, const GridFunction& omega,
                                  double q, const GoodLambdaParams& params);

/// Largest delta such that every dyadic cube Q and union of its cells S with
/// |S| < delta |Q| has omega(S) < eps omega(Q), cubes of level >= 0.
double a_infinity_delta(const GridFunction& omega, double eps);

struct Recipe {
  double B = 1.0;
  double b = 1.0;
  double eps = 0.0;
  double delta = 0.0;
  double L = 0.0;        // 4^n
  double d56 = 0.0;      // (L/m^n)^{alpha/n - m}
  double K = 0.0;        // empirical K measured at d = d56
  double D = 0.0;        // b (delta / (K 4^n))^{(mn-alpha)/n}; +inf when K = 0
  double d = 0.0;        // min(D, d56)
};

/// b = max(1, B), eps = b^{-q}/2, delta from omega, d = min(D, d56).
Recipe good_lambda_recipe(const GridFunction& I, const GridFunction& M,
                          const ExponentProfile& prof, const GridFunction& omega, double q,
                          const std::vector<double>& lambdas, int partition_level,
                          double B = 1.0);

/// Computes I_alpha and the cube maximal function, then runs the sets check.
/// Empty lambdas -> std::invalid_argument.
VerificationReport good_lambda_check(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                     const GridFunction& omega, double q,
                                     const GoodLambdaParams& params);

struct Ratios {
  double strong = 0.0;  // int I^q omega / int M^q omega
  double weak = 0.0;    // ||I||^q_{L^{q,inf}(omega)} / ||M||^q_{L^{q,inf}(omega)}
};

/// Both ratios are 0 when I vanishes and +inf when only M does.
Ratios comparison_ratios(const GridFunction& I, const GridFunction& M, const GridFunction& omega,
                         double q);
Ratios comparison_ratios(std::span<const GridFunction> fs, const ExponentProfile& prof,
                         const GridFunction& omega, double q);

/// Grid on [-1, 1]^n with 2^L cells per axis; 0 is a vertex.
GridShape symmetric_box(int n, int L);

/// chi_{[-1,0]^n}(x) |x|^{-alpha} at cell centers.
GridFunction remark53_function(const GridShape& shape, double alpha);

/// For L, L+1, ..., L+extra: the dyadic cube maximal function (cubes strictly
/// inside the box) is exactly 0 on [0,1]^n, and I_alpha f at the [0,1]^n cell
/// touching 0 grows strictly with L. lambda = I_alpha f at the far corner.
VerificationReport remark53_experiment(double alpha, int L, int n = 1, int extra = 2);

}  // namespace msmax::fracint
