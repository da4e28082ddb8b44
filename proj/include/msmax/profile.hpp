#pragma once

#include <string>
#include <vector>

namespace msmax {

/// Exponents shared by the operators and weight classes: m functions on R^n,
/// fractional order alpha, p_i with 1/p = sum 1/p_i, and target exponent q.
struct ExponentProfile {
  int m = 1;
  int n = 1;
  double alpha = 0.0;
  std::vector<double> p_vec;
  double p = 0.0;
  double q = 0.0;
  bool one_weight = false;

  /// Validates and fills p. Throws std::invalid_argument.
  static ExponentProfile make(int n, double alpha, std::vector<double> p_vec, double q,
                              bool one_weight = false);

  /// q taken from 1/q = 1/p - alpha/n.
  static ExponentProfile one_weight_profile(int n, double alpha, std::vector<double> p_vec);

  /// Only m, n and alpha matter to the maximal operators.
  static ExponentProfile for_operator(int m, int n, double alpha);

  /// p_i' = p_i / (p_i - 1).
  double conjugate(int i) const { return p_vec[i] / (p_vec[i] - 1.0); }

  std::string to_string() const;
};

/// Hoelder conjugate of a scalar exponent.
inline double conjugate_exponent(double p) { return p / (p - 1.0); }

}  // namespace msmax
