#include "msmax/profile.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace msmax {

namespace {

constexpr double kRelationTol = 1e-12;

}  // namespace

ExponentProfile ExponentProfile::make(int n, double alpha, std::vector<double> p_vec, double q,
                                      bool one_weight) {
  if (p_vec.empty()) throw std::invalid_argument("profile needs at least one p_i");
  if (n < 1 || n > 3) throw std::invalid_argument("profile dimension must be in [1, 3]");
  ExponentProfile prof;
  prof.m = static_cast<int>(p_vec.size());
  prof.n = n;
  prof.alpha = alpha;
  double inv_p = 0.0;
  for (double pi : p_vec) {
    if (!(pi > 1.0) || !std::isfinite(pi)) {
      throw std::invalid_argument("each p_i must satisfy 1 < p_i < inf");
    }
    inv_p += 1.0 / pi;
  }
  prof.p_vec = std::move(p_vec);
  prof.p = 1.0 / inv_p;
  prof.q = q;
  prof.one_weight = one_weight;
  if (!(alpha >= 0.0) || !(alpha < prof.m * n)) {
    throw std::invalid_argument("alpha must lie in [0, m*n)");
  }
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("q must be positive and finite");
  if (one_weight) {
    if (std::abs(1.0 / q - 1.0 / prof.p + alpha / n) > kRelationTol) {
      throw std::invalid_argument("one-weight profile requires 1/q = 1/p - alpha/n");
    }
    if (!(prof.p < q)) throw std::invalid_argument("one-weight profile requires p < q");
  }
  return prof;
}

ExponentProfile ExponentProfile::one_weight_profile(int n, double alpha, std::vector<double> p_vec) {
  double inv_p = 0.0;
  for (double pi : p_vec) inv_p += 1.0 / pi;
  const double inv_q = inv_p - alpha / n;
  if (!(inv_q > 0.0)) throw std::invalid_argument("1/p - alpha/n must be positive");
  return make(n, alpha, std::move(p_vec), 1.0 / inv_q, true);
}

ExponentProfile ExponentProfile::for_operator(int m, int n, double alpha) {
  if (m < 1) throw std::invalid_argument("m must be positive");
  return make(n, alpha, std::vector<double>(static_cast<std::size_t>(m), 2.0), 1.0);
}

std::string ExponentProfile::to_string() const {
  std::ostringstream os;
  os << "m=" << m << " n=" << n << " alpha=" << alpha << " p=(";
  for (std::size_t i = 0; i < p_vec.size(); ++i) os << (i ? "," : "") << p_vec[i];
  os << ") p=" << p << " q=" << q << (one_weight ? " one-weight" : "");
  return os.str();
}

}  // namespace msmax
