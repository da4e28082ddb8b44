#pragma once

// Nested-loop reference implementations. Nothing here calls into the library
// beyond reading GridFunction storage, so it can check the fast paths.

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "msmax/grid.hpp"

namespace oracle {

using msmax::GridFunction;
using msmax::GridShape;
using msmax::Index;

inline int cells(const GridShape& s, int j) { return 1 << s.levels[j]; }

inline double cell_width(const GridShape& s, int j) { return s.side[j] / cells(s, j); }

inline double cell_value(const GridFunction& f, const Index& idx) {
  const GridShape& s = f.shape();
  std::size_t k = 0;
  for (int j = 0; j < s.dims; ++j) k = k * cells(s, j) + idx[j];
  return f.values()[k];
}

// Visits every cell index in [lo, hi).
inline void each_cell(int dims, const Index& lo, const Index& hi,
                      const std::function<void(const Index&)>& fn) {
  Index idx = lo;
  for (int j = 0; j < dims; ++j) {
    if (lo[j] >= hi[j]) return;
  }
  while (true) {
    fn(idx);
    int j = dims - 1;
    while (j >= 0) {
      if (++idx[j] < hi[j]) break;
      idx[j] = lo[j];
      --j;
    }
    if (j < 0) return;
  }
}

inline double direct_integral(const GridFunction& f, const Index& lo, const Index& hi) {
  const GridShape& s = f.shape();
  double vol = 1.0;
  for (int j = 0; j < s.dims; ++j) vol *= cell_width(s, j);
  double sum = 0.0;
  each_cell(s.dims, lo, hi, [&](const Index& c) { sum += cell_value(f, c); });
  return sum * vol;
}

inline double direct_measure(const GridShape& s, const Index& lo, const Index& hi) {
  double v = 1.0;
  for (int j = 0; j < s.dims; ++j) v *= (hi[j] - lo[j]) * cell_width(s, j);
  return v;
}

// prod_i |R|^{alpha/(mn) - 1} int_R |f_i|
inline double average_product(const std::vector<GridFunction>& fs, double alpha, const Index& lo,
                              const Index& hi) {
  const GridShape& s = fs[0].shape();
  const int m = static_cast<int>(fs.size());
  const double vol = direct_measure(s, lo, hi);
  double out = 1.0;
  for (const auto& f : fs) {
    double sum = 0.0;
    each_cell(s.dims, lo, hi, [&](const Index& c) { sum += std::abs(cell_value(f, c)); });
    double vc = 1.0;
    for (int j = 0; j < s.dims; ++j) vc *= cell_width(s, j);
    out *= std::pow(vol, alpha / (m * s.dims) - 1.0) * (sum * vc);
  }
  return out;
}

enum class Family { all, dyadic };

// Brute-force maximal operator: every rectangle of the family containing
// each cell, filtered by `keep` (side lengths -> bool).
inline GridFunction brute_maximal(const std::vector<GridFunction>& fs, double alpha, Family fam,
                                  const std::function<bool(const std::vector<double>&)>& keep,
                                  int coarsest = 0) {
  const GridShape& s = fs[0].shape();
  GridFunction out(s);
  const int n = s.dims;
  Index zero{0, 0, 0};
  Index ext{1, 1, 1};
  for (int j = 0; j < n; ++j) ext[j] = cells(s, j);
  each_cell(n, zero, ext, [&](const Index& x) {
    std::vector<std::vector<std::pair<int, int>>> axis(n);
    for (int j = 0; j < n; ++j) {
      const int N = cells(s, j);
      if (fam == Family::all) {
        for (int a = 0; a < N; ++a)
          for (int b = a + 1; b <= N; ++b)
            if (a <= x[j] && x[j] < b) axis[j].push_back({a, b});
      } else {
        for (int l = coarsest; l <= s.levels[j]; ++l) {
          const int len = N / (1 << l);
          const int a = (x[j] / len) * len;
          axis[j].push_back({a, a + len});
        }
      }
    }
    double best = 0.0;
    Index npick{1, 1, 1};
    for (int j = 0; j < n; ++j) npick[j] = static_cast<int>(axis[j].size());
    each_cell(n, zero, npick, [&](const Index& p) {
      Index lo{0, 0, 0}, hi{1, 1, 1};
      std::vector<double> sides(n);
      for (int j = 0; j < n; ++j) {
        lo[j] = axis[j][p[j]].first;
        hi[j] = axis[j][p[j]].second;
        sides[j] = (hi[j] - lo[j]) * cell_width(s, j);
      }
      if (!keep(sides)) return;
      best = std::max(best, average_product(fs, alpha, lo, hi));
    });
    out.at(x) = best;
  });
  return out;
}

inline bool any_rect(const std::vector<double>&) { return true; }

inline bool is_cube(const std::vector<double>& sides) {
  for (double v : sides)
    if (std::abs(v - sides[0]) > 1e-12 * sides[0]) return false;
  return true;
}

inline GridFunction random_function(const GridShape& s, std::mt19937_64& rng, double lo = 0.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  GridFunction f(s);
  for (auto& v : f.values()) v = u(rng);
  return f;
}

// Sparse nonnegative function: a few random cells carry mass.
inline GridFunction random_sparse(const GridShape& s, std::mt19937_64& rng) {
  GridFunction f(s);
  std::uniform_int_distribution<std::size_t> cell(0, f.size() - 1);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  const int hits = 1 + static_cast<int>(f.size() / 5);
  for (int i = 0; i < hits; ++i) f.values()[cell(rng)] = u(rng);
  return f;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace oracle
