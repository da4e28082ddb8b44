#include "msmax/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace msmax::maximal {

namespace {

// Prefix tables of |f_i| plus the exponent of |R| in A(R).
class Evaluator {
 public:
  Evaluator(std::span<const GridFunction> fs, const ExponentProfile& prof) {
    if (fs.empty()) throw std::invalid_argument("maximal operator needs at least one function");
    if (static_cast<int>(fs.size()) != prof.m) {
      throw ShapeError("profile expects m=" + std::to_string(prof.m) + " functions, got " +
                       std::to_string(fs.size()));
    }
    shape_ = fs.front().shape();
    if (shape_.dims != prof.n) throw ShapeError("profile dimension does not match grid dimension");
    if (!(prof.alpha >= 0.0 && prof.alpha < prof.m * prof.n)) {
      throw std::invalid_argument("alpha must lie in [0, m*n)");
    }
    for (const auto& f : fs) {
      if (!(f.shape() == shape_)) throw ShapeError("maximal operator inputs live on different grids");
      tables_.emplace_back(f.map([](double v) { return std::abs(v); }));
    }
    exponent_ = prof.alpha / prof.n - prof.m;
  }

  const GridShape& shape() const { return shape_; }

  double volume(const Index& lo, const Index& hi) const {
    double v = 1.0;
    for (int j = 0; j < shape_.dims; ++j) v *= (hi[j] - lo[j]) * shape_.width(j);
    return v;
  }

  // lo/hi may extend past the grid (shift-averaged canvas); mass is clipped,
  // the measure is not.
  double value(const Index& lo, const Index& hi, bool clip = false) const {
    double prod = 1.0;
    for (const auto& t : tables_) {
      const double mass = clip ? t.clipped_integral(lo, hi) : static_cast<double>(t.raw(lo, hi));
      if (!(mass > 0.0)) return 0.0;
      prod *= mass;
    }
    return prod * std::pow(volume(lo, hi), exponent_);
  }

 private:
  GridShape shape_;
  std::vector<SumTable> tables_;
  double exponent_ = 0.0;
};

struct Filter {
  Index max_len{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                std::numeric_limits<int>::max()};
  bool cubes = false;
};

// Cell count an interval on `axis` must have to match side `side0`; 0 when no
// whole number of cells does.
int cube_length(const GridShape& shape, int axis, double side0) {
  const double r = side0 / shape.width(axis);
  const double len = std::round(r);
  if (len < 1.0 || std::abs(r - len) > 1e-9 * std::max(1.0, r)) return 0;
  return static_cast<int>(len);
}

class Sweep {
 public:
  Sweep(const Evaluator& ev, const Filter& flt) : ev_(ev), flt_(flt), shape_(ev.shape()) {
    const int n = shape_.dims;
    sub_size_.assign(static_cast<std::size_t>(n) + 1, 1);
    for (int j = n - 1; j >= 0; --j) sub_size_[j] = sub_size_[j + 1] * shape_.cells(j);
    scratch_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j + 1 < n; ++j) scratch_[j].assign(sub_size_[j + 1], 0.0);
  }

  GridFunction run() {
    GridFunction out(shape_);
    lo_ = Index{0, 0, 0};
    hi_ = Index{1, 1, 1};
    axis(0, out.values().data());
    return out;
  }

 private:
  // Range of admissible lengths for intervals on `j`, given the intervals
  // already fixed on earlier axes.
  std::pair<int, int> lengths(int j) const {
    int lo_len = 1;
    int hi_len = std::min(shape_.cells(j), flt_.max_len[j]);
    if (flt_.cubes && j > 0) {
      const int len = cube_length(shape_, j, (hi_[0] - lo_[0]) * shape_.width(0));
      if (len == 0 || len > hi_len) return {1, 0};
      lo_len = hi_len = len;
    }
    return {lo_len, hi_len};
  }

  void axis(int j, double* out) {
    const int n = shape_.dims;
    const int N = shape_.cells(j);
    const auto [min_len, max_len] = lengths(j);
    if (min_len > max_len) return;

    if (j == n - 1) {
      // out[x] = max over a <= x < b of A([a,b)): suffix maxima in b per a.
      for (int a = 0; a < N; ++a) {
        lo_[j] = a;
        double best = 0.0;
        const int b_top = std::min(N, a + max_len);
        for (int b = b_top; b > a; --b) {
          if (b - a >= min_len) {
            hi_[j] = b;
            best = std::max(best, ev_.value(lo_, hi_));
          }
          out[b - 1] = std::max(out[b - 1], best);
        }
      }
      return;
    }

    const std::size_t sub = sub_size_[j + 1];
    std::vector<double>& buf = scratch_[j];
    for (int a = 0; a < N; ++a) {
      for (int len = min_len; len <= max_len && a + len <= N; ++len) {
        lo_[j] = a;
        hi_[j] = a + len;
        std::fill(buf.begin(), buf.end(), 0.0);
        axis(j + 1, buf.data());
        for (int x = a; x < a + len; ++x) {
          double* row = out + static_cast<std::size_t>(x) * sub;
          for (std::size_t k = 0; k < sub; ++k) row[k] = std::max(row[k], buf[k]);
        }
      }
    }
  }

  const Evaluator& ev_;
  Filter flt_;
  GridShape shape_;
  std::vector<std::size_t> sub_size_;
  std::vector<std::vector<double>> scratch_;
  Index lo_{0, 0, 0};
  Index hi_{1, 1, 1};
};

bool equal_sides(const GridShape& shape, const Index& level) {
  const double s0 = std::ldexp(shape.side[0], -level[0]);
  for (int j = 1; j < shape.dims; ++j) {
    const double s = std::ldexp(shape.side[j], -level[j]);
    if (std::abs(s - s0) > 1e-12 * s0) return false;
  }
  return true;
}

GridFunction dyadic_sweep(const Evaluator& ev, bool cubes, int coarsest) {
  const GridShape& shape = ev.shape();
  const int n = shape.dims;
  GridFunction out(shape);
  for (int j = 0; j < n; ++j) {
    if (coarsest > shape.levels[j]) return out;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Index x = shape.unravel(k);
    Index level{coarsest, coarsest, coarsest};
    double best = 0.0;
    while (true) {
      if (!cubes || equal_sides(shape, level)) {
        Index lo{0, 0, 0};
        Index hi{1, 1, 1};
        for (int j = 0; j < n; ++j) {
          const int len = shape.cells(j) >> level[j];
          lo[j] = x[j] / len * len;
          hi[j] = lo[j] + len;
        }
        best = std::max(best, ev.value(lo, hi));
      }
      int j = n - 1;
      while (j >= 0) {
        if (++level[j] <= shape.levels[j]) break;
        level[j] = coarsest;
        --j;
      }
      if (j < 0) break;
    }
    out[k] = best;
  }
  return out;
}

}  // namespace

GridFunction strong_maximal_dyadic(std::span<const GridFunction> fs, const ExponentProfile& prof) {
  return dyadic_sweep(Evaluator(fs, prof), false, 0);
}

GridFunction strong_maximal(std::span<const GridFunction> fs, const ExponentProfile& prof) {
  const Evaluator ev(fs, prof);
  return Sweep(ev, Filter{}).run();
}

GridFunction strong_maximal_truncated(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                      int k) {
  const Evaluator ev(fs, prof);
  Filter flt;
  const double cap = std::ldexp(1.0, k);
  for (int j = 0; j < ev.shape().dims; ++j) {
    const double cells = cap / ev.shape().width(j);
    // Whole cells only; the tolerance absorbs exact powers of two.
    flt.max_len[j] = cells >= ev.shape().cells(j)
                         ? ev.shape().cells(j)
                         : static_cast<int>(std::floor(cells * (1.0 + 1e-12)));
  }
  for (int j = 0; j < ev.shape().dims; ++j) {
    if (flt.max_len[j] < 1) return GridFunction(ev.shape());
  }
  return Sweep(ev, flt).run();
}

std::vector<Index> shift_lattice(const GridShape& shape, int k) {
  const int n = shape.dims;
  const double reach = std::ldexp(1.0, k + 2);
  Index bound{0, 0, 0};
  for (int j = 0; j < n; ++j) {
    const double cells = reach / shape.width(j);
    bound[j] = cells >= shape.cells(j) ? shape.cells(j)
                                       : static_cast<int>(std::floor(cells * (1.0 + 1e-12)));
  }
  std::vector<Index> out;
  Index t{0, 0, 0};
  for (int j = 0; j < n; ++j) t[j] = -bound[j];
  while (true) {
    out.push_back(t);
    int j = n - 1;
    while (j >= 0) {
      if (++t[j] <= bound[j]) break;
      t[j] = -bound[j];
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

double domination_constant(const ExponentProfile& prof) {
  return std::ldexp(1.0, prof.n + 1) * std::pow(4.0, prof.m * prof.n - prof.alpha);
}

GridFunction shift_averaged_dyadic(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                   int k, std::span<const Index> shifts) {
  if (shifts.empty()) throw std::invalid_argument("shift set is empty");
  const Evaluator ev(fs, prof);
  const GridShape& shape = ev.shape();
  const int n = shape.dims;
  const double reach = std::ldexp(1.0, k + 2);
  for (const Index& t : shifts) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(t[j]) > shape.cells(j)) throw std::invalid_argument("shift exceeds grid extent");
      if (std::abs(t[j]) * shape.width(j) > reach * (1.0 + 1e-12)) {
        throw std::invalid_argument("shift outside B_k");
      }
    }
  }

  // Canvas axis j: 4 N_j cells, levels 0..L_j+2, box at offset 2 N_j.
  Index canvas_levels{0, 0, 0};
  Index offset{0, 0, 0};
  for (int j = 0; j < n; ++j) {
    canvas_levels[j] = shape.levels[j] + 2;
    offset[j] = 2 * shape.cells(j);
  }

  GridFunction out(shape);
  for (std::size_t c = 0; c < out.size(); ++c) {
    const Index x = shape.unravel(c);
    long double total = 0.0L;
    for (const Index& t : shifts) {
      // Dyadic canvas intervals around y = x + t, pulled back by -t into box
      // coordinates.
      std::array<std::vector<std::pair<int, int>>, kMaxDims> choices;
      for (int j = 0; j < n; ++j) {
        const int y = x[j] + offset[j] + t[j];
        for (int s = 0; s <= canvas_levels[j]; ++s) {
          const int len = (4 * shape.cells(j)) >> s;
          const int start = y / len * len - offset[j] - t[j];
          choices[j].emplace_back(start, start + len);
        }
      }
      double best = 0.0;
      Index pick{0, 0, 0};
      while (true) {
        Index lo{0, 0, 0};
        Index hi{1, 1, 1};
        for (int j = 0; j < n; ++j) {
          lo[j] = choices[j][pick[j]].first;
          hi[j] = choices[j][pick[j]].second;
        }
        best = std::max(best, ev.value(lo, hi, true));
        int j = n - 1;
        while (j >= 0) {
          if (++pick[j] < static_cast<int>(choices[j].size())) break;
          pick[j] = 0;
          --j;
        }
        if (j < 0) break;
      }
      total += best;
    }
    out[c] = static_cast<double>(total / static_cast<long double>(shifts.size()));
  }
  return out;
}

GridFunction cube_maximal(std::span<const GridFunction> fs, const ExponentProfile& prof) {
  const Evaluator ev(fs, prof);
  Filter flt;
  flt.cubes = true;
  return Sweep(ev, flt).run();
}

GridFunction cube_maximal_dyadic(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                 int coarsest_level) {
  if (coarsest_level < 0) throw std::invalid_argument("coarsest level must be >= 0");
  return dyadic_sweep(Evaluator(fs, prof), true, coarsest_level);
}

Witness maximal_witness(std::span<const GridFunction> fs, const ExponentProfile& prof,
                        RectFamily family, bool cubes_only, const Index& cell) {
  const Evaluator ev(fs, prof);
  const GridShape& shape = ev.shape();
  const int n = shape.dims;
  for (int j = 0; j < n; ++j) {
    if (cell[j] < 0 || cell[j] >= shape.cells(j)) throw std::out_of_range("witness cell outside grid");
  }
  std::array<std::vector<std::pair<int, int>>, kMaxDims> choices;
  for (int j = 0; j < n; ++j) {
    if (family == RectFamily::dyadic) {
      for (int l = 0; l <= shape.levels[j]; ++l) {
        const int len = shape.cells(j) >> l;
        const int lo = cell[j] / len * len;
        choices[j].emplace_back(lo, lo + len);
      }
    } else {
      for (int a = 0; a <= cell[j]; ++a) {
        for (int b = cell[j] + 1; b <= shape.cells(j); ++b) choices[j].emplace_back(a, b);
      }
    }
  }
  Witness w;
  w.rect.dims = n;
  bool found = false;
  Index pick{0, 0, 0};
  while (true) {
    GridRectangle r;
    r.dims = n;
    for (int j = 0; j < n; ++j) {
      r.lo[j] = choices[j][pick[j]].first;
      r.hi[j] = choices[j][pick[j]].second;
    }
    bool ok = true;
    if (cubes_only) {
      const double s0 = side_length(r, shape, 0);
      for (int j = 1; j < n; ++j) {
        if (std::abs(side_length(r, shape, j) - s0) > 1e-12 * s0) ok = false;
      }
    }
    if (ok) {
      const double v = ev.value(r.lo, r.hi);
      if (!found || v > w.value) {
        w.value = v;
        w.rect = r;
        found = true;
      }
    }
    int j = n - 1;
    while (j >= 0) {
      if (++pick[j] < static_cast<int>(choices[j].size())) break;
      pick[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return w;
}

double rectangle_average(std::span<const GridFunction> fs, const ExponentProfile& prof,
                         const GridRectangle& r) {
  const Evaluator ev(fs, prof);
  check_bounds(r, ev.shape());
  return ev.value(r.lo, r.hi);
}

double weak_norm_estimate(const GridFunction& g, const GridFunction& nu, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("weak norm exponent q must be positive");
  if (!(g.shape() == nu.shape())) throw ShapeError("weak norm: g and nu on different grids");
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g[a]) > std::abs(g[b]);
  });
  const double vol = g.shape().cell_volume();
  long double mass = 0.0L;
  double best = 0.0;
  // Walk values downward; at the end of each run of equal values the mass
  // is nu({|g| >= v}).
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double v = std::abs(g[order[i]]);
    mass += static_cast<long double>(nu[order[i]]) * vol;
    const bool run_ends = i + 1 == order.size() || std::abs(g[order[i + 1]]) != v;
    if (run_ends && v > 0.0) {
      best = std::max(best, v * std::pow(static_cast<double>(mass), 1.0 / q));
    }
  }
  return best;
}

double weighted_lq_power(const GridFunction& g, const GridFunction& nu, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("norm exponent q must be positive");
  if (!(g.shape() == nu.shape())) throw ShapeError("weighted norm: g and nu on different grids");
  long double s = 0.0L;
  for (std::size_t k = 0; k < g.size(); ++k) {
    s += static_cast<long double>(std::pow(std::abs(g[k]), q)) * nu[k];
  }
  return static_cast<double>(s * g.shape().cell_volume());
}

}  // namespace msmax::maximal
