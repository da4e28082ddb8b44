#include "msmax/fracint.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "msmax/maximal.hpp"

namespace msmax::fracint {

namespace {

struct Source {
  std::vector<Point> at;
  std::vector<double> value;
  std::vector<std::size_t> cell;
};

class Quadrature {
 public:
  Quadrature(std::span<const GridFunction> fs, const ExponentProfile& prof) {
    if (fs.empty() || static_cast<int>(fs.size()) != prof.m) {
      throw ShapeError("fractional integral expects m functions");
    }
    if (!(prof.alpha > 0.0 && prof.alpha < prof.m * prof.n)) {
      throw std::invalid_argument("fractional integral needs 0 < alpha < mn");
    }
    shape_ = fs.front().shape();
    if (shape_.dims != prof.n) throw ShapeError("profile dimension does not match grid dimension");
    h_ = std::numeric_limits<double>::infinity();
    for (int j = 0; j < shape_.dims; ++j) h_ = std::min(h_, shape_.width(j));
    power_ = -(prof.m * prof.n - prof.alpha);
    vol_ = shape_.cell_volume();
    for (const auto& f : fs) {
      if (!(f.shape() == shape_)) throw ShapeError("fractional integral inputs differ in grid");
      Source s;
      for (std::size_t k = 0; k < f.size(); ++k) {
        const double v = std::abs(f[k]);
        if (v == 0.0) continue;
        s.at.push_back(center(shape_.unravel(k)));
        s.value.push_back(v * vol_);
        s.cell.push_back(k);
      }
      sources_.push_back(std::move(s));
    }
  }

  const GridShape& shape() const { return shape_; }

  double at(std::size_t cell) const {
    const Point x = center(shape_.unravel(cell));
    std::vector<std::vector<double>> dist(sources_.size());
    for (std::size_t i = 0; i < sources_.size(); ++i) {
      const Source& s = sources_[i];
      dist[i].resize(s.at.size());
      for (std::size_t k = 0; k < s.at.size(); ++k) {
        double r2 = 0.0;
        for (int j = 0; j < shape_.dims; ++j) r2 += (x[j] - s.at[k][j]) * (x[j] - s.at[k][j]);
        dist[i][k] = s.cell[k] == cell ? 0.0 : std::sqrt(r2);
      }
    }
    return accumulate(dist, 0, 0.0, 1.0);
  }

 private:
  Point center(const Index& c) const {
    Point p{0.0, 0.0, 0.0};
    for (int j = 0; j < shape_.dims; ++j) p[j] = shape_.center(j, c[j]);
    return p;
  }

  double accumulate(const std::vector<std::vector<double>>& dist, std::size_t i, double dsum,
                    double weight) const {
    const Source& s = sources_[i];
    double total = 0.0;
    if (i + 1 == sources_.size()) {
      for (std::size_t k = 0; k < s.value.size(); ++k) {
        const double r = dsum + dist[i][k];
        total += s.value[k] * std::pow(r > 0.0 ? r : 0.5 * h_, power_);
      }
      return weight * total;
    }
    for (std::size_t k = 0; k < s.value.size(); ++k) {
      total += accumulate(dist, i + 1, dsum + dist[i][k], s.value[k]);
    }
    return weight * total;
  }

  GridShape shape_;
  std::vector<Source> sources_;
  double h_ = 0.0;
  double power_ = 0.0;
  double vol_ = 0.0;
};

void require_equal_cubes(const GridShape& s, int level) {
  for (int j = 0; j < s.dims; ++j) {
    if (std::abs(s.width(j) - s.width(0)) > 1e-12 * s.width(0) || s.levels[j] != s.levels[0]) {
      throw ShapeError("good-lambda partition needs equal cells and levels on every axis");
    }
  }
  if (level < 0 || level > s.levels[0]) throw std::invalid_argument("partition level off the grid");
}

}  // namespace

double fractional_integral_at(std::span<const GridFunction> fs, const ExponentProfile& prof,
                              const Index& cell) {
  const Quadrature q(fs, prof);
  for (int j = 0; j < q.shape().dims; ++j) {
    if (cell[j] < 0 || cell[j] >= q.shape().cells(j)) throw std::out_of_range("cell off the grid");
  }
  return q.at(q.shape().linear(cell));
}

GridFunction fractional_integral(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                 int threads) {
  const Quadrature q(fs, prof);
  GridFunction out(q.shape());
  const std::size_t total = out.size();
  const std::size_t workers =
      std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1, total);
  auto run = [&](std::size_t w) {
    for (std::size_t k = w; k < total; k += workers) out[k] = q.at(k);
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw std::invalid_argument("bad log grid");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
  }
  return out;
}

std::vector<double> default_lambdas(const GridFunction& I, int count) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : I.values()) {
    if (v > 0.0) lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > 0.0)) return log_grid(1.0, 1.0, count);
  return log_grid(0.5 * lo, hi, count);
}

GoodLambdaResult good_lambda_sets(const GridFunction& I, const GridFunction& M,
                                  const ExponentProfile& prof, const GridFunction& omega,
                                  double q, const GoodLambdaParams& params) {
  if (params.lambdas.empty()) throw std::invalid_argument("good-lambda check needs lambdas");
  for (std::size_t i = 0; i < params.lambdas.size(); ++i) {
    if (!(params.lambdas[i] > 0.0) || (i && params.lambdas[i] <= params.lambdas[i - 1])) {
      throw std::invalid_argument("lambdas must be positive and increasing");
    }
  }
  if (!(params.b >= 1.0 && params.d > 0.0)) throw std::invalid_argument("need b >= 1 and d > 0");
  if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
  const GridShape& s = I.shape();
  if (!(M.shape() == s) || !(omega.shape() == s)) throw ShapeError("I, M and omega differ in grid");
  require_equal_cubes(s, params.partition_level);

  const int n = s.dims;
  const double cellvol = s.cell_volume();
  const int side = s.cells(0) >> params.partition_level;
  const int per_axis = 1 << params.partition_level;
  const double scale = std::pow(params.d / params.b, n / (prof.m * n - prof.alpha));

  GoodLambdaResult res;
  Index qext{1, 1, 1};
  for (int j = 0; j < n; ++j) qext[j] = per_axis;
  for (double lam : params.lambdas) {
    // Cube statistic.
    Index qi{0, 0, 0};
    while (true) {
      GridRectangle cube{n, {0, 0, 0}, {1, 1, 1}};
      Index lo4{0, 0, 0}, hi4{1, 1, 1};
      for (int j = 0; j < n; ++j) {
        cube.lo[j] = qi[j] * side;
        cube.hi[j] = cube.lo[j] + side;
        lo4[j] = std::max(0, cube.lo[j] - (3 * side) / 2);
        hi4[j] = std::min(s.cells(j), cube.hi[j] + (3 * side + 1) / 2);
      }
      bool premise = false;
      std::size_t in_e = 0;
      for (std::size_t k = 0; k < I.size(); ++k) {
        const Index c = s.unravel(k);
        bool in4 = true, inq = true;
        for (int j = 0; j < n; ++j) {
          in4 = in4 && c[j] >= lo4[j] && c[j] < hi4[j];
          inq = inq && c[j] >= cube.lo[j] && c[j] < cube.hi[j];
        }
        if (in4 && I[k] <= lam) premise = true;
        if (inq && I[k] >= lam * params.b && M[k] <= lam * params.d) ++in_e;
      }
      if (premise) {
        ++res.cubes_used;
        const double qvol = std::pow(side, n) * cellvol;
        const double ratio = in_e * cellvol / (qvol * scale);
        if (ratio > res.k_emp) {
          res.k_emp = ratio;
          res.k_lambda = lam;
          res.k_cube = cube;
        }
      }
      int j = n - 1;
      while (j >= 0 && ++qi[j] == qext[j]) qi[j--] = 0;
      if (j < 0) break;
    }
    // w({I > b lambda}) <= w({M > d lambda}) + b^{-q}/2 w({I > lambda})
    long double lhs = 0.0L, big_m = 0.0L, big_i = 0.0L;
    for (std::size_t k = 0; k < I.size(); ++k) {
      const long double w = omega[k] * cellvol;
      if (I[k] > lam * params.b) lhs += w;
      if (M[k] > lam * params.d) big_m += w;
      if (I[k] > lam) big_i += w;
    }
    const double rhs = static_cast<double>(big_m + 0.5L * std::pow(params.b, -q) * big_i);
    res.lhs.push_back(static_cast<double>(lhs));
    res.rhs.push_back(rhs);
    res.margins.push_back(rhs - static_cast<double>(lhs));
  }
  return res;
}

double a_infinity_delta(const GridFunction& omega, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!omega.all_finite() || !omega.all_nonnegative()) {
    throw std::domain_error("omega must be finite and nonnegative");
  }
  const GridShape& s = omega.shape();
  require_equal_cubes(s, 0);
  const int n = s.dims;
  double delta = 1.0;
  std::vector<double> vals;
  for (int l = 0; l <= s.levels[0]; ++l) {
    const int side = s.cells(0) >> l;
    const int per = 1 << l;
    Index qi{0, 0, 0};
    while (true) {
      vals.clear();
      Index lo{0, 0, 0}, ext{1, 1, 1};
      for (int j = 0; j < n; ++j) {
        lo[j] = qi[j] * side;
        ext[j] = side;
      }
      Index c{0, 0, 0};
      while (true) {
        Index cell = lo;
        for (int j = 0; j < n; ++j) cell[j] += c[j];
        vals.push_back(omega.at(cell));
        int j = n - 1;
        while (j >= 0 && ++c[j] == ext[j]) c[j--] = 0;
        if (j < 0) break;
      }
      std::sort(vals.begin(), vals.end(), std::greater<>());
      long double total = 0.0L;
      for (double v : vals) total += v;
      if (total > 0.0L) {
        // Smallest count c whose heaviest c cells reach eps * omega(Q).
        long double acc = 0.0L;
        std::size_t count = 0;
        while (count < vals.size() && acc < eps * total) acc += vals[count++];
        delta = std::min(delta, static_cast<double>(count) / vals.size());
      }
      int j = n - 1;
      while (j >= 0 && ++qi[j] == per) qi[j--] = 0;
      if (j < 0) break;
    }
  }
  return delta;
}

Recipe good_lambda_recipe(const GridFunction& I, const GridFunction& M,
                          const ExponentProfile& prof, const GridFunction& omega, double q,
                          const std::vector<double>& lambdas, int partition_level, double B) {
  Recipe r;
  const int n = prof.n;
  const double mn = prof.m * n;
  r.B = B;
  r.b = std::max(1.0, B);
  r.eps = 0.5 * std::pow(r.b, -q);
  r.delta = a_infinity_delta(omega, r.eps);
  r.L = std::pow(4.0, n);
  r.d56 = std::pow(r.L / std::pow(prof.m, n), prof.alpha / n - prof.m);
  GoodLambdaParams probe{r.b, r.d56, lambdas, partition_level};
  r.K = good_lambda_sets(I, M, prof, omega, q, probe).k_emp;
  r.D = r.K > 0.0 ? r.b * std::pow(r.delta / (r.K * r.L), (mn - prof.alpha) / n)
                  : std::numeric_limits<double>::infinity();
  r.d = std::min(r.D, r.d56);
  return r;
}

VerificationReport good_lambda_check(std::span<const GridFunction> fs, const ExponentProfile& prof,
                                     const GridFunction& omega, double q,
                                     const GoodLambdaParams& params) {
  if (params.lambdas.empty()) throw std::invalid_argument("good-lambda check needs lambdas");
  const GridFunction I = fractional_integral(fs, prof);
  const GridFunction M = maximal::cube_maximal(fs, prof);
  const GoodLambdaResult res = good_lambda_sets(I, M, prof, omega, q, params);
  VerificationReport rep;
  rep.check = "goodlambda";
  double worst = std::numeric_limits<double>::infinity();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < res.margins.size(); ++i) {
    worst = std::min(worst, res.margins[i]);
    if (res.margins[i] < -1e-12 * std::max(1.0, res.rhs[i])) ++bad;
  }
  auto& f = rep.expect("good-lambda inequality holds at every lambda", bad == 0,
                       bad ? std::to_string(bad) + " lambdas violate" : std::string{});
  f.data["lambdas"] = params.lambdas;
  f.data["margins"] = res.margins;
  f.data["min_margin"] = worst;
  auto& k = rep.add("empirical K", Status::evidence);
  k.data["K"] = res.k_emp;
  k.data["cubes_used"] = res.cubes_used;
  k.data["b"] = params.b;
  k.data["d"] = params.d;
  rep.add_constant(ConstantEntry{"K_emp", res.k_emp,
                                 res.k_cube.to_string() + " at lambda " + std::to_string(res.k_lambda),
                                 "dyadic cubes", params.partition_level});
  return rep;
}

Ratios comparison_ratios(const GridFunction& I, const GridFunction& M, const GridFunction& omega,
                         double q) {
  Ratios r;
  const double si = maximal::weighted_lq_power(I, omega, q);
  const double sm = maximal::weighted_lq_power(M, omega, q);
  const double wi = std::pow(maximal::weak_norm_estimate(I, omega, q), q);
  const double wm = std::pow(maximal::weak_norm_estimate(M, omega, q), q);
  const double inf = std::numeric_limits<double>::infinity();
  r.strong = si == 0.0 ? 0.0 : (sm == 0.0 ? inf : si / sm);
  r.weak = wi == 0.0 ? 0.0 : (wm == 0.0 ? inf : wi / wm);
  return r;
}

Ratios comparison_ratios(std::span<const GridFunction> fs, const ExponentProfile& prof,
                         const GridFunction& omega, double q) {
  return comparison_ratios(fractional_integral(fs, prof), maximal::cube_maximal(fs, prof), omega, q);
}

GridShape symmetric_box(int n, int L) {
  GridShape s = GridShape::unit(n, L);
  for (int j = 0; j < n; ++j) {
    s.origin[j] = -1.0;
    s.side[j] = 2.0;
  }
  return s;
}

GridFunction remark53_function(const GridShape& shape, double alpha) {
  return GridFunction::from_centers(shape, [&](const Point& x) {
    double r2 = 0.0;
    for (int j = 0; j < shape.dims; ++j) {
      if (x[j] > 0.0) return 0.0;
      r2 += x[j] * x[j];
    }
    return std::pow(std::sqrt(r2), -alpha);
  });
}

VerificationReport remark53_experiment(double alpha, int L, int n, int extra) {
  if (!(alpha > 0.0 && alpha < n)) throw std::invalid_argument("remark 5.3 needs 0 < alpha < n");
  if (L < 1 || extra < 0) throw std::invalid_argument("remark 5.3 needs L >= 1");
  VerificationReport rep;
  rep.check = "remark53";
  const auto prof = ExponentProfile::for_operator(1, n, alpha);
  std::vector<double> near, far;
  bool all_zero = true;
  for (int l = L; l <= L + extra; ++l) {
    const GridShape s = symmetric_box(n, l);
    const std::vector<GridFunction> f{remark53_function(s, alpha)};
    const GridFunction md = maximal::cube_maximal_dyadic(f, prof, 1);
    const int half = s.cells(0) / 2;
    std::size_t nonzero = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < md.size(); ++k) {
      const Index c = s.unravel(k);
      bool in_q1 = true;
      for (int j = 0; j < n; ++j) in_q1 = in_q1 && c[j] >= half;
      if (in_q1 && md[k] != 0.0) {
        ++nonzero;
        worst = std::max(worst, md[k]);
      }
    }
    all_zero = all_zero && nonzero == 0;
    auto& fz = rep.expect("dyadic maximal is 0 on Q_1 at L=" + std::to_string(l), nonzero == 0);
    fz.data["nonzero_cells"] = nonzero;
    fz.data["max_value"] = worst;

    Index at0{0, 0, 0}, corner{0, 0, 0};
    for (int j = 0; j < n; ++j) {
      at0[j] = half;
      corner[j] = s.cells(j) - 1;
    }
    near.push_back(fractional_integral_at(f, prof, at0));
    far.push_back(fractional_integral_at(f, prof, corner));
  }
  bool increasing = true;
  for (std::size_t i = 1; i < near.size(); ++i) increasing = increasing && near[i] > near[i - 1];
  auto& fi = rep.expect("I_alpha f at the cell touching 0 increases with L", increasing);
  fi.data["values"] = near;
  const double lambda = far.back();
  rep.expect("lambda = I_alpha f at the far corner is finite and positive",
             std::isfinite(lambda) && lambda > 0.0)
      .data["lambda"] = lambda;
  // With M^d = 0 on Q_1, the set {I > b lambda, M^d <= d lambda} in Q_1 is
  // {I > b lambda}; at the finest level it stays nonempty for b up to I(0)/lambda.
  auto& ev = rep.add("dyadic good-lambda set stays nonempty", Status::evidence);
  ev.data["max_b_with_nonempty_set"] = near.back() / lambda;
  rep.add_constant(ConstantEntry{"lambda", lambda, "far corner cell", "cubes", L + extra});
  rep.add_constant(ConstantEntry{"I_alpha f near 0", near.back(), "cell at 0", "cubes", L + extra});
  return rep;
}

}  // namespace msmax::fracint
