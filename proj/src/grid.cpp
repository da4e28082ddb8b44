#include "msmax/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msmax {

namespace {

void require_dims(int dims) {
  if (dims < 1 || dims > kMaxDims) {
    throw std::invalid_argument("grid dimension must be in [1, 3], got " + std::to_string(dims));
  }
}

// Odometer over a box of per-axis extents, last axis fastest.
template <typename Fn>
void for_each_index(int dims, const Index& extent, Fn&& fn) {
  Index idx{0, 0, 0};
  for (int j = 0; j < dims; ++j) {
    if (extent[j] <= 0) return;
  }
  while (true) {
    fn(idx);
    int j = dims - 1;
    while (j >= 0) {
      if (++idx[j] < extent[j]) break;
      idx[j] = 0;
      --j;
    }
    if (j < 0) return;
  }
}

}  // namespace

const char* to_string(RectFamily f) { return f == RectFamily::all ? "all" : "dyadic"; }

RectFamily parse_family(const std::string& s) {
  if (s == "all") return RectFamily::all;
  if (s == "dyadic") return RectFamily::dyadic;
  throw std::invalid_argument("family must be 'all' or 'dyadic', got '" + s + "'");
}

GridShape GridShape::unit(int dims, int level) {
  require_dims(dims);
  GridShape s;
  s.dims = dims;
  for (int j = 0; j < dims; ++j) s.levels[j] = level;
  return s;
}

GridShape GridShape::unit(std::span<const int> levels) {
  const int dims = static_cast<int>(levels.size());
  require_dims(dims);
  GridShape s;
  s.dims = dims;
  for (int j = 0; j < dims; ++j) s.levels[j] = levels[j];
  return s;
}

std::size_t GridShape::size() const {
  std::size_t n = 1;
  for (int j = 0; j < dims; ++j) n *= static_cast<std::size_t>(cells(j));
  return n;
}

double GridShape::width(int axis) const { return std::ldexp(side[axis], -levels[axis]); }

double GridShape::cell_volume() const {
  double v = 1.0;
  for (int j = 0; j < dims; ++j) v *= width(j);
  return v;
}

std::size_t GridShape::linear(const Index& idx) const {
  std::size_t k = 0;
  for (int j = 0; j < dims; ++j) k = k * static_cast<std::size_t>(cells(j)) + idx[j];
  return k;
}

Index GridShape::unravel(std::size_t k) const {
  Index idx{0, 0, 0};
  for (int j = dims - 1; j >= 0; --j) {
    const auto c = static_cast<std::size_t>(cells(j));
    idx[j] = static_cast<int>(k % c);
    k /= c;
  }
  return idx;
}

GridFunction::GridFunction(GridShape shape, double fill) : shape_(shape) {
  require_dims(shape_.dims);
  for (int j = 0; j < shape_.dims; ++j) {
    if (shape_.levels[j] < 0 || shape_.levels[j] > 24) {
      throw std::invalid_argument("grid level out of range");
    }
    if (!(shape_.side[j] > 0.0)) throw std::invalid_argument("grid side must be positive");
  }
  values_.assign(shape_.size(), fill);
}

GridFunction::GridFunction(GridShape shape, std::vector<double> values) : GridFunction(shape) {
  if (values.size() != values_.size()) {
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match grid size " +
                     std::to_string(values_.size()));
  }
  values_ = std::move(values);
}

GridFunction GridFunction::from_centers(const GridShape& shape,
                                        const std::function<double(const Point&)>& fn) {
  GridFunction g(shape);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Index idx = shape.unravel(k);
    Point x{0.0, 0.0, 0.0};
    for (int j = 0; j < shape.dims; ++j) x[j] = shape.center(j, idx[j]);
    g.values_[k] = fn(x);
  }
  return g;
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
  GridFunction g(shape_);
  std::transform(values_.begin(), values_.end(), g.values_.begin(), fn);
  return g;
}

GridFunction GridFunction::pow(double exponent) const {
  return map([exponent](double v) { return std::pow(v, exponent); });
}

double GridFunction::integral() const {
  long double s = 0.0L;
  for (double v : values_) s += v;
  return static_cast<double>(s * shape_.cell_volume());
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool GridFunction::all_positive() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

bool GridFunction::all_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("pointwise product of functions on different grids");
  GridFunction g(a.shape());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = a[k] * b[k];
  return g;
}

GridFunction operator*(double c, const GridFunction& a) {
  return a.map([c](double v) { return c * v; });
}

bool GridRectangle::contains(const Index& cell) const {
  for (int j = 0; j < dims; ++j) {
    if (cell[j] < lo[j] || cell[j] >= hi[j]) return false;
  }
  return true;
}

std::string GridRectangle::to_string() const {
  std::ostringstream os;
  for (int j = 0; j < dims; ++j) {
    if (j) os << 'x';
    os << '[' << lo[j] << ',' << hi[j] << ')';
  }
  return os.str();
}

GridRectangle DyadicRectangle::cells(const GridShape& shape) const {
  GridRectangle r;
  r.dims = dims;
  for (int j = 0; j < dims; ++j) {
    const int len = 1 << (shape.levels[j] - level[j]);
    r.lo[j] = index[j] * len;
    r.hi[j] = (index[j] + 1) * len;
  }
  return r;
}

std::string DyadicRectangle::to_string() const {
  std::ostringstream os;
  os << "D(";
  for (int j = 0; j < dims; ++j) {
    if (j) os << ';';
    os << level[j] << ':' << index[j];
  }
  os << ')';
  return os.str();
}

void check_bounds(const GridRectangle& r, const GridShape& shape) {
  if (r.dims != shape.dims) throw ShapeError("rectangle dimension does not match grid");
  for (int j = 0; j < r.dims; ++j) {
    if (r.lo[j] < 0 || r.lo[j] >= r.hi[j] || r.hi[j] > shape.cells(j)) {
      throw std::out_of_range("rectangle " + r.to_string() + " outside grid");
    }
  }
}

void check_bounds(const DyadicRectangle& r, const GridShape& shape) {
  if (r.dims != shape.dims) throw ShapeError("rectangle dimension does not match grid");
  for (int j = 0; j < r.dims; ++j) {
    if (r.level[j] < 0 || r.level[j] > shape.levels[j] || r.index[j] < 0 ||
        r.index[j] >= (1 << r.level[j])) {
      throw std::out_of_range("dyadic rectangle " + r.to_string() + " outside grid");
    }
  }
}

SumTable::SumTable(const GridFunction& f) : shape_(f.shape()) {
  const int n = shape_.dims;
  Index ext{1, 1, 1};
  for (int j = 0; j < n; ++j) ext[j] = shape_.cells(j) + 1;
  std::size_t total = 1;
  for (int j = n - 1; j >= 0; --j) {
    stride_[j] = static_cast<int>(total);
    total *= static_cast<std::size_t>(ext[j]);
  }
  table_.assign(total, 0.0L);
  const long double vol = shape_.cell_volume();

  // Cell masses at offset +1, then running sums along each axis.
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Index idx = shape_.unravel(k);
    std::size_t t = 0;
    for (int j = 0; j < n; ++j) t += static_cast<std::size_t>(idx[j] + 1) * stride_[j];
    table_[t] = static_cast<long double>(f[k]) * vol;
  }
  for (int axis = 0; axis < n; ++axis) {
    for_each_index(n, ext, [&](const Index& idx) {
      if (idx[axis] == 0) return;
      std::size_t t = 0;
      for (int j = 0; j < n; ++j) t += static_cast<std::size_t>(idx[j]) * stride_[j];
      table_[t] += table_[t - stride_[axis]];
    });
  }
}

long double SumTable::raw(const Index& lo, const Index& hi) const {
  const int n = shape_.dims;
  long double acc = 0.0L;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::size_t t = 0;
    int lows = 0;
    for (int j = 0; j < n; ++j) {
      if (corner & (1 << j)) {
        t += static_cast<std::size_t>(lo[j]) * stride_[j];
        ++lows;
      } else {
        t += static_cast<std::size_t>(hi[j]) * stride_[j];
      }
    }
    acc += (lows & 1) ? -table_[t] : table_[t];
  }
  return acc;
}

double SumTable::integral(const GridRectangle& r) const {
  check_bounds(r, shape_);
  return static_cast<double>(raw(r.lo, r.hi));
}

double SumTable::integral(const DyadicRectangle& r) const {
  check_bounds(r, shape_);
  const GridRectangle g = r.cells(shape_);
  return static_cast<double>(raw(g.lo, g.hi));
}

double SumTable::clipped_integral(Index lo, Index hi) const {
  for (int j = 0; j < shape_.dims; ++j) {
    lo[j] = std::max(lo[j], 0);
    hi[j] = std::min(hi[j], shape_.cells(j));
    if (lo[j] >= hi[j]) return 0.0;
  }
  return static_cast<double>(raw(lo, hi));
}

SumTable prefix_sum_table(const GridFunction& f) { return SumTable(f); }

double rect_integral(const SumTable& t, const GridRectangle& r) { return t.integral(r); }

double rect_integral(const SumTable& t, const DyadicRectangle& r) { return t.integral(r); }

std::size_t dyadic_count(const GridShape& shape) {
  std::size_t n = 1;
  for (int j = 0; j < shape.dims; ++j) n *= (std::size_t{2} << shape.levels[j]) - 1;
  return n;
}

std::size_t rectangle_count(const GridShape& shape) {
  std::size_t n = 1;
  for (int j = 0; j < shape.dims; ++j) {
    const auto c = static_cast<std::size_t>(shape.cells(j));
    n *= c * (c + 1) / 2;
  }
  return n;
}

void for_each_dyadic(const GridShape& shape, const std::function<void(const DyadicRectangle&)>& fn) {
  const int n = shape.dims;
  // Per-axis list of (level, index), coarse first.
  std::array<std::vector<std::pair<int, int>>, kMaxDims> axis;
  Index ext{1, 1, 1};
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l <= shape.levels[j]; ++l) {
      for (int k = 0; k < (1 << l); ++k) axis[j].emplace_back(l, k);
    }
    ext[j] = static_cast<int>(axis[j].size());
  }
  DyadicRectangle d;
  d.dims = n;
  for_each_index(n, ext, [&](const Index& idx) {
    for (int j = 0; j < n; ++j) {
      d.level[j] = axis[j][idx[j]].first;
      d.index[j] = axis[j][idx[j]].second;
    }
    fn(d);
  });
}

std::vector<DyadicRectangle> enumerate_dyadic(const GridShape& shape) {
  std::vector<DyadicRectangle> out;
  out.reserve(dyadic_count(shape));
  for_each_dyadic(shape, [&](const DyadicRectangle& d) { out.push_back(d); });
  return out;
}

void for_each_rectangle(const GridShape& shape, const std::function<void(const GridRectangle&)>& fn) {
  const int n = shape.dims;
  std::array<std::vector<std::pair<int, int>>, kMaxDims> axis;
  Index ext{1, 1, 1};
  for (int j = 0; j < n; ++j) {
    const int c = shape.cells(j);
    for (int a = 0; a < c; ++a) {
      for (int b = a + 1; b <= c; ++b) axis[j].emplace_back(a, b);
    }
    ext[j] = static_cast<int>(axis[j].size());
  }
  GridRectangle r;
  r.dims = n;
  for_each_index(n, ext, [&](const Index& idx) {
    for (int j = 0; j < n; ++j) {
      r.lo[j] = axis[j][idx[j]].first;
      r.hi[j] = axis[j][idx[j]].second;
    }
    fn(r);
  });
}

std::vector<GridRectangle> enumerate_rectangles(const GridShape& shape) {
  std::vector<GridRectangle> out;
  out.reserve(rectangle_count(shape));
  for_each_rectangle(shape, [&](const GridRectangle& r) { out.push_back(r); });
  return out;
}

GridFunction translate(const GridFunction& f, const Index& shift) {
  const GridShape& s = f.shape();
  for (int j = 0; j < s.dims; ++j) {
    if (std::abs(shift[j]) > s.cells(j)) throw std::invalid_argument("shift exceeds grid extent");
  }
  GridFunction g(s);
  for (std::size_t k = 0; k < f.size(); ++k) {
    Index dst = s.unravel(k);
    bool inside = true;
    for (int j = 0; j < s.dims; ++j) {
      dst[j] += shift[j];
      if (dst[j] < 0 || dst[j] >= s.cells(j)) inside = false;
    }
    if (inside) g.at(dst) = f[k];
  }
  return g;
}

GridShape refine(const GridShape& shape, int extra) {
  GridShape s = shape;
  for (int j = 0; j < s.dims; ++j) {
    s.levels[j] += extra;
    if (s.levels[j] < 0) throw ShapeError("refinement below level 0");
  }
  return s;
}

double measure(const GridRectangle& r, const GridShape& shape) {
  double v = 1.0;
  for (int j = 0; j < r.dims; ++j) v *= (r.hi[j] - r.lo[j]) * shape.width(j);
  return v;
}

double measure(const DyadicRectangle& r, const GridShape& shape) {
  double v = 1.0;
  for (int j = 0; j < r.dims; ++j) v *= std::ldexp(shape.side[j], -r.level[j]);
  return v;
}

double side_length(const GridRectangle& r, const GridShape& shape, int axis) {
  return (r.hi[axis] - r.lo[axis]) * shape.width(axis);
}

}  // namespace msmax
