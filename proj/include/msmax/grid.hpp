#pragma once

// Piecewise-constant functions on uniform dyadic grids, rectangle families
// and prefix-sum integration.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmax {

inline constexpr int kMaxDims = 3;

using Index = std::array<int, kMaxDims>;
using Point = std::array<double, kMaxDims>;

/// Which rectangles a supremum ranges over.
enum class RectFamily { all, dyadic };

const char* to_string(RectFamily f);
RectFamily parse_family(const std::string& s);

/// Mismatched grids passed to an operator that needs a shared grid.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry of a uniform grid: axis j has 2^levels[j] cells covering
/// [origin[j], origin[j] + side[j]).
struct GridShape {
  int dims = 1;
  Index levels{0, 0, 0};
  Point origin{0.0, 0.0, 0.0};
  Point side{1.0, 1.0, 1.0};

  static GridShape unit(int dims, int level);
  static GridShape unit(std::span<const int> levels);

  int cells(int axis) const { return 1 << levels[axis]; }
  std::size_t size() const;
  double width(int axis) const;
  double cell_volume() const;
  double center(int axis, int i) const { return origin[axis] + (i + 0.5) * width(axis); }

  std::size_t linear(const Index& idx) const;
  Index unravel(std::size_t k) const;

  bool operator==(const GridShape&) const = default;
};

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridShape shape, double fill = 0.0);
  GridFunction(GridShape shape, std::vector<double> values);

  /// Samples `fn` at cell centers.
  static GridFunction from_centers(const GridShape& shape,
                                   const std::function<double(const Point&)>& fn);

  const GridShape& shape() const { return shape_; }
  int dims() const { return shape_.dims; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& at(const Index& idx) { return values_[shape_.linear(idx)]; }
  double at(const Index& idx) const { return values_[shape_.linear(idx)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Pointwise transform into a new function on the same grid.
  GridFunction map(const std::function<double(double)>& fn) const;
  GridFunction pow(double exponent) const;

  double integral() const;
  bool all_finite() const;
  bool all_positive() const;
  bool all_nonnegative() const;

 private:
  GridShape shape_;
  std::vector<double> values_;
};

GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, const GridFunction& a);
inline GridFunction operator*(const GridFunction& a, double c) { return c * a; }

/// Half-open cell range [lo_j, hi_j) on each axis.
struct GridRectangle {
  int dims = 1;
  Index lo{0, 0, 0};
  Index hi{1, 1, 1};

  bool contains(const Index& cell) const;
  bool operator==(const GridRectangle&) const = default;
  std::string to_string() const;
};

/// Product of dyadic intervals: axis j covers block index[j] at level level[j].
struct DyadicRectangle {
  int dims = 1;
  Index level{0, 0, 0};
  Index index{0, 0, 0};

  GridRectangle cells(const GridShape& shape) const;
  bool operator==(const DyadicRectangle&) const = default;
  auto operator<=>(const DyadicRectangle&) const = default;
  std::string to_string() const;
};

void check_bounds(const GridRectangle& r, const GridShape& shape);
void check_bounds(const DyadicRectangle& r, const GridShape& shape);

/// Cumulative sums of cell masses (value * cell volume), accumulated in
/// long double.
class SumTable {
 public:
  SumTable() = default;
  explicit SumTable(const GridFunction& f);

  const GridShape& shape() const { return shape_; }

  /// Mass over a rectangle; bounds-checked.
  double integral(const GridRectangle& r) const;
  double integral(const DyadicRectangle& r) const;

  /// Mass over the part of [lo, hi) that lies in the grid. Empty -> 0.
  double clipped_integral(Index lo, Index hi) const;

  /// Unchecked query, hot loops only. Caller guarantees bounds.
  long double raw(const Index& lo, const Index& hi) const;

 private:
  GridShape shape_;
  Index stride_{0, 0, 0};
  std::vector<long double> table_;
};

SumTable prefix_sum_table(const GridFunction& f);
double rect_integral(const SumTable& t, const GridRectangle& r);
double rect_integral(const SumTable& t, const DyadicRectangle& r);

/// All dyadic rectangles of a grid, coarse levels first:
/// prod_j (2^{L_j+1} - 1) of them.
std::vector<DyadicRectangle> enumerate_dyadic(const GridShape& shape);
std::size_t dyadic_count(const GridShape& shape);

/// All grid-aligned rectangles: prod_j C(2^{L_j}+1, 2) of them.
std::vector<GridRectangle> enumerate_rectangles(const GridShape& shape);
std::size_t rectangle_count(const GridShape& shape);

/// Visits every grid rectangle without materializing the list.
void for_each_rectangle(const GridShape& shape,
                        const std::function<void(const GridRectangle&)>& fn);
void for_each_dyadic(const GridShape& shape,
                     const std::function<void(const DyadicRectangle&)>& fn);

/// tau_t f(x) = f(x - t) with t in whole cells; vacated cells become 0.
GridFunction translate(const GridFunction& f, const Index& shift);

/// Same box with `extra` more levels on every axis.
GridShape refine(const GridShape& shape, int extra);

double measure(const GridRectangle& r, const GridShape& shape);
double measure(const DyadicRectangle& r, const GridShape& shape);

/// Continuum side length of r along `axis`.
double side_length(const GridRectangle& r, const GridShape& shape, int axis);

}  // namespace msmax
