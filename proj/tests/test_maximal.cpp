#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "msmax/maximal.hpp"
#include "oracle.hpp"

using namespace msmax;
namespace mx = msmax::maximal;

namespace {

std::vector<GridFunction> random_tuple(const GridShape& s, int m, std::mt19937_64& rng, int trial) {
  std::vector<GridFunction> fs;
  for (int i = 0; i < m; ++i) {
    fs.push_back(trial % 2 == 0 ? oracle::random_function(s, rng, 0.0, 3.0)
                                : oracle::random_sparse(s, rng));
  }
  return fs;
}

void check_close(const GridFunction& a, const GridFunction& b, double tol) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, oracle::rel_err(a[k], b[k]));
  CHECK(worst <= tol);
}

void check_le(const GridFunction& lo, const GridFunction& hi, double slack = 1e-12) {
  for (std::size_t k = 0; k < lo.size(); ++k) CHECK(lo[k] <= hi[k] * (1.0 + slack));
}

}  // namespace

TEST_CASE("dyadic strong maximal: hand-enumerated examples") {
  const GridShape s = GridShape::unit(1, 1);
  std::vector<GridFunction> f{GridFunction(s, std::vector<double>{2.0, 0.0})};
  auto out = mx::strong_maximal_dyadic(f, ExponentProfile::for_operator(1, 1, 0.5));
  CHECK(out[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));

  std::vector<GridFunction> pair{GridFunction(s, std::vector<double>{2.0, 0.0}),
                                 GridFunction(s, std::vector<double>{0.0, 2.0})};
  auto two = mx::strong_maximal_dyadic(pair, ExponentProfile::for_operator(2, 1, 1.0));
  CHECK(two[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("all operators send f = 1 to 1") {
  for (int n = 1; n <= 2; ++n) {
    for (int m = 1; m <= 2; ++m) {
      const GridShape s = GridShape::unit(n, 3);
      std::vector<GridFunction> ones(m, GridFunction(s, 1.0));
      for (double alpha : {0.3, 0.5 * m * n, 0.9 * m * n}) {
        const auto prof = ExponentProfile::for_operator(m, n, alpha);
        for (const auto& g : {mx::strong_maximal_dyadic(ones, prof), mx::strong_maximal(ones, prof),
                              mx::cube_maximal(ones, prof), mx::cube_maximal_dyadic(ones, prof),
                              mx::strong_maximal_truncated(ones, prof, 0)}) {
          for (double v : g.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
        }
      }
    }
  }
}

TEST_CASE("strong maximal at L=1 for f=(2,0)") {
  const GridShape s = GridShape::unit(1, 1);
  std::vector<GridFunction> f{GridFunction(s, std::vector<double>{2.0, 0.0})};
  auto out = mx::strong_maximal(f, ExponentProfile::for_operator(1, 1, 0.5));
  CHECK(out[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("truncated operator at 2^k = 1/2, L=2") {
  const GridShape s = GridShape::unit(1, 2);
  std::vector<GridFunction> f{GridFunction(s, std::vector<double>{2.0, 2.0, 0.0, 0.0})};
  const auto prof = ExponentProfile::for_operator(1, 1, 0.5);
  auto out = mx::strong_maximal_truncated(f, prof, -1);
  auto ref = oracle::brute_maximal(f, 0.5, oracle::Family::all, [](const std::vector<double>& sd) {
    return sd[0] <= 0.5 + 1e-12;
  });
  check_close(out, ref, 1e-12);
  // [1/4, 3/4) reaches the third cell: |R|^{-1/2} * 1/2.
  CHECK(out[2] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  CHECK(out[3] == 0.0);
  // The full interval is excluded.
  CHECK(out[0] == doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("operators match nested-loop evaluation on small grids") {
  std::mt19937_64 rng(2024);
  int trials = 0;
  for (int n = 1; n <= 2; ++n) {
    const int L = n == 1 ? 3 : 2;
    const GridShape s = GridShape::unit(n, L);
    for (int trial = 0; trial < 20; ++trial) {
      const int m = 1 + trial % 2;
      const double alpha = (trial % 4 < 2 ? 0.25 : 0.6) * m * n;
      const auto prof = ExponentProfile::for_operator(m, n, alpha);
      const auto fs = random_tuple(s, m, rng, trial);
      check_close(mx::strong_maximal(fs, prof),
                  oracle::brute_maximal(fs, alpha, oracle::Family::all, oracle::any_rect), 1e-12);
      check_close(mx::strong_maximal_dyadic(fs, prof),
                  oracle::brute_maximal(fs, alpha, oracle::Family::dyadic, oracle::any_rect), 1e-12);
      check_close(mx::cube_maximal(fs, prof),
                  oracle::brute_maximal(fs, alpha, oracle::Family::all, oracle::is_cube), 1e-12);
      check_close(mx::cube_maximal_dyadic(fs, prof),
                  oracle::brute_maximal(fs, alpha, oracle::Family::dyadic, oracle::is_cube), 1e-12);
      check_close(mx::cube_maximal_dyadic(fs, prof, 1),
                  oracle::brute_maximal(fs, alpha, oracle::Family::dyadic, oracle::is_cube, 1), 1e-12);
      for (int k = -L; k <= 0; ++k) {
        const double cap = std::ldexp(1.0, k) * (1.0 + 1e-12);
        check_close(mx::strong_maximal_truncated(fs, prof, k),
                    oracle::brute_maximal(fs, alpha, oracle::Family::all,
                                          [cap](const std::vector<double>& sd) {
                                            for (double v : sd)
                                              if (v > cap) return false;
                                            return true;
                                          }),
                    1e-12);
      }
      ++trials;
    }
  }
  CHECK(trials == 40);
}

TEST_CASE("unequal levels per axis") {
  std::mt19937_64 rng(5);
  const std::array<int, 2> lv{1, 3};
  const GridShape s = GridShape::unit(lv);
  const auto prof = ExponentProfile::for_operator(1, 2, 0.7);
  std::vector<GridFunction> fs{oracle::random_function(s, rng)};
  check_close(mx::strong_maximal(fs, prof),
              oracle::brute_maximal(fs, 0.7, oracle::Family::all, oracle::any_rect), 1e-12);
  check_close(mx::strong_maximal_dyadic(fs, prof),
              oracle::brute_maximal(fs, 0.7, oracle::Family::dyadic, oracle::any_rect), 1e-12);
  check_close(mx::cube_maximal(fs, prof),
              oracle::brute_maximal(fs, 0.7, oracle::Family::all, oracle::is_cube), 1e-12);
  check_close(mx::cube_maximal_dyadic(fs, prof),
              oracle::brute_maximal(fs, 0.7, oracle::Family::dyadic, oracle::is_cube), 1e-12);
}

TEST_CASE("pointwise ordering between families") {
  std::mt19937_64 rng(99);
  const std::array<int, 2> lv{3, 3};
  const GridShape s = GridShape::unit(lv);
  for (int trial = 0; trial < 4; ++trial) {
    const int m = 1 + trial % 2;
    const auto prof = ExponentProfile::for_operator(m, 2, 0.5 * m);
    const auto fs = random_tuple(s, m, rng, trial);
    const auto strong = mx::strong_maximal(fs, prof);
    check_le(mx::strong_maximal_dyadic(fs, prof), strong);
    check_le(mx::cube_maximal(fs, prof), strong);
    check_le(mx::cube_maximal_dyadic(fs, prof), mx::strong_maximal_dyadic(fs, prof));
    GridFunction prev = mx::strong_maximal_truncated(fs, prof, -3);
    for (int k = -2; k <= 1; ++k) {
      GridFunction next = mx::strong_maximal_truncated(fs, prof, k);
      check_le(prev, next, 0.0);
      prev = next;
    }
    check_close(prev, strong, 0.0);
    for (double v : strong.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("n = 1: cube operators coincide with the strong ones") {
  std::mt19937_64 rng(8);
  const GridShape s = GridShape::unit(1, 5);
  const auto prof = ExponentProfile::for_operator(2, 1, 0.5);
  const auto fs = random_tuple(s, 2, rng, 0);
  check_close(mx::cube_maximal(fs, prof), mx::strong_maximal(fs, prof), 0.0);
  check_close(mx::cube_maximal_dyadic(fs, prof), mx::strong_maximal_dyadic(fs, prof), 0.0);
}

TEST_CASE("homogeneity under power-of-two scaling is exact") {
  std::mt19937_64 rng(17);
  const GridShape s = GridShape::unit(2, 2);
  const auto prof = ExponentProfile::for_operator(2, 2, 1.0);
  auto fs = random_tuple(s, 2, rng, 0);
  const auto base = mx::strong_maximal(fs, prof);
  const auto base_d = mx::strong_maximal_dyadic(fs, prof);
  std::vector<GridFunction> scaled{fs[0] * 4.0, fs[1] * 0.125};
  const auto out = mx::strong_maximal(scaled, prof);
  const auto out_d = mx::strong_maximal_dyadic(scaled, prof);
  for (std::size_t k = 0; k < out.size(); ++k) {
    CHECK(out[k] == base[k] * 0.5);
    CHECK(out_d[k] == base_d[k] * 0.5);
  }
  std::vector<GridFunction> general{fs[0] * 3.0, fs[1] * 1.7};
  check_close(mx::cube_maximal(general, prof), mx::cube_maximal(fs, prof) * 5.1, 1e-14);
}

TEST_CASE("shift average with the zero shift is the dyadic operator") {
  std::mt19937_64 rng(31);
  const std::array<int, 2> lv{3, 2};
  const GridShape s = GridShape::unit(lv);
  const auto prof = ExponentProfile::for_operator(2, 2, 1.0);
  const auto fs = random_tuple(s, 2, rng, 1);
  const std::vector<Index> zero{Index{0, 0, 0}};
  check_close(mx::shift_averaged_dyadic(fs, prof, 0, zero), mx::strong_maximal_dyadic(fs, prof),
              1e-14);
  CHECK_THROWS_AS(mx::shift_averaged_dyadic(fs, prof, 0, std::vector<Index>{}),
                  std::invalid_argument);
}

TEST_CASE("shift average of f = 1 at alpha = 0 is 1") {
  const GridShape s = GridShape::unit(1, 4);
  const auto prof = ExponentProfile::for_operator(1, 1, 0.0);
  std::vector<GridFunction> ones{GridFunction(s, 1.0)};
  const auto shifts = mx::shift_lattice(s, -2);
  CHECK(shifts.size() > 1);
  const auto avg = mx::shift_averaged_dyadic(ones, prof, -2, shifts);
  for (double v : avg.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("shift lattice stays inside B_k and the grid extent") {
  const GridShape s = GridShape::unit(1, 5);
  const auto lat = mx::shift_lattice(s, -4);
  // 2^{k+2} = 1/4 of the box, i.e. 8 cells each way.
  CHECK(lat.size() == 17);
  const auto wide = mx::shift_lattice(s, 3);
  CHECK(wide.size() == 65);
}

TEST_CASE("truncated operator is dominated by the shift average") {
  std::mt19937_64 rng(77);
  int cases = 0;
  for (int n = 1; n <= 2; ++n) {
    const GridShape s = GridShape::unit(n, n == 1 ? 5 : 3);
    for (int trial = 0; trial < 8; ++trial) {
      const int m = 1 + trial % 2;
      const double alpha = (trial % 4 < 2 ? 0.25 : 0.5) * m * n;
      const auto prof = ExponentProfile::for_operator(m, n, alpha);
      const auto fs = random_tuple(s, m, rng, trial / 2);
      for (int k : {-3, -1}) {
        const auto trunc = mx::strong_maximal_truncated(fs, prof, k);
        const auto avg = mx::shift_averaged_dyadic(fs, prof, k, mx::shift_lattice(s, k));
        const double c = mx::domination_constant(prof);
        for (std::size_t i = 0; i < trunc.size(); ++i) CHECK(trunc[i] <= c * avg[i]);
        ++cases;
      }
    }
  }
  CHECK(cases == 32);
}

TEST_CASE("domination constant") {
  CHECK(mx::domination_constant(ExponentProfile::for_operator(1, 1, 0.5)) ==
        doctest::Approx(4.0 * 2.0).epsilon(1e-14));
  CHECK(mx::domination_constant(ExponentProfile::for_operator(2, 2, 1.0)) ==
        doctest::Approx(8.0 * 64.0).epsilon(1e-14));
}

TEST_CASE("mismatched grids are a shape error") {
  std::vector<GridFunction> fs{GridFunction(GridShape::unit(1, 2), 1.0),
                               GridFunction(GridShape::unit(1, 3), 1.0)};
  const auto prof = ExponentProfile::for_operator(2, 1, 0.5);
  CHECK_THROWS_AS(mx::strong_maximal(fs, prof), ShapeError);
  CHECK_THROWS_AS(mx::strong_maximal_dyadic(fs, prof), ShapeError);
}

TEST_CASE("witness replays its value") {
  std::mt19937_64 rng(4);
  const GridShape s = GridShape::unit(2, 3);
  const auto prof = ExponentProfile::for_operator(2, 2, 0.8);
  const auto fs = random_tuple(s, 2, rng, 1);
  const auto strong = mx::strong_maximal(fs, prof);
  const auto dyadic = mx::strong_maximal_dyadic(fs, prof);
  for (std::size_t k = 0; k < strong.size(); k += 5) {
    const Index cell = s.unravel(k);
    const auto w = mx::maximal_witness(fs, prof, RectFamily::all, false, cell);
    CHECK(w.rect.contains(cell));
    CHECK(oracle::rel_err(w.value, strong[k]) <= 1e-12);
    CHECK(mx::rectangle_average(fs, prof, w.rect) == w.value);
    const auto wd = mx::maximal_witness(fs, prof, RectFamily::dyadic, false, cell);
    CHECK(oracle::rel_err(wd.value, dyadic[k]) <= 1e-12);
  }
}

TEST_CASE("weak norm estimate") {
  const GridShape s1 = GridShape::unit(1, 1);
  GridFunction ones(s1, 1.0);
  CHECK(mx::weak_norm_estimate(ones, ones, 2.0) == doctest::Approx(1.0));
  GridFunction g(s1, std::vector<double>{2.0, 0.0});
  CHECK(mx::weak_norm_estimate(g, ones, 1.0) == doctest::Approx(1.0));
  CHECK(mx::weak_norm_estimate(g * 3.5, ones, 1.0) == doctest::Approx(3.5));
  CHECK_THROWS_AS(mx::weak_norm_estimate(g, ones, 0.0), std::invalid_argument);

  // Two levels: max(3 * (1/4)^{1/2}, 1 * (3/4)^{1/2}).
  const GridShape s2 = GridShape::unit(1, 2);
  GridFunction h(s2, std::vector<double>{3.0, 1.0, 1.0, 0.0});
  CHECK(mx::weak_norm_estimate(h, GridFunction(s2, 1.0), 2.0) == doctest::Approx(1.5));
  CHECK(mx::weighted_lq_power(h, GridFunction(s2, 2.0), 2.0) ==
        doctest::Approx(2.0 * (9.0 + 1.0 + 1.0) / 4.0));
}
