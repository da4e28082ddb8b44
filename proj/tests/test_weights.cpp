#include <doctest.h>

#include <cmath>
#include <random>

#include "msmax/maximal.hpp"
#include "msmax/weights.hpp"
#include "oracle.hpp"

using namespace msmax;
namespace wt = msmax::weights;

namespace {

double direct_avg(const GridFunction& f, const GridRectangle& r) {
  return oracle::direct_integral(f, r.lo, r.hi) / oracle::direct_measure(f.shape(), r.lo, r.hi);
}

GridFunction positive_random(const GridShape& s, std::mt19937_64& rng) {
  return oracle::random_function(s, rng, 0.2, 5.0);
}

}  // namespace

TEST_CASE("constant weights give constant 1") {
  const GridShape s = GridShape::unit(2, 2);
  const auto prof = ExponentProfile::one_weight_profile(2, 0.5, {4.0, 4.0});
  const auto w = wt::WeightVector::make({GridFunction(s, 1.0), GridFunction(s, 1.0)}, prof);
  for (auto fam : {RectFamily::all, RectFamily::dyadic}) {
    CHECK(wt::a_pq_rect_constant(w, prof, fam).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wt::multilinear_ap_constant(w, prof, fam).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wt::two_weight_constant(w, GridFunction(s, 1.0), prof, fam).value ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wt::a_p_rect_constant(GridFunction(s, 1.0), 3.0, fam).value ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("two-weight constant at p_i = 4, alpha = 1/4, q = 4 with unit weights") {
  const GridShape s = GridShape::unit(1, 4);
  const auto prof = ExponentProfile::make(1, 0.25, {4.0, 4.0}, 4.0);
  const auto w = wt::WeightVector::make({GridFunction(s, 1.0), GridFunction(s, 1.0)}, prof);
  CHECK(wt::two_weight_constant(w, GridFunction(s, 1.0), prof, RectFamily::all).value ==
        doctest::Approx(1.0).epsilon(1e-14));
  const auto bad = ExponentProfile::make(1, 0.25, {4.0, 4.0}, 2.0);
  CHECK_THROWS_AS(wt::two_weight_constant(w, GridFunction(s, 1.0), bad, RectFamily::all),
                  std::invalid_argument);
}

TEST_CASE("A_p of (1,3) at p = 2 is 4/3") {
  const GridShape s = GridShape::unit(1, 1);
  const GridFunction w(s, std::vector<double>{1.0, 3.0});
  const auto c = wt::a_p_rect_constant(w, 2.0, RectFamily::dyadic);
  CHECK(c.value == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(c.witness == GridRectangle{1, {0, 0, 0}, {2, 1, 1}});
  CHECK(wt::a_p_rect_constant(w * 7.0, 2.0, RectFamily::dyadic).value ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(wt::a_p_rect_constant(w, 1.0, RectFamily::dyadic), std::invalid_argument);
  CHECK_THROWS_AS(wt::a_p_rect_constant(GridFunction(s, std::vector<double>{1.0, 0.0}), 2.0,
                                        RectFamily::dyadic),
                  std::domain_error);
}

TEST_CASE("m = 1: A_(p,q) agrees with a single-weight formula coded from scratch") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 2;
    const GridShape s = GridShape::unit(n, n == 1 ? 4 : 2);
    const double p = 1.5 + 0.25 * trial;
    const double alpha = 0.1 * n;
    const auto prof = ExponentProfile::one_weight_profile(n, alpha, {p});
    const GridFunction om = positive_random(s, rng);
    const auto w = wt::WeightVector::make({om}, prof);
    const double pc = p / (p - 1.0);
    double best = 0.0;
    for (const auto& r : enumerate_rectangles(s)) {
      const double a = std::pow(direct_avg(om.map([&](double v) { return std::pow(v, prof.q); }), r),
                                1.0 / prof.q);
      const double b =
          std::pow(direct_avg(om.map([&](double v) { return std::pow(v, -pc); }), r), 1.0 / pc);
      best = std::max(best, a * b);
    }
    CHECK(oracle::rel_err(wt::a_pq_rect_constant(w, prof, RectFamily::all).value, best) <= 1e-12);
  }
}

TEST_CASE("two-weight constant equals brute-force maximum") {
  std::mt19937_64 rng(21);
  const GridShape s = GridShape::unit(2, 2);
  const auto prof = ExponentProfile::make(2, 0.7, {3.0, 2.5}, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto w = wt::WeightVector::make({positive_random(s, rng), positive_random(s, rng)}, prof);
    const GridFunction nu = oracle::random_function(s, rng, 0.0, 2.0);
    double best = 0.0;
    for (const auto& r : enumerate_rectangles(s)) {
      const double vol = oracle::direct_measure(s, r.lo, r.hi);
      double v = std::pow(vol, prof.alpha / 2 + 1 / prof.q - 1 / prof.p) *
                 std::pow(direct_avg(nu, r), 1 / prof.q);
      for (int i = 0; i < 2; ++i) {
        const double pc = prof.conjugate(i);
        v *= std::pow(direct_avg(w.omega[i].map([&](double x) { return std::pow(x, 1 - pc); }), r),
                      1 / pc);
      }
      best = std::max(best, v);
    }
    const auto c = wt::two_weight_constant(w, nu, prof, RectFamily::all);
    CHECK(oracle::rel_err(c.value, best) <= 1e-12);
    CHECK(wt::two_weight_expression(w, nu, prof, c.witness) == c.value);
  }
}

TEST_CASE("family inclusion, Hoelder lower bound, and scale invariance") {
  std::mt19937_64 rng(3);
  const GridShape s = GridShape::unit(2, 3);
  const auto prof = ExponentProfile::one_weight_profile(2, 0.4, {3.0, 5.0});
  for (int trial = 0; trial < 4; ++trial) {
    const GridFunction a = positive_random(s, rng);
    const GridFunction b = positive_random(s, rng);
    const auto w = wt::WeightVector::make({a, b}, prof);
    const auto all = wt::a_pq_rect_constant(w, prof, RectFamily::all);
    const auto dy = wt::a_pq_rect_constant(w, prof, RectFamily::dyadic);
    CHECK(dy.value <= all.value);
    CHECK(wt::multilinear_ap_constant(w, prof, RectFamily::dyadic).value <=
          wt::multilinear_ap_constant(w, prof, RectFamily::all).value);
    CHECK(wt::multilinear_ap_constant(w, prof, RectFamily::all).value >= 1.0 - 1e-12);
    const auto ap = wt::a_p_rect_constant(a, 2.5, RectFamily::all);
    CHECK(ap.value >= 1.0 - 1e-12);
    CHECK(wt::a_p_rect_constant(a, 2.5, RectFamily::dyadic).value <= ap.value);
    CHECK(wt::a_p_rect_constant(a * 2.0, 2.5, RectFamily::all).value == doctest::Approx(ap.value).epsilon(1e-13));
    // omega_i -> c_i omega_i: the nu^q and omega^{-p'} factors cancel.
    const auto scaled = wt::WeightVector::make({a * 4.0, b * 0.5}, prof);
    CHECK(wt::a_pq_rect_constant(scaled, prof, RectFamily::all).value ==
          doctest::Approx(all.value).epsilon(1e-13));
    CHECK(wt::a_pq_expression(w, prof, all.witness) == all.value);
    CHECK(wt::a_p_expression(a, 2.5, ap.witness) == ap.value);
  }
}

TEST_CASE("multilinear A_p with m = 1 is the A_p constant") {
  std::mt19937_64 rng(44);
  const GridShape s = GridShape::unit(1, 5);
  const GridFunction a = positive_random(s, rng);
  const auto prof = ExponentProfile::make(1, 0.0, {3.0}, 1.0);
  const auto w = wt::WeightVector::make({a}, prof);
  CHECK(oracle::rel_err(wt::multilinear_ap_constant(w, prof, RectFamily::all).value,
                        wt::a_p_rect_constant(a, 3.0, RectFamily::all).value) <= 1e-12);
}

TEST_CASE("weight vector products") {
  std::mt19937_64 rng(9);
  const GridShape s = GridShape::unit(1, 3);
  const auto prof = ExponentProfile::make(1, 0.0, {2.0, 3.0}, 1.0);
  const GridFunction a = positive_random(s, rng), b = positive_random(s, rng);
  const auto w = wt::WeightVector::make({a, b}, prof);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(oracle::rel_err(w.nu_prod[k], a[k] * b[k]) <= 1e-12);
    CHECK(oracle::rel_err(w.nu_glpt[k],
                          std::pow(a[k], prof.p / 2.0) * std::pow(b[k], prof.p / 3.0)) <= 1e-12);
  }
  CHECK_THROWS_AS(wt::WeightVector::make({a, GridFunction(s, 0.0)}, prof), std::domain_error);
}

TEST_CASE("reverse doubling") {
  CHECK(wt::reverse_doubling_constant(GridFunction(GridShape::unit(1, 4), 1.0)) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(wt::reverse_doubling_constant(GridFunction(GridShape::unit(2, 3), 1.0)) ==
        doctest::Approx(4.0).epsilon(1e-14));
  const GridFunction w(GridShape::unit(1, 1), std::vector<double>{1.0, 3.0});
  CHECK(wt::reverse_doubling_constant(w) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    CHECK(wt::reverse_doubling_constant(positive_random(GridShape::unit(2, 3), rng)) > 1.0);
  }
  // A massless child is skipped.
  const GridFunction z(GridShape::unit(1, 1), std::vector<double>{0.0, 3.0});
  CHECK(wt::reverse_doubling_constant(z) == doctest::Approx(1.0));
  CHECK(std::isinf(wt::reverse_doubling_constant(GridFunction(GridShape::unit(1, 0), 1.0))));
}

TEST_CASE("derived exponents and the r_i hypothesis") {
  const auto prof = ExponentProfile::one_weight_profile(1, 0.25, {4.0, 4.0});
  CHECK(prof.q == doctest::Approx(4.0).epsilon(1e-14));
  const auto d = wt::derived_exponents(prof);
  CHECK(d.r == doctest::Approx(7.0).epsilon(1e-14));
  REQUIRE(d.r_i.size() == 2);
  CHECK(d.r_i[0] == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
  CHECK(d.r_i[1] == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
  CHECK(wt::r_i_hypothesis(prof));
  // m = 1: r = 1 + q/p'.
  const auto one = ExponentProfile::one_weight_profile(1, 0.2, {2.5});
  CHECK(wt::derived_exponents(one).r ==
        doctest::Approx(1.0 + one.q / conjugate_exponent(2.5)).epsilon(1e-14));
}

TEST_CASE("reverse doubling prediction") {
  CHECK(wt::rd_prediction(1.0, 2.0, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(wt::rd_prediction(1e8, 2.0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wt::rd_prediction(1e3, 2.0, 1) > 1.0);
  CHECK(wt::rd_prediction(1e3, 2.0, 1) < wt::rd_prediction(10.0, 2.0, 1));
  CHECK_THROWS_AS(wt::rd_prediction(0.5, 2.0, 1), std::invalid_argument);
  const GridFunction one(GridShape::unit(1, 5), 1.0);
  CHECK(wt::reverse_doubling_constant(one.pow(-1.0)) >= wt::rd_prediction(1.0, 2.0, 1));
}

TEST_CASE("reverse doubling of omega^{1-p'} dominates the prediction") {
  for (int seed = 0; seed < 8; ++seed) {
    for (int n = 1; n <= 2; ++n) {
      const GridShape s = GridShape::unit(n, n == 1 ? 6 : 3);
      const GridFunction om = wt::dyadic_martingale_weight(s, seed, 6, 0.6, 0.8);
      for (double p : {1.5, 2.0, 4.0}) {
        const double K = wt::ap_K(wt::a_p_rect_constant(om, p, RectFamily::dyadic).value, p);
        const double rd = wt::reverse_doubling_constant(om.pow(1.0 - conjugate_exponent(p)));
        CHECK(rd >= wt::rd_prediction(K, p, n) - 1e-9);
      }
      CHECK(wt::reverse_doubling_constant(om) > 1.0);
    }
  }
}

TEST_CASE("generators") {
  const GridShape s = GridShape::unit(2, 3);
  const auto flat = wt::power_weight(s, 0.0, Point{0, 0, 0});
  for (double v : flat.values()) CHECK(v == 1.0);
  const auto still = wt::dyadic_martingale_weight(s, 3, 4, 0.0, 0.5);
  for (double v : still.values()) CHECK(v == 1.0);

  const GridShape s1 = GridShape::unit(1, 2);
  const auto pw = wt::power_weight(s1, 0.5, Point{0, 0, 0});
  CHECK(pw[0] == doctest::Approx(std::sqrt(0.125)));
  CHECK(pw[3] == doctest::Approx(std::sqrt(0.875)));

  // Same cube signs at every resolution: coarse cell masses agree.
  const auto coarse = wt::dyadic_martingale_weight(GridShape::unit(1, 3), 7, 3, 0.3, 0.7);
  const auto fine = wt::dyadic_martingale_weight(GridShape::unit(1, 5), 7, 3, 0.3, 0.7);
  for (int k = 0; k < 8; ++k) CHECK(fine[4 * k] == coarse[k]);
  CHECK(wt::dyadic_martingale_weight(s, 7, 5, 0.3, 0.7).values()[5] ==
        wt::dyadic_martingale_weight(s, 7, 5, 0.3, 0.7).values()[5]);
  CHECK_THROWS_AS(wt::dyadic_martingale_weight(s, 1, 3, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("power weight a = 1/2 has a stable A_2 constant") {
  std::vector<double> vals;
  for (int L = 4; L <= 6; ++L) {
    const auto w = wt::power_weight(GridShape::unit(1, L), 0.5, Point{0, 0, 0});
    vals.push_back(wt::a_p_rect_constant(w, 2.0, RectFamily::all).value);
  }
  for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] / vals[i - 1] <= 1.5);
}

TEST_CASE("weight spec language") {
  const GridShape s = GridShape::unit(2, 2);
  auto c = wt::WeightSpec::parse("const:c=2.5");
  CHECK(c.sample(s)[3] == 2.5);
  auto p = wt::WeightSpec::parse("power:a=0.5,anchor=0.5/0.25");
  CHECK(p.sample(s).all_positive());
  auto m = wt::WeightSpec::parse("martingale:seed=7,depth=5,amp=0.3,decay=0.7");
  CHECK(m.to_string() == "martingale:amp=0.3,decay=0.7,depth=5,seed=7");
  CHECK(wt::WeightSpec::parse(m.to_string()).sample(s).values()[1] == m.sample(s).values()[1]);
  CHECK(wt::WeightSpec::parse("const").sample(s)[0] == 1.0);
  CHECK_THROWS_AS(wt::WeightSpec::parse("gauss:s=1"), std::invalid_argument);
  CHECK_THROWS_AS(wt::WeightSpec::parse("power:b=1"), std::invalid_argument);
  CHECK_THROWS_AS(wt::WeightSpec::parse("power:a=x"), std::invalid_argument);
  CHECK_THROWS_AS(wt::WeightSpec::parse("const:c=-1").sample(s), std::invalid_argument);
}

TEST_CASE("characterize") {
  const auto prof = ExponentProfile::one_weight_profile(1, 0.25, {4.0, 4.0});
  const GridShape base = GridShape::unit(1, 3);
  auto ones = [](const GridShape& s) {
    return std::vector<GridFunction>{GridFunction(s, 1.0), GridFunction(s, 1.0)};
  };
  const auto rep = wt::characterize(ones, prof, RectFamily::all, base);
  CHECK(rep.passed());
  CHECK(rep.constants.size() == 7);
  for (const auto& c : rep.constants) CHECK(c.value == doctest::Approx(1.0).epsilon(1e-12));

  const auto gen = wt::factory({wt::WeightSpec::parse("martingale:seed=3,depth=3,amp=0.4,decay=0.8"),
                                wt::WeightSpec::parse("power:a=0.2,anchor=0")});
  const auto rep2 = wt::characterize(gen, prof, RectFamily::all, base);
  CHECK(rep2.passed());
  for (const auto& f : rep2.findings) {
    if (f.name.rfind("sweep:", 0) == 0) CHECK(f.data["stable"].get<bool>());
  }
}

TEST_CASE("refinement sweep") {
  auto row = wt::refinement_sweep("ap", GridShape::unit(1, 4), 2, 1.5, [](const GridShape& s) {
    return wt::a_p_rect_constant(wt::power_weight(s, 0.5, Point{0, 0, 0}), 2.0, RectFamily::all)
        .value;
  });
  CHECK(row.values.size() == 3);
  CHECK(row.stable);
  auto growing = wt::refinement_sweep("grow", GridShape::unit(1, 2), 2, 1.5,
                                      [](const GridShape& s) { return std::ldexp(1.0, s.levels[0]); });
  CHECK_FALSE(growing.stable);
  CHECK(growing.worst_ratio == 2.0);
}
