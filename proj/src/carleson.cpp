#include "msmax/carleson.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace msmax::carleson {

bool in_domain(const Triple& t, double p) {
  if (!(t.F >= 0.0 && t.nu > 0.0 && t.f >= 0.0)) return false;
  const double pc = conjugate_exponent(p);
  return t.f <= std::pow(t.F, 1.0 / p) * std::pow(t.nu, 1.0 / pc) * (1.0 + 1e-12);
}

Triple mean(std::span<const Triple> tuple) {
  Triple m;
  for (const auto& t : tuple) {
    m.F += t.F;
    m.f += t.f;
    m.nu += t.nu;
  }
  const double k = static_cast<double>(tuple.size());
  m.F /= k;
  m.f /= k;
  m.nu /= k;
  return m;
}

namespace {

double inner(const Triple& t, double p, double q) {
  const double pc = conjugate_exponent(p);
  const double base = t.F - std::pow(t.f, p) / (2.0 * std::pow(t.nu, p / pc));
  return std::pow(base, q / p);
}

}  // namespace

double normalized_gap(std::span<const Triple> tuple, double p, double q, int n) {
  const Triple m = mean(tuple);
  if (!(m.f > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& t : tuple) sum += inner(t, p, q);
  const double gap = inner(m, p, q) - std::pow(2.0, -n * q / p) * sum;
  const double pc = conjugate_exponent(p);
  return gap * std::pow(m.nu, q / pc) / std::pow(m.f, q);
}

namespace {

void check_b(double b, int n) {
  if (!(b > 0.0 && b < std::ldexp(1.0, n))) {
    throw std::invalid_argument("elementary inequality needs 0 < b < 2^n");
  }
}

bool admissible(std::span<const Triple> tuple, double p, double b) {
  const Triple m = mean(tuple);
  for (const auto& t : tuple) {
    if (!in_domain(t, p) || t.nu > b * m.nu) return false;
  }
  return true;
}

}  // namespace

GapResult elementary_inequality_gap(double p, double q, int n, double b,
                                    std::span<const std::vector<Triple>> samples) {
  if (!(p > 1.0 && q > 0.0)) throw std::invalid_argument("elementary inequality needs p > 1, q > 0");
  check_b(b, n);
  GapResult out;
  out.c_emp = std::numeric_limits<double>::infinity();
  const std::size_t want = std::size_t{1} << n;
  for (const auto& tuple : samples) {
    if (tuple.size() != want || !admissible(tuple, p, b)) {
      ++out.rejected;
      continue;
    }
    ++out.accepted;
    const double g = normalized_gap(tuple, p, q, n);
    if (std::isnan(g)) {
      ++out.degenerate;
      continue;
    }
    if (g < out.c_emp) {
      out.c_emp = g;
      out.witness = tuple;
    }
  }
  return out;
}

std::vector<std::vector<Triple>> sample_tuples(double p, int n, double b, std::size_t count,
                                               Rng& rng, std::size_t* rejected) {
  check_b(b, n);
  std::vector<std::vector<Triple>> out;
  if (b < 1.0) return out;
  const std::size_t k = std::size_t{1} << n;
  const double pc = conjugate_exponent(p);
  const double lo = std::log(1e-3), hi = std::log(1e3);
  std::size_t bad = 0;
  while (out.size() < count) {
    std::vector<Triple> tuple(k);
    for (auto& t : tuple) {
      t.F = std::exp(rng.uniform(lo, hi));
      t.nu = std::exp(rng.uniform(lo, hi));
      t.f = rng.uniform() * std::pow(t.F, 1.0 / p) * std::pow(t.nu, 1.0 / pc);
    }
    if (admissible(tuple, p, b)) {
      out.push_back(std::move(tuple));
    } else {
      ++bad;
    }
  }
  if (rejected) *rejected = bad;
  return out;
}

GapResult lemma31_search(double p, double q, int n, double b, std::size_t count,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::size_t rejected = 0;
  auto samples = sample_tuples(p, n, b, count, rng, &rejected);
  if (p >= q && b >= 1.0) {
    samples.push_back(std::vector<Triple>(std::size_t{1} << n, Triple{1.0, 1.0, 1.0}));
  }
  GapResult r = elementary_inequality_gap(p, q, n, b, samples);
  r.rejected += rejected;
  return r;
}

std::vector<DyadicRectangle> dyadic_descendants(const GridShape& shape, const DyadicRectangle& root) {
  check_bounds(root, shape);
  const int n = shape.dims;
  std::array<std::vector<std::pair<int, int>>, kMaxDims> axis;
  for (int j = 0; j < n; ++j) {
    for (int l = root.level[j]; l <= shape.levels[j]; ++l) {
      const int span = 1 << (l - root.level[j]);
      for (int k = root.index[j] * span; k < (root.index[j] + 1) * span; ++k) {
        axis[j].emplace_back(l, k);
      }
    }
  }
  std::vector<DyadicRectangle> out;
  Index pick{0, 0, 0};
  while (true) {
    DyadicRectangle d;
    d.dims = n;
    for (int j = 0; j < n; ++j) {
      d.level[j] = axis[j][pick[j]].first;
      d.index[j] = axis[j][pick[j]].second;
    }
    out.push_back(d);
    int j = n - 1;
    while (j >= 0 && ++pick[j] == static_cast<int>(axis[j].size())) pick[j--] = 0;
    if (j < 0) break;
  }
  return out;
}

namespace {

void check_pair(const GridFunction& omega, const GridFunction& f, double p, double q) {
  if (!(p > 1.0 && p < q)) throw std::invalid_argument("embedding needs 1 < p < q");
  if (!(omega.shape() == f.shape())) throw ShapeError("omega and f live on different grids");
  if (!omega.all_finite() || !omega.all_positive()) {
    throw std::domain_error("omega must be finite and strictly positive");
  }
  if (!f.all_finite() || !f.all_nonnegative()) throw std::domain_error("f must be nonnegative");
}

struct EmbeddingTables {
  std::vector<DyadicRectangle> rects;
  std::vector<double> coeff;  // (integral_I omega^{1-p'})^{-q/p'}, or with 1/|I|^q folded in
};

EmbeddingTables embedding_tables(const GridFunction& omega, double p, double q,
                                 const DyadicRectangle& root, EmbeddingForm form) {
  EmbeddingTables t;
  const GridShape& s = omega.shape();
  t.rects = dyadic_descendants(s, root);
  const double pc = conjugate_exponent(p);
  const SumTable sigma(omega.pow(1.0 - pc));
  for (const auto& r : t.rects) {
    double c = std::pow(sigma.integral(r), -q / pc);
    if (form == EmbeddingForm::proof) c /= std::pow(measure(r, s), q);
    t.coeff.push_back(c);
  }
  return t;
}

double ratio_with(const EmbeddingTables& t, const GridFunction& omega, const GridFunction& f,
                  double p, double q, const DyadicRectangle& root) {
  const SumTable tf(f);
  const double rhs = std::pow(SumTable(f.pow(p) * omega).integral(root), q / p);
  if (!(rhs > 0.0)) throw std::invalid_argument("embedding ratio: f vanishes on the root");
  long double lhs = 0.0L;
  for (std::size_t k = 0; k < t.rects.size(); ++k) {
    lhs += static_cast<long double>(t.coeff[k]) * std::pow(tf.integral(t.rects[k]), q);
  }
  return static_cast<double>(lhs) / rhs;
}

}  // namespace

double embedding_ratio(const GridFunction& omega, const GridFunction& f, double p, double q,
                       const DyadicRectangle& root, EmbeddingForm form) {
  check_pair(omega, f, p, q);
  return ratio_with(embedding_tables(omega, p, q, root, form), omega, f, p, q, root);
}

EmbeddingSup embedding_sup(const GridFunction& omega, double p, double q,
                           const DyadicRectangle& root, std::span<const GridFunction> corpus,
                           EmbeddingForm form) {
  EmbeddingSup best;
  const EmbeddingTables t = embedding_tables(omega, p, q, root, form);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    check_pair(omega, corpus[i], p, q);
    if (!(SumTable(corpus[i]).integral(root) > 0.0)) continue;
    const double r = ratio_with(t, omega, corpus[i], p, q, root);
    if (r > best.value) {
      best.value = r;
      best.argmax = i;
    }
  }
  return best;
}

void CarlesonSequence::set(const DyadicRectangle& r, double value) {
  check_bounds(r, shape);
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("Carleson sequence values must be finite and nonnegative");
  }
  mu[r] = value;
}

void write_sequence(std::ostream& out, const CarlesonSequence& seq) {
  const int n = seq.shape.dims;
  out.precision(17);
  for (const auto& [r, v] : seq.mu) {
    for (int j = 0; j < n; ++j) out << r.level[j] << ' ';
    for (int j = 0; j < n; ++j) out << r.index[j] << ' ';
    out << v << '\n';
  }
}

CarlesonSequence read_sequence(std::istream& in, const GridShape& shape) {
  CarlesonSequence seq;
  seq.shape = shape;
  const int n = shape.dims;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    DyadicRectangle r;
    r.dims = n;
    for (int j = 0; j < n; ++j) ls >> r.level[j];
    for (int j = 0; j < n; ++j) ls >> r.index[j];
    double v = 0.0;
    std::string rest;
    if (!(ls >> v) || (ls >> rest)) {
      throw std::invalid_argument("Carleson sequence line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(2 * n + 1) + " fields");
    }
    seq.set(r, v);
  }
  return seq;
}

ConditionConstant carleson_condition_constant(const CarlesonSequence& seq,
                                              const GridFunction& omega, double p, double q) {
  if (!(seq.shape == omega.shape())) throw ShapeError("sequence and omega use different grids");
  const SumTable t(omega);
  ConditionConstant c;
  for (const auto& [r, v] : seq.mu) {
    const double qv = v / std::pow(t.integral(r), q / p);
    if (qv > c.value) {
      c.value = qv;
      c.witness = r;
    }
  }
  if (!seq.mu.empty() && c.value == 0.0) c.witness = seq.mu.begin()->first;
  return c;
}

double carleson_quotient(const CarlesonSequence& seq, const GridFunction& omega,
                         const GridFunction& f, double p, double q) {
  if (!(seq.shape == f.shape()) || !(f.shape() == omega.shape())) {
    throw ShapeError("sequence, omega and f use different grids");
  }
  const double rhs = std::pow((f.pow(p) * omega).integral(), q / p);
  if (!(rhs > 0.0)) throw std::invalid_argument("Carleson quotient: f vanishes");
  const SumTable tf(f);
  long double lhs = 0.0L;
  for (const auto& [r, v] : seq.mu) {
    if (v == 0.0) continue;
    lhs += v * std::pow(tf.integral(r) / measure(r, seq.shape), q);
  }
  return static_cast<double>(lhs) / rhs;
}

GridFunction indicator(const GridShape& shape, const GridRectangle& r) {
  check_bounds(r, shape);
  GridFunction g(shape);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (r.contains(shape.unravel(k))) g[k] = 1.0;
  }
  return g;
}

VerificationReport carleson_embedding_check(const CarlesonSequence& seq, const GridFunction& omega,
                                            double p, double q,
                                            std::span<const GridFunction> corpus) {
  if (!(p > 1.0 && p < q)) throw std::invalid_argument("Carleson embedding needs 1 < p < q");
  VerificationReport rep;
  rep.check = "cor43";
  const auto c2 = carleson_condition_constant(seq, omega, p, q);
  const SumTable tw(omega);

  double c1 = 0.0;
  std::string c1_witness = "none";
  std::size_t chi_fail = 0;
  std::string first_fail;
  for (const auto& [r, v] : seq.mu) {
    const double qv = carleson_quotient(seq, omega, indicator(seq.shape, r.cells(seq.shape)), p, q);
    const double need = v / std::pow(tw.integral(r), q / p);
    if (qv < need * (1.0 - 1e-12)) {
      if (chi_fail++ == 0) first_fail = r.to_string();
    }
    if (qv > c1) {
      c1 = qv;
      c1_witness = "chi " + r.to_string();
    }
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!((corpus[i].pow(p) * omega).integral() > 0.0)) continue;
    const double qv = carleson_quotient(seq, omega, corpus[i], p, q);
    if (qv > c1) {
      c1 = qv;
      c1_witness = "corpus #" + std::to_string(i);
    }
  }
  rep.add_constant(ConstantEntry{"C2", c2.value, c2.witness.to_string(), "dyadic",
                                 seq.shape.levels[0]});
  rep.add_constant(ConstantEntry{"C1", c1, c1_witness, "dyadic", seq.shape.levels[0]});
  rep.expect("chi_I quotient >= mu_I/(omega(I))^{q/p} for every I", chi_fail == 0,
             chi_fail ? "first failure at " + first_fail : std::string{});
  rep.expect("C1 >= C2", c1 >= c2.value * (1.0 - 1e-12));
  return rep;
}

}  // namespace msmax::carleson
