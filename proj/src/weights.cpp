#include "msmax/weights.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "msmax/random.hpp"

namespace msmax::weights {

namespace {

void require_weight(const GridFunction& w, const char* what) {
  if (!w.all_finite() || !w.all_positive()) {
    throw std::domain_error(std::string(what) + " must be finite and strictly positive");
  }
}

double avg(const SumTable& t, const GridRectangle& r, double vol) {
  return static_cast<double>(t.raw(r.lo, r.hi)) / vol;
}

double volume(const GridShape& s, const GridRectangle& r) {
  double v = 1.0;
  for (int j = 0; j < s.dims; ++j) v *= (r.hi[j] - r.lo[j]) * s.width(j);
  return v;
}

// Supremum of `expr` over a family; first maximizer in enumeration order wins.
template <class Expr>
ConstantReport supremum(const GridShape& s, RectFamily family, Expr&& expr) {
  ConstantReport out;
  out.family = family;
  out.levels = s.levels;
  out.value = -std::numeric_limits<double>::infinity();
  auto visit = [&](const GridRectangle& r) {
    const double v = expr(r);
    if (v > out.value) {
      out.value = v;
      out.witness = r;
    }
  };
  if (family == RectFamily::all) {
    for_each_rectangle(s, visit);
  } else {
    for_each_dyadic(s, [&](const DyadicRectangle& d) { visit(d.cells(s)); });
  }
  return out;
}

// Tables shared by the A_{(p,q)} and two-weight expressions.
struct PqTables {
  std::vector<SumTable> sigma;  // omega_i^{exp_i}
  std::vector<double> outer;    // 1/p_i'
};

PqTables sigma_tables(const WeightVector& w, const ExponentProfile& prof, bool two_weight) {
  PqTables t;
  for (int i = 0; i < prof.m; ++i) {
    const double pc = prof.conjugate(i);
    t.sigma.emplace_back(w.omega[i].pow(two_weight ? 1.0 - pc : -pc));
    t.outer.push_back(1.0 / pc);
  }
  return t;
}

void check_profile(const WeightVector& w, const ExponentProfile& prof) {
  if (static_cast<int>(w.omega.size()) != prof.m) {
    throw ShapeError("weight vector has " + std::to_string(w.omega.size()) +
                     " weights, profile expects " + std::to_string(prof.m));
  }
  if (w.shape().dims != prof.n) throw ShapeError("profile dimension does not match the weights");
}

double a_p_eval(const SumTable& tw, const SumTable& ts, double p, const GridRectangle& r,
                double vol) {
  return avg(tw, r, vol) * std::pow(avg(ts, r, vol), p - 1.0);
}

}  // namespace

WeightVector WeightVector::make(std::vector<GridFunction> omega, const ExponentProfile& prof) {
  if (omega.empty()) throw std::invalid_argument("weight vector is empty");
  if (static_cast<int>(omega.size()) != prof.m) {
    throw ShapeError("weight vector size does not match m");
  }
  for (const auto& w : omega) {
    if (!(w.shape() == omega.front().shape())) throw ShapeError("weights live on different grids");
    require_weight(w, "weight");
  }
  WeightVector v;
  v.nu_prod = GridFunction(omega.front().shape(), 1.0);
  v.nu_glpt = GridFunction(omega.front().shape(), 1.0);
  for (int i = 0; i < prof.m; ++i) {
    v.nu_prod = v.nu_prod * omega[i];
    v.nu_glpt = v.nu_glpt * omega[i].pow(prof.p / prof.p_vec[i]);
  }
  v.omega = std::move(omega);
  return v;
}

ConstantEntry ConstantReport::entry(const std::string& name) const {
  ConstantEntry e;
  e.name = name;
  e.value = value;
  e.witness = witness.to_string();
  e.family = msmax::to_string(family);
  e.level = *std::max_element(levels.begin(), levels.begin() + witness.dims);
  return e;
}

ConstantReport a_pq_rect_constant(const WeightVector& w, const ExponentProfile& prof,
                                  RectFamily family) {
  check_profile(w, prof);
  const GridShape& s = w.shape();
  const SumTable nu(w.nu_prod.pow(prof.q));
  const PqTables t = sigma_tables(w, prof, false);
  return supremum(s, family, [&](const GridRectangle& r) {
    const double vol = volume(s, r);
    double v = std::pow(avg(nu, r, vol), 1.0 / prof.q);
    for (int i = 0; i < prof.m; ++i) v *= std::pow(avg(t.sigma[i], r, vol), t.outer[i]);
    return v;
  });
}

double a_pq_expression(const WeightVector& w, const ExponentProfile& prof, const GridRectangle& r) {
  GridShape s = w.shape();
  check_bounds(r, s);
  const SumTable nu(w.nu_prod.pow(prof.q));
  const PqTables t = sigma_tables(w, prof, false);
  const double vol = volume(s, r);
  double v = std::pow(avg(nu, r, vol), 1.0 / prof.q);
  for (int i = 0; i < prof.m; ++i) v *= std::pow(avg(t.sigma[i], r, vol), t.outer[i]);
  return v;
}

namespace {

double two_weight_eval(const SumTable& nu, const PqTables& t, const ExponentProfile& prof,
                       const GridRectangle& r, double vol) {
  const double expo = prof.alpha / prof.n + 1.0 / prof.q - 1.0 / prof.p;
  double v = std::pow(vol, expo) * std::pow(avg(nu, r, vol), 1.0 / prof.q);
  for (int i = 0; i < prof.m; ++i) v *= std::pow(avg(t.sigma[i], r, vol), t.outer[i]);
  return v;
}

void check_two_weight(const WeightVector& w, const GridFunction& nu, const ExponentProfile& prof) {
  check_profile(w, prof);
  if (!(prof.p < prof.q)) throw std::invalid_argument("two-weight condition needs p < q");
  if (!(nu.shape() == w.shape())) throw ShapeError("nu and the weights live on different grids");
  if (!nu.all_finite() || !nu.all_nonnegative()) {
    throw std::domain_error("nu must be finite and nonnegative");
  }
}

}  // namespace

ConstantReport two_weight_constant(const WeightVector& w, const GridFunction& nu,
                                   const ExponentProfile& prof, RectFamily family) {
  check_two_weight(w, nu, prof);
  const GridShape& s = w.shape();
  const SumTable tn(nu);
  const PqTables t = sigma_tables(w, prof, true);
  return supremum(s, family, [&](const GridRectangle& r) {
    return two_weight_eval(tn, t, prof, r, volume(s, r));
  });
}

double two_weight_expression(const WeightVector& w, const GridFunction& nu,
                             const ExponentProfile& prof, const GridRectangle& r) {
  check_two_weight(w, nu, prof);
  check_bounds(r, w.shape());
  const SumTable tn(nu);
  const PqTables t = sigma_tables(w, prof, true);
  return two_weight_eval(tn, t, prof, r, volume(w.shape(), r));
}

ConstantReport a_p_rect_constant(const GridFunction& omega, double p, RectFamily family) {
  if (!(p > 1.0)) throw std::invalid_argument("A_p constant needs p > 1");
  require_weight(omega, "weight");
  const GridShape& s = omega.shape();
  const SumTable tw(omega);
  const SumTable ts(omega.pow(1.0 - conjugate_exponent(p)));
  return supremum(s, family, [&](const GridRectangle& r) {
    return a_p_eval(tw, ts, p, r, volume(s, r));
  });
}

double a_p_expression(const GridFunction& omega, double p, const GridRectangle& r) {
  if (!(p > 1.0)) throw std::invalid_argument("A_p constant needs p > 1");
  require_weight(omega, "weight");
  check_bounds(r, omega.shape());
  const SumTable tw(omega);
  const SumTable ts(omega.pow(1.0 - conjugate_exponent(p)));
  return a_p_eval(tw, ts, p, r, volume(omega.shape(), r));
}

namespace {

double multilinear_eval(const SumTable& nu, const PqTables& t, const ExponentProfile& prof,
                        const GridRectangle& r, double vol) {
  double v = avg(nu, r, vol);
  for (int i = 0; i < prof.m; ++i) v *= std::pow(avg(t.sigma[i], r, vol), prof.p * t.outer[i]);
  return v;
}

}  // namespace

ConstantReport multilinear_ap_constant(const WeightVector& w, const ExponentProfile& prof,
                                       RectFamily family) {
  check_profile(w, prof);
  const GridShape& s = w.shape();
  const SumTable nu(w.nu_glpt);
  const PqTables t = sigma_tables(w, prof, true);
  return supremum(s, family, [&](const GridRectangle& r) {
    return multilinear_eval(nu, t, prof, r, volume(s, r));
  });
}

double multilinear_ap_expression(const WeightVector& w, const ExponentProfile& prof,
                                 const GridRectangle& r) {
  check_profile(w, prof);
  check_bounds(r, w.shape());
  const SumTable nu(w.nu_glpt);
  const PqTables t = sigma_tables(w, prof, true);
  return multilinear_eval(nu, t, prof, r, volume(w.shape(), r));
}

double reverse_doubling_constant(const GridFunction& omega) {
  if (!omega.all_finite() || !omega.all_nonnegative()) {
    throw std::domain_error("reverse doubling needs a finite nonnegative function");
  }
  const GridShape& s = omega.shape();
  const int n = s.dims;
  const SumTable t(omega);
  double best = std::numeric_limits<double>::infinity();
  for_each_dyadic(s, [&](const DyadicRectangle& parent) {
    for (int j = 0; j < n; ++j) {
      if (parent.level[j] >= s.levels[j]) return;
    }
    const double whole = t.integral(parent);
    if (!(whole > 0.0)) return;
    for (int bits = 0; bits < (1 << n); ++bits) {
      DyadicRectangle child = parent;
      for (int j = 0; j < n; ++j) {
        child.level[j] += 1;
        child.index[j] = 2 * parent.index[j] + ((bits >> j) & 1);
      }
      const double part = t.integral(child);
      if (part > 0.0) best = std::min(best, whole / part);
    }
  });
  return best;
}

DerivedExponents derived_exponents(const ExponentProfile& prof) {
  DerivedExponents d;
  const double m = prof.m;
  const double q = prof.q;
  d.r = 1.0 + q * (m - 1.0 / prof.p);
  for (int i = 0; i < prof.m; ++i) {
    const double pc = prof.conjugate(i);
    d.r_i.push_back(1.0 + pc / q * (1.0 + (m - 1.0) * q - q / prof.p + q / prof.p_vec[i]));
  }
  return d;
}

bool r_i_hypothesis(const ExponentProfile& prof) {
  for (int i = 0; i < prof.m; ++i) {
    for (int j = 0; j < prof.m; ++j) {
      const double rhs = (prof.m - 2) + 1.0 / prof.p_vec[i] + 1.0 / prof.p_vec[j];
      if (!(prof.alpha / prof.n < rhs)) return false;
    }
  }
  return true;
}

double rd_prediction(double K, double p, int n) {
  if (!(p > 1.0)) throw std::invalid_argument("rd_prediction needs p > 1");
  if (!(K >= 1.0)) throw std::invalid_argument("rd_prediction needs K >= 1");
  const double pc = conjugate_exponent(p);
  const double inv =
      1.0 - (1.0 - std::ldexp(1.0, -n)) / (std::pow(2.0, n * pc / p) * std::pow(K, pc));
  return 1.0 / inv;
}

GridFunction power_weight(const GridShape& shape, double a, const Point& anchor) {
  GridFunction w = GridFunction::from_centers(shape, [&](const Point& x) {
    double r2 = 0.0;
    for (int j = 0; j < shape.dims; ++j) r2 += (x[j] - anchor[j]) * (x[j] - anchor[j]);
    return std::pow(std::sqrt(r2), a);
  });
  require_weight(w, "power weight");
  return w;
}

GridFunction dyadic_martingale_weight(const GridShape& shape, std::uint64_t seed, int depth,
                                      double amplitude, double decay) {
  if (depth < 0) throw std::invalid_argument("martingale depth must be >= 0");
  if (!(amplitude >= 0.0 && amplitude < 1.0)) {
    throw std::invalid_argument("martingale amplitude must lie in [0, 1)");
  }
  if (!(decay >= 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("martingale decay must lie in [0, 1]");
  }
  int top = depth;
  for (int j = 0; j < shape.dims; ++j) top = std::min(top, shape.levels[j] + 1);
  GridFunction w(shape, 1.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Index c = shape.unravel(k);
    double v = 1.0;
    for (int l = 0; l < top; ++l) {
      std::uint64_t key = Rng::mix(seed ^ Rng::mix(static_cast<std::uint64_t>(l)));
      for (int j = 0; j < shape.dims; ++j) {
        key = Rng::mix(key ^ static_cast<std::uint64_t>(c[j] >> (shape.levels[j] - l)));
      }
      const double eps = amplitude * std::pow(decay, l);
      v *= (key & 1) ? 1.0 + eps : 1.0 - eps;
    }
    w[k] = v;
  }
  return w;
}

namespace {

double number(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw std::invalid_argument("weight spec: bad number for " + key + ": '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"const", {"c"}},
      {"power", {"a", "anchor"}},
      {"martingale", {"seed", "depth", "amp", "decay"}},
  };
  return keys;
}

}  // namespace

WeightSpec WeightSpec::parse(const std::string& text) {
  WeightSpec spec;
  const auto colon = text.find(':');
  spec.kind = trim(text.substr(0, colon));
  const auto known = known_keys().find(spec.kind);
  if (known == known_keys().end()) {
    throw std::invalid_argument("weight spec: unknown kind '" + spec.kind + "'");
  }
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("weight spec: expected key=value");
      const std::string key = trim(item.substr(0, eq));
      if (std::find(known->second.begin(), known->second.end(), key) == known->second.end()) {
        throw std::invalid_argument("weight spec: unknown key '" + key + "' for " + spec.kind);
      }
      spec.params[key] = trim(item.substr(eq + 1));
    }
  }
  // Validate numbers now so errors surface at parse time.
  for (const auto& [k, v] : spec.params) {
    if (k == "anchor") {
      std::stringstream as(v);
      std::string part;
      while (std::getline(as, part, '/')) number(k, part);
    } else {
      number(k, v);
    }
  }
  return spec;
}

GridFunction WeightSpec::sample(const GridShape& shape) const {
  auto get = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : number(key, it->second);
  };
  if (kind == "const") {
    const double c = get("c", 1.0);
    if (!(c > 0.0)) throw std::invalid_argument("weight spec: const needs c > 0");
    return GridFunction(shape, c);
  }
  if (kind == "power") {
    Point anchor{0.0, 0.0, 0.0};
    if (const auto it = params.find("anchor"); it != params.end()) {
      std::vector<double> parts;
      std::stringstream as(it->second);
      std::string part;
      while (std::getline(as, part, '/')) parts.push_back(number("anchor", part));
      if (parts.size() != 1 && static_cast<int>(parts.size()) != shape.dims) {
        throw std::invalid_argument("weight spec: anchor needs 1 or n coordinates");
      }
      for (int j = 0; j < shape.dims; ++j) anchor[j] = parts.size() == 1 ? parts[0] : parts[j];
    }
    return power_weight(shape, get("a", 0.0), anchor);
  }
  if (kind == "martingale") {
    const double seed = get("seed", 0.0);
    const double depth = get("depth", 4.0);
    if (seed < 0 || seed != std::floor(seed) || depth != std::floor(depth)) {
      throw std::invalid_argument("weight spec: seed and depth must be whole numbers");
    }
    return dyadic_martingale_weight(shape, static_cast<std::uint64_t>(seed),
                                    static_cast<int>(depth), get("amp", 0.3), get("decay", 0.7));
  }
  throw std::invalid_argument("weight spec: unknown kind '" + kind + "'");
}

std::string WeightSpec::to_string() const {
  std::string out = kind;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep;
    out += k + "=" + v;
    sep = ',';
  }
  return out;
}

WeightFactory factory(const std::vector<WeightSpec>& specs) {
  return [specs](const GridShape& s) {
    std::vector<GridFunction> out;
    for (const auto& spec : specs) out.push_back(spec.sample(s));
    return out;
  };
}

SweepRow refinement_sweep(const std::string& name, const GridShape& base, int extra,
                          double threshold,
                          const std::function<double(const GridShape&)>& constant) {
  SweepRow row;
  row.name = name;
  for (int e = 0; e <= extra; ++e) row.values.push_back(constant(refine(base, e)));
  for (std::size_t i = 1; i < row.values.size(); ++i) {
    row.worst_ratio = std::max(row.worst_ratio, row.values[i] / row.values[i - 1]);
  }
  row.stable = row.worst_ratio <= threshold;
  return row;
}

VerificationReport characterize(const WeightFactory& weights, const ExponentProfile& prof,
                                RectFamily family, const GridShape& base, int extra,
                                double threshold) {
  VerificationReport rep;
  rep.check = "characterize";
  const DerivedExponents d = derived_exponents(prof);
  const bool with_ri = r_i_hypothesis(prof);
  const double mq = prof.m * prof.q;

  struct Item {
    std::string name;
    std::vector<double> values;
    ConstantReport last;
  };
  std::vector<Item> items;
  auto record = [&](std::size_t slot, const std::string& name, const ConstantReport& c) {
    if (items.size() <= slot) items.push_back(Item{name, {}, {}});
    items[slot].values.push_back(c.value);
    items[slot].last = c;
  };

  bool holder = true;
  bool nested = true;
  for (int e = 0; e <= extra; ++e) {
    const GridShape s = refine(base, e);
    const WeightVector w = WeightVector::make(weights(s), prof);
    std::size_t slot = 0;
    record(slot++, "A_pq", a_pq_rect_constant(w, prof, family));
    const GridFunction nuq = w.nu_prod.pow(prof.q);
    const ConstantReport ar = a_p_rect_constant(nuq, d.r, family);
    const ConstantReport amq = a_p_rect_constant(nuq, mq, family);
    record(slot++, "nu^q in A_r", ar);
    record(slot++, "nu^q in A_mq", amq);
    holder = holder && ar.value >= 1.0 - 1e-12 && amq.value >= 1.0 - 1e-12;
    nested = nested && amq.value <= ar.value * (1.0 + 1e-12);
    for (int i = 0; i < prof.m; ++i) {
      const GridFunction sig = w.omega[i].pow(-prof.conjugate(i));
      const ConstantReport b = a_p_rect_constant(sig, prof.m * prof.conjugate(i), family);
      record(slot++, "omega_" + std::to_string(i + 1) + "^-p' in A_mp'", b);
      holder = holder && b.value >= 1.0 - 1e-12;
      if (with_ri && d.r_i[i] > 1.0) {
        const ConstantReport c = a_p_rect_constant(sig, d.r_i[i], family);
        record(slot++, "omega_" + std::to_string(i + 1) + "^-p' in A_r_i", c);
        holder = holder && c.value >= 1.0 - 1e-12;
      }
    }
  }

  auto& ex = rep.add("derived exponents", Status::evidence);
  ex.data["r"] = d.r;
  ex.data["r_i"] = d.r_i;
  ex.data["mq"] = mq;
  ex.data["r_i hypothesis"] = with_ri;
  rep.expect("r <= mq", d.r <= mq + 1e-12);
  rep.expect("A_p constants >= 1", holder);
  rep.expect("A_mq constant <= A_r constant", nested);
  for (const auto& it : items) {
    double worst = 1.0;
    for (std::size_t i = 1; i < it.values.size(); ++i) {
      worst = std::max(worst, it.values[i] / it.values[i - 1]);
    }
    auto& f = rep.add("sweep: " + it.name, Status::evidence,
                      worst <= threshold ? "stable" : "grows under refinement");
    f.data["values"] = it.values;
    f.data["worst_ratio"] = worst;
    f.data["stable"] = worst <= threshold;
    rep.add_constant(it.last.entry(it.name));
  }
  return rep;
}

}  // namespace msmax::weights
