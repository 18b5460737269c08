#include "weier/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "numerics.hpp"
#include "trig.hpp"
#include "weier/errors.hpp"
#include "weier/format.hpp"

namespace weier {

namespace {

void need_smooth(const Phi& phi, int order) {
  if (phi.max_derivative() < order)
    throw UnsupportedDerivative("operation needs phi^(" + std::to_string(order) + "), not available for " +
                                phi.describe());
}

void check_tol(double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
}

// The offset o_n is below 1 whenever x is, but rounds to 1 once x b^-n drops under an ulp;
// for piecewise phi that would read the derivative on the wrong side of the 0 = 1 breakpoint.
constexpr double kBelowOne = 1.0 - 0x1p-53;

}  // namespace

double eval_Y(const SystemParams& p, const Phi& phi, double x, const Code& code, double tol) {
  check_tol(tol);
  need_smooth(phi, 1);
  const int N = detail::series_terms(p.gamma, phi.sup_bound(1), tol);
  double u = x, g = 1.0, sum = 0.0;
  for (int n = 1; n <= N; ++n) {
    u = (u + code.at(static_cast<std::size_t>(n - 1))) / p.b;
    if (u >= 1.0 && x < 1.0) u = kBelowOne;
    g *= p.gamma;
    sum += g * phi.deriv(u, 1);
  }
  return -sum;
}

double eval_Y_deriv(const SystemParams& p, const Phi& phi, double x, const Code& code, int k, double tol) {
  check_tol(tol);
  if (k < 1) throw InvalidArgument("derivative order k must be >= 1");
  need_smooth(phi, k + 1);
  const double r = p.gamma / std::pow(static_cast<double>(p.b), k);
  const int N = detail::series_terms(r, phi.sup_bound(k + 1), tol);
  double u = x, g = 1.0, sum = 0.0;
  for (int n = 1; n <= N; ++n) {
    u = (u + code.at(static_cast<std::size_t>(n - 1))) / p.b;
    if (u >= 1.0 && x < 1.0) u = kBelowOne;
    g *= r;
    sum += g * phi.deriv(u, k + 1);
  }
  return -sum;
}

double eval_Gamma(const SystemParams& p, const Phi& phi, double x, const Code& code, double tol) {
  check_tol(tol);
  need_smooth(phi, 1);
  if (x == 0.0) return 0.0;
  const int N = detail::series_terms(p.gamma, std::fabs(x) * phi.sup_bound(1), tol);
  double o = 0.0, h = x, inv = 1.0;
  detail::CompensatedSum acc;
  for (int n = 1; n <= N; ++n) {
    o = (o + code.at(static_cast<std::size_t>(n - 1))) / p.b;
    h /= p.b;
    inv /= p.lambda;
    acc.add(inv * phi.diff(o, h));
  }
  return -acc.value();
}

double project(const SystemParams& p, const Phi& phi, const Code& code, double x, double y, double tol) {
  return y - eval_Gamma(p, phi, x, code, tol);
}

std::pair<double, double> apply_ifs(const SystemParams& p, const Phi& phi, int i, double x, double y) {
  if (i < 0 || i >= p.b) throw InvalidArgument("symbol " + std::to_string(i) + " outside [0," + std::to_string(p.b) + ")");
  const double xn = (x + i) / p.b;
  return {xn, p.lambda * y + phi.value(xn)};
}

std::pair<double, double> apply_word(const SystemParams& p, const Phi& phi, const Word& w, double x, double y) {
  for (std::size_t s = w.size(); s-- > 0;) std::tie(x, y) = apply_ifs(p, phi, w[s], x, y);
  return {x, y};
}

double transition_residual(const SystemParams& p, const Phi& phi, const Word& w, const Code& code, double x, double y,
                           double tol) {
  const auto [gx, gy] = apply_word(p, phi, w, x, y);
  const auto [ox, oy] = apply_word(p, phi, w, 0.0, 0.0);
  const double lhs = project(p, phi, code, gx, gy, tol);
  const double lam = std::pow(p.lambda, static_cast<double>(w.size()));
  const double rhs = lam * project(p, phi, code.prepend(w.reversed()), x, y, tol) + project(p, phi, code, ox, oy, tol);
  return std::fabs(lhs - rhs);
}

Separation separation_sup(const SystemParams& p, const Phi& phi, const Code& u, const Code& v, int grid_size,
                          bool refine, double tol) {
  if (grid_size < 1) throw InvalidArgument("grid_size must be >= 1");
  Separation out;
  if (u.same_sequence(v)) {
    out.identical = true;
    return out;
  }
  auto d = [&](double x) { return std::fabs(eval_Y(p, phi, x, u, tol) - eval_Y(p, phi, x, v, tol)); };
  int arg = 0;
  for (int i = 0; i < grid_size; ++i) {
    const double val = d(static_cast<double>(i) / grid_size);
    if (val > out.sup) {
      out.sup = val;
      arg = i;
    }
  }
  out.argmax = static_cast<double>(arg) / grid_size;
  if (refine && out.sup > 0.0) {
    const double h = 1.0 / grid_size;
    const double a = std::max(0.0, out.argmax - h), b = std::min(1.0, out.argmax + h);
    auto [xr, vr] = detail::golden_max(d, a, b);
    if (vr > out.sup) {
      out.sup = vr;
      out.argmax = xr;
    }
  }
  return out;
}

const char* to_string(HClass c) {
  switch (c) {
    case HClass::h_evidence: return "H-evidence";
    case HClass::h_star_evidence: return "H*-evidence";
    default: return "inconclusive";
  }
}

HScanReport condition_H_scan(const SystemParams& p, const Phi& phi, int depth, int samples_per_pair,
                             std::uint64_t seed, const HScanOptions& opt) {
  if (depth < 1) throw InvalidArgument("depth must be >= 1");
  if (samples_per_pair < 1) throw InvalidArgument("samples_per_pair must be >= 1");
  need_smooth(phi, 1);
  std::uint64_t words = 1;
  for (int i = 0; i < depth; ++i) words *= static_cast<std::uint64_t>(p.b);
  if (words * words > (1u << 20)) throw InvalidArgument("depth too large for an exhaustive prefix scan");
  HScanReport rep;
  rep.min_sep = HUGE_VAL;
  std::uint64_t pair_index = 0;
  for (std::uint64_t iu = 0; iu < words; ++iu) {
    const Word wu = Word::from_index(p.b, depth, iu);
    for (std::uint64_t iv = 0; iv < words; ++iv) {
      const Word wv = Word::from_index(p.b, depth, iv);
      if (wu[0] == wv[0]) continue;
      for (int s = 0; s < samples_per_pair; ++s, ++pair_index) {
        const std::uint64_t ts = detail::splitmix64(seed ^ detail::splitmix64(pair_index));
        HScanRow row{wu.str(), wv.str(), ts, 0.0,
                     Code::random(p.b, ts).prepend(wu), Code::random(p.b, detail::splitmix64(ts)).prepend(wv)};
        row.sep = separation_sup(p, phi, row.u, row.v, opt.grid_size, opt.refine, opt.tol).sup;
        rep.min_sep = std::min(rep.min_sep, row.sep);
        rep.max_sep = std::max(rep.max_sep, row.sep);
        rep.rows.push_back(std::move(row));
      }
    }
  }
  if (rep.min_sep > opt.eps_h) rep.classification = HClass::h_evidence;
  else if (rep.max_sep < opt.eps_star) rep.classification = HClass::h_star_evidence;
  else rep.classification = HClass::inconclusive;
  return rep;
}

std::string to_csv(const HScanReport& r) {
  std::ostringstream os;
  os << "u_prefix,v_prefix,seed,sep\n";
  for (const auto& row : r.rows) os << row.u_prefix << ',' << row.v_prefix << ',' << row.seed << ',' << fmt(row.sep) << '\n';
  return os.str();
}

std::vector<double> chebyshev_nodes(double a, double b, int count) {
  std::vector<double> x(static_cast<std::size_t>(count));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int j = 0; j < count; ++j)
    x[static_cast<std::size_t>(j)] = mid - half * std::cos(std::numbers::pi * j / (count - 1));
  x.front() = a;
  x.back() = b;
  return x;
}

namespace {

struct Extremes {
  double sup = 0.0;
  double inf = 0.0;
};

// sup and inf of |g| on the nodes, each refined once by golden section in its bracket.
Extremes node_extremes(const std::function<double(double)>& g, const std::vector<double>& nodes) {
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = std::fabs(g(nodes[i]));
  const auto imax = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const auto imin = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  Extremes e{v[imax], v[imin]};
  auto bracket = [&](std::size_t i) {
    return std::pair{nodes[i == 0 ? 0 : i - 1], nodes[std::min(i + 1, nodes.size() - 1)]};
  };
  auto [a1, b1] = bracket(imax);
  e.sup = std::max(e.sup, detail::golden_max([&](double x) { return std::fabs(g(x)); }, a1, b1).second);
  auto [a2, b2] = bracket(imin);
  e.inf = std::min(e.inf, -detail::golden_max([&](double x) { return -std::fabs(g(x)); }, a2, b2).second);
  return e;
}

}  // namespace

std::optional<Regularity> regularity_on_interval(const std::function<double(double, int)>& fk, double a, double b,
                                                 int k_min, int k_max) {
  const auto nodes = chebyshev_nodes(a, b);
  for (int k = k_min; k <= k_max; ++k) {
    const Extremes e = node_extremes([&](double x) { return fk(x, k); }, nodes);
    if (e.sup > 0.0 && e.sup <= 2.0 * e.inf) return Regularity{k, e.sup, e.inf};
  }
  return std::nullopt;
}

RegularityTable k_regularity(const SystemParams& p, const Phi& phi, const Code& u, const Code& v, int level, int k_max,
                             double tol) {
  if (level < 0) throw InvalidArgument("level must be >= 0");
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  need_smooth(phi, 1);
  RegularityTable t;
  t.k_max_used = std::min(k_max, phi.max_derivative());
  t.truncated = t.k_max_used < k_max;
  auto fk = [&](double x, int k) {
    if (k == 1) return eval_Y(p, phi, x, u, tol) - eval_Y(p, phi, x, v, tol);
    return eval_Y_deriv(p, phi, x, u, k - 1, tol) - eval_Y_deriv(p, phi, x, v, k - 1, tol);
  };
  const double cells = std::pow(static_cast<double>(p.b), level);
  const auto count = static_cast<std::size_t>(cells);
  bool all_zero = true;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = static_cast<double>(i) / cells, b = static_cast<double>(i + 1) / cells;
    RegularityRow row{i, regularity_on_interval(fk, a, b, 1, t.k_max_used)};
    if (row.reg) all_zero = false;
    else if (all_zero) {
      for (double x : chebyshev_nodes(a, b, 9))
        for (int k = 1; k <= t.k_max_used && all_zero; ++k)
          if (fk(x, k) != 0.0) all_zero = false;
    }
    t.rows.push_back(row);
  }
  t.degenerate = all_zero;
  return t;
}

Certificate transversality_certificate(const SystemParams& p, const Phi& phi, const Code& u, const Code& v, int l0,
                                       double tol) {
  if (l0 < 0) throw InvalidArgument("l0 must be >= 0");
  Certificate c;
  if (u.same_sequence(v)) {
    c.degenerate = true;
    return c;
  }
  need_smooth(phi, 1);
  auto g = [&](double x) { return eval_Y(p, phi, x, u, tol) - eval_Y(p, phi, x, v, tol); };
  const double cells = std::pow(static_cast<double>(p.b), l0);
  const auto count = static_cast<std::size_t>(cells);
  double sum_inf = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = static_cast<double>(i) / cells, b = static_cast<double>(i + 1) / cells;
    const Extremes e = node_extremes(g, chebyshev_nodes(a, b));
    c.rows.push_back({i, e.inf, e.sup});
    sum_inf += e.inf;
    c.rhs_sup = std::max(c.rhs_sup, e.sup);
  }
  c.lhs = sum_inf / cells;
  if (c.rhs_sup == 0.0) c.degenerate = true;
  else c.ratio = c.lhs / c.rhs_sup;
  return c;
}

std::string to_csv(const Certificate& c) {
  std::ostringstream os;
  os << "interval_index,inf,sup\n";
  for (const auto& r : c.rows) os << r.interval << ',' << fmt(r.inf) << ',' << fmt(r.sup) << '\n';
  return os.str();
}

StabilizationReport certificate_stabilization(const SystemParams& p, const Phi& phi,
                                              const std::vector<std::pair<Code, Code>>& pairs, int max_level,
                                              double rel_tol) {
  if (pairs.empty()) throw InvalidArgument("need at least one code pair");
  if (max_level < 2) throw InvalidArgument("max_level must be >= 2");
  StabilizationReport r;
  for (int l = 1; l <= max_level; ++l) {
    double m = HUGE_VAL;
    for (const auto& [u, v] : pairs) {
      const Certificate c = transversality_certificate(p, phi, u, v, l);
      if (!c.degenerate) m = std::min(m, c.ratio);
    }
    r.min_ratio.push_back(m == HUGE_VAL ? 0.0 : m);
  }
  for (int l = 1; l < max_level; ++l) {
    const double a = r.min_ratio[static_cast<std::size_t>(l - 1)], b = r.min_ratio[static_cast<std::size_t>(l)];
    if (a > 0.0 && std::fabs(b - a) <= rel_tol * a) {
      r.level = l;
      r.stabilized = true;
      return r;
    }
  }
  r.level = max_level;
  return r;
}

}  // namespace weier
