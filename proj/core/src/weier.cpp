#include "weier/weier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "numerics.hpp"
#include "weier/errors.hpp"
#include "weier/format.hpp"

namespace weier {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_tol(double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
}
}  // namespace

int w_terms(const SystemParams& p, const Phi& phi, double tol) {
  check_tol(tol);
  const double s = phi.sup_bound(0);
  if (s == 0.0) return -1;
  int n = 0;
  double lam = p.lambda;  // lambda^{N+1}
  while (lam * s / (1.0 - p.lambda) > tol) {
    lam *= p.lambda;
    ++n;
  }
  return n;
}

double eval_W(const SystemParams& p, const Phi& phi, Phase x, double tol) {
  const int N = w_terms(p, phi, tol);
  double sum = 0.0, lam = 1.0;
  Phase xn = x;
  for (int n = 0; n <= N; ++n) {
    sum += lam * phi.value(xn);
    lam *= p.lambda;
    xn = xn.times(p.b);
  }
  return sum;
}

double eval_W(const SystemParams& p, const Phi& phi, double x, double tol) {
  return eval_W(p, phi, Phase::from_real(x), tol);
}

double self_affinity_residual(const SystemParams& p, const Phi& phi, double x, double tol) {
  const Phase ph = Phase::from_real(x);
  const double w = eval_W(p, phi, ph, tol);
  const double wb = eval_W(p, phi, ph.times(p.b), tol);
  return std::fabs(w - phi.value(ph) - p.lambda * wb);
}

// ------------------------------------------------------------ Fourier of W

Complex W_coefficient(const SystemParams& p, const FourierPhi& phi, long long m) {
  if (m == 0) return phi.coeff(0) / (1.0 - p.lambda);
  std::vector<long long> chain{m};
  while (chain.back() % p.b == 0) chain.push_back(chain.back() / p.b);
  auto c = [&](long long f) {
    return std::abs(f) > std::numeric_limits<int>::max() ? Complex{} : phi.coeff(static_cast<int>(f));
  };
  Complex a = c(chain.back());
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) a = c(*it) + p.lambda * a;
  return a;
}

WFourier fourier_of_W(const SystemParams& p, const FourierPhi& phi, int M_max) {
  if (M_max < 1) throw InvalidArgument("M_max must be >= 1");
  if (!phi.finitely_supported()) throw PreconditionError("fourier_of_W needs a finitely supported phi");
  const double eps = std::numeric_limits<double>::epsilon();
  WFourier w;
  w.M_max = M_max;
  w.A.assign(2 * static_cast<std::size_t>(M_max) + 1, Complex{});
  w.err.assign(w.A.size(), 0.0);
  auto idx = [&](int m) { return static_cast<std::size_t>(m + M_max); };
  w.A[idx(0)] = phi.coeff(0) / (1.0 - p.lambda);
  w.err[idx(0)] = eps * std::abs(w.A[idx(0)]);
  for (int am = 1; am <= M_max; ++am) {
    for (int m : {am, -am}) {
      Complex a = phi.coeff(m);
      double e = 0.0;
      if (m % p.b == 0) {
        const Complex prev = w.A[idx(m / p.b)];
        e = 2.0 * eps * (std::abs(a) + p.lambda * std::abs(prev)) + p.lambda * w.err[idx(m / p.b)];
        a += p.lambda * prev;
      }
      w.A[idx(m)] = a;
      w.err[idx(m)] = e;
    }
  }
  double scale = 0.0;
  for (auto& a : w.A) scale = std::max(scale, std::abs(a));
  for (auto& a : w.A)
    if (std::abs(a) <= FourierPhi::kZeroThreshold * scale) a = Complex{};
  return w;
}

std::string to_csv(const WFourier& w) {
  std::ostringstream os;
  os << "m,re,im,err\n";
  for (int m = -w.M_max; m <= w.M_max; ++m)
    os << m << ',' << fmt(w.at(m).real()) << ',' << fmt(w.at(m).imag()) << ',' << fmt(w.error(m)) << '\n';
  return os.str();
}

// ---------------------------------------------------------- Holder probes

double holder_constant_estimate(const SystemParams& p, const Phi& phi, int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw InvalidArgument("n_pairs must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ue(-6.0, -0.3);
  const double tol = 1e-12;
  double best = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const double x = ux(rng);
    const double d = std::pow(10.0, ue(rng));
    const double r = std::fabs(eval_W(p, phi, x + d, tol) - eval_W(p, phi, x, tol)) / std::pow(d, p.holder_exp);
    best = std::max(best, r);
  }
  return best;
}

AntiHolder anti_holder_probe(const SystemParams& p, const Phi& phi, double x, double delta, int grid_size) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (grid_size < 2) throw InvalidArgument("grid_size must be >= 2");
  const double tol = 1e-12;
  const double wx = eval_W(p, phi, x, tol);
  AntiHolder best{x + delta / grid_size, 0.0};
  for (int j = 1; j < grid_size; ++j) {
    const double h = delta * j / grid_size;
    const double r = std::fabs(eval_W(p, phi, x + h, tol) - wx) / std::pow(h, p.holder_exp);
    if (r > best.ratio) best = {x + h, r};
  }
  return best;
}

// ------------------------------------------------------ regulating periods

Rational reduce_mod1(Rational t) {
  if (t.den == 0) throw InvalidArgument("zero denominator");
  if (t.den < 0) {
    t.num = -t.num;
    t.den = -t.den;
  }
  t.num %= t.den;
  if (t.num < 0) t.num += t.den;
  const long long g = std::gcd(t.num, t.den);
  if (g > 1) {
    t.num /= g;
    t.den /= g;
  }
  if (t.num == 0) t.den = 1;
  return t;
}

bool is_b_adic(Rational t, int b) {
  t = reduce_mod1(t);
  long long d = t.den;
  for (long long g = std::gcd(d, static_cast<long long>(b)); g > 1; g = std::gcd(d, static_cast<long long>(b))) d /= g;
  return d == 1;
}

namespace {

// e^{2 pi i m t} - 1 with t rational
Complex shift_factor(long long m, Rational t) {
  const long long r = static_cast<long long>((static_cast<__int128>(m) * t.num) % t.den);
  double c, s;
  cis(Phase::from_ratio(r, t.den), c, s);
  return {c - 1.0, s};
}

Complex ik_power(long long m, int k) {
  const double mag = std::pow(kTwoPi * static_cast<double>(m), k);
  switch (((k % 4) + 4) % 4) {
    case 0: return {mag, 0.0};
    case 1: return {0.0, mag};
    case 2: return {-mag, 0.0};
    default: return {0.0, -mag};
  }
}

struct Term {
  long long m;
  Complex B;
};

// lo = sup over a grid (plus golden refinement) of |sum_m 2 Re(B_m e^{2 pi i m x})|.
double grid_sup(const std::vector<Term>& terms, int b, long long M) {
  if (terms.empty()) return 0.0;
  int e = 0;
  for (long long v = 1; v < M; v *= b) ++e;
  long long G = 4;
  for (int i = 0; i < e + 2; ++i) G *= b;
  G = std::min<long long>(G, 1LL << 22);
  auto f = [&](Phase x) {
    double s = 0.0;
    for (const auto& t : terms) {
      double c, sn;
      cis(x.times(t.m), c, sn);
      s += 2.0 * (t.B.real() * c - t.B.imag() * sn);
    }
    return std::fabs(s);
  };
  double best = -1.0;
  long long arg = 0;
  for (long long j = 0; j < G; ++j) {
    const double v = f(Phase::from_ratio(j, G));
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  const double h = 1.0 / static_cast<double>(G);
  const double x0 = static_cast<double>(arg) * h;
  auto [xa, va] = detail::golden_max([&](double x) { return f(Phase::from_real(x)); }, x0 - h, x0 + h);
  (void)xa;
  return std::max(best, va);
}

}  // namespace

EnergyEnclosure regulating_energy(const SystemParams& p, const FourierPhi& phi, Rational t_in, int k, int M_max) {
  if (k < 0) throw InvalidArgument("k must be >= 0");
  if (M_max < 1) throw InvalidArgument("M_max must be >= 1");
  if (!phi.finitely_supported()) throw PreconditionError("regulating_energy needs a finitely supported phi");
  if (!phi.real_valued()) throw PreconditionError("regulating_energy needs a real-valued phi");
  const Rational t = reduce_mod1(t_in);
  EnergyEnclosure out;
  if (t.num == 0) {
    out.trivial = true;
    return out;
  }
  const int K = phi.max_frequency();
  std::vector<Term> terms;
  double hi = 0.0;
  if (is_b_adic(t, p.b)) {
    // Only m = b^n k' with m t not an integer contribute: a finite set.
    out.trivial = true;
    std::set<long long> ms;
    for (auto [kk, c] : phi.coeffs()) {
      if (kk <= 0) continue;
      for (long long m = kk; m < (1LL << 60) / p.b; m *= p.b) {
        const Complex s = shift_factor(m, t);
        if (std::abs(s) == 0.0) break;
        ms.insert(m);
      }
    }
    long long Mx = 1;
    for (long long m : ms) {
      const Complex B = W_coefficient(p, phi, m) * ik_power(m, k) * shift_factor(m, t);
      if (std::abs(B) == 0.0) continue;
      terms.push_back({m, B});
      hi += 2.0 * std::abs(B);
      Mx = std::max(Mx, m);
    }
    out.hi = hi;
    out.lo = std::min(grid_sup(terms, p.b, Mx), hi);
    return out;
  }
  // Beyond M = max(M_max, K) phi has no frequency, so every further coefficient is
  // A_{b^n m'} = lambda^n A_{m'} for a seed m' in (M/b, M].
  const int M = std::max(M_max, K);
  const WFourier w = fourier_of_W(p, phi, M);
  for (int m = 1; m <= M; ++m) {
    const Complex a = w.at(m);
    if (a == Complex{}) continue;
    const Complex B = a * ik_power(m, k) * shift_factor(m, t);
    terms.push_back({m, B});
    hi += 2.0 * std::abs(B);
  }
  const double growth = p.lambda * std::pow(static_cast<double>(p.b), k);
  double tail = 0.0;
  for (int m = M / p.b + 1; m <= M; ++m) {
    const Complex a = w.at(m);
    if (a == Complex{}) continue;
    if (growth >= 1.0) {
      tail = kInf;
      break;
    }
    tail += 4.0 * std::abs(a) * std::pow(kTwoPi * m, k) * growth / (1.0 - growth);
  }
  out.hi = hi + tail;
  out.lo = grid_sup(terms, p.b, M);
  return out;
}

KeyEstimate key_estimate_probe(const SystemParams& p, const FourierPhi& phi, Rational t, int M_max) {
  if (t.num == 0) throw InvalidArgument("t must be nonzero");
  const Rational r = reduce_mod1(t);
  KeyEstimate out;
  if (r.num == 0) {
    out.trivial = true;
    return out;
  }
  const EnergyEnclosure e = regulating_energy(p, phi, r, 2, M_max);
  out.E2 = e.lo;
  out.trivial = e.trivial;
  out.product = e.lo * std::pow(r.value(), p.D);
  return out;
}

const char* to_string(PeriodClass c) {
  switch (c) {
    case PeriodClass::trivial: return "trivial";
    case PeriodClass::candidate_regulating: return "candidate-regulating";
    default: return "non-regulating";
  }
}

PeriodScanReport period_scan(const SystemParams& p, const FourierPhi& phi, int k,
                             const std::vector<long long>& denominators, const PeriodScanOptions& opt) {
  PeriodScanReport rep;
  double scale = 0.0;
  for (auto [m, c] : phi.coeffs()) scale += std::abs(c) * std::pow(kTwoPi * std::abs(m), k);
  rep.threshold = opt.threshold_factor * std::max(1.0, scale);
  for (long long den : denominators) {
    if (den < 1) throw InvalidArgument("denominators must be positive");
    bool all_regulating = true;
    for (long long q = den == 1 ? 0 : 1; q < std::max(den, 1LL); ++q) {
      if (den > 1 && std::gcd(q, den) != 1) continue;
      PeriodScanRow row;
      row.t = {q, den};
      row.k = k;
      const Rational t = reduce_mod1(row.t);
      if (t.num == 0 || is_b_adic(t, p.b)) {
        const EnergyEnclosure e = regulating_energy(p, phi, t, k, opt.M_max);
        row.lo = e.lo;
        row.hi = e.hi;
        row.cls = PeriodClass::trivial;
      } else {
        const EnergyEnclosure e1 = regulating_energy(p, phi, t, k, opt.M_max);
        const EnergyEnclosure e2 = regulating_energy(p, phi, t, k, 2 * opt.M_max);
        row.lo = e2.lo;
        row.hi = e2.hi;
        row.cls = (e1.lo > rep.threshold && e2.lo > rep.threshold) ? PeriodClass::non_regulating
                                                                   : PeriodClass::candidate_regulating;
        if (row.cls != PeriodClass::candidate_regulating) all_regulating = false;
      }
      rep.rows.push_back(row);
    }
    if (den > 1 && std::gcd(den, static_cast<long long>(p.b)) == 1 && all_regulating)
      rep.regulating_denominators.push_back(den);
  }
  return rep;
}

std::string to_csv(const PeriodScanReport& r) {
  std::ostringstream os;
  os << "t_num,t_den,k,E_lo,E_hi,class\n";
  for (const auto& row : r.rows)
    os << row.t.num << ',' << row.t.den << ',' << row.k << ',' << fmt(row.lo) << ',' << fmt(row.hi) << ','
       << to_string(row.cls) << '\n';
  return os.str();
}

}  // namespace weier
