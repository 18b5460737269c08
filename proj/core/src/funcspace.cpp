#include "weier/funcspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "numerics.hpp"
#include "parallel.hpp"
#include "trig.hpp"
#include "weier/batch.hpp"
#include "weier/errors.hpp"
#include "weier/format.hpp"
#include "weier/kernel.hpp"
#include "weier/measure.hpp"

namespace weier {

namespace {

constexpr double kIndexLimit = 0x1p62;

std::uint64_t mix_in(std::uint64_t h, std::int64_t v) {
  return detail::splitmix64(h ^ static_cast<std::uint64_t>(v));
}

std::int64_t cell_index(double v, double scale) {
  const double f = std::floor(v * scale);
  if (!(std::fabs(f) < kIndexLimit)) throw InvalidArgument("cell index overflows at this level: value " + fmt(v));
  return static_cast<std::int64_t>(f);
}

double scale_of(int b, int level) { return std::pow(static_cast<double>(b), level); }

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_code(const SystemParams& p, const Code& j) {
  if (j.base() != p.b) throw InvalidArgument("code base " + std::to_string(j.base()) + " differs from b = " + std::to_string(p.b));
}

// Sorted distinct draws from [0, total).
std::vector<std::uint64_t> subsample_indices(std::uint64_t total, std::uint64_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  std::vector<std::uint64_t> out;
  out.reserve(count);
  while (out.size() < count) {
    while (out.size() < count) out.push_back(pick(rng));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

// Levels r >= r1 of the series in code j enter only through the real polynomial
// sum_n poly[n] x^n, exact up to rounding because every angle 2 pi q x / b^r is small there.
struct FastTables {
  detail::TrigTerms T;
  int h = 0;
  int R = 0;
  int head = 0;  // levels r = 1..head of the j-series are evaluated directly
  std::size_t Q = 0;
  std::size_t M = 0;
  std::vector<Complex> E;  // [(l-1) M + (k-1)] Q + t = e^{2 pi i q_t (k/M) / b^l} - 1, l = 1..h+head
  std::vector<Complex> B;  // [(r-1) Q + t] = lambda^-r coef e^{2 pi i q J_r}, r = 1..head
  std::vector<double> poly;  // poly[n], n = 1..; poly[0] unused
  std::vector<double> inv_lambda;  // lambda^-l, l = 0..h
  std::vector<double> delta;  // (k/M) b^-h

  FastTables(const SystemParams& p, const FourierPhi& f, double s1, const Code& j, int h_, long long M_, double tol)
      : T(f), h(h_), M(static_cast<std::size_t>(M_)) {
    Q = T.size();
    R = detail::series_terms(p.gamma, s1, tol);
    const double two_pi = 2.0 * std::numbers::pi;
    const double qmax = static_cast<double>(std::max(T.max_q(), 1));
    int r1 = 1;
    while (two_pi * qmax / std::pow(static_cast<double>(p.b), r1) > 0.25) ++r1;
    head = std::min(r1 - 1, R);

    const int L = h + head;
    E.assign(static_cast<std::size_t>(L) * M * Q, Complex{});
    std::vector<Complex> tmp(static_cast<std::size_t>(L) * Q);
    for (std::size_t k = 1; k <= M; ++k) {
      detail::ladder(static_cast<double>(k) / static_cast<double>(M), p.b, L, T.q, tmp.data());
      for (int l = 1; l <= L; ++l)
        for (std::size_t t = 0; t < Q; ++t)
          E[((static_cast<std::size_t>(l) - 1) * M + (k - 1)) * Q + t] = tmp[(static_cast<std::size_t>(l) - 1) * Q + t];
    }

    // Taylor order: (2 pi qmax x / b^r1)^(n+1) / (n+1)! below 1e-18 for x <= 2.
    const double u = 2.0 * two_pi * qmax / std::pow(static_cast<double>(p.b), r1);
    int nmax = 1;
    for (double term = u * u / 2.0; term > 1e-18; term *= u / (nmax + 2)) ++nmax;
    if (R < r1) nmax = 0;

    B.assign(static_cast<std::size_t>(head) * Q, Complex{});
    std::vector<Complex> Z(static_cast<std::size_t>(nmax + 1) * Q);
    std::vector<detail::CompensatedSum> zr(Z.size()), zi(Z.size());
    double J = 0.0, inv = 1.0;
    for (int r = 1; r <= R; ++r) {
      J = (J + j.at(static_cast<std::size_t>(r - 1))) / p.b;
      inv /= p.lambda;
      for (std::size_t t = 0; t < Q; ++t) {
        const Complex br = inv * T.coef[t] * detail::cis_angle(two_pi * T.q[t] * J);
        if (r <= head) {
          B[(static_cast<std::size_t>(r) - 1) * Q + t] = br;
          continue;
        }
        const double f = std::pow(static_cast<double>(p.b), -r);
        double g = 1.0;
        for (int n = 1; n <= nmax; ++n) {
          g *= f;
          const Complex v = br * g;
          zr[static_cast<std::size_t>(n) * Q + t].add(v.real());
          zi[static_cast<std::size_t>(n) * Q + t].add(v.imag());
        }
      }
    }
    poly.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
    for (std::size_t t = 0; t < Q; ++t) {
      Complex c = 1.0;
      for (int n = 1; n <= nmax; ++n) {
        c *= Complex(0.0, two_pi * T.q[t]) / static_cast<double>(n);
        const std::size_t at = static_cast<std::size_t>(n) * Q + t;
        poly[static_cast<std::size_t>(n)] += (c * Complex(zr[at].value(), zi[at].value())).real();
      }
    }

    inv_lambda.resize(static_cast<std::size_t>(h) + 1);
    inv_lambda[0] = 1.0;
    for (int l = 1; l <= h; ++l) inv_lambda[static_cast<std::size_t>(l)] = inv_lambda[static_cast<std::size_t>(l) - 1] / p.lambda;
    delta.resize(M);
    for (std::size_t k = 1; k <= M; ++k)
      delta[k - 1] = static_cast<double>(k) / static_cast<double>(M) * std::pow(static_cast<double>(p.b), -h);
  }
};

// Depth-first walk over codes i* j; levels below the first changed digit are reused.
class FastWalker {
 public:
  FastWalker(const SystemParams& p, const FastTables& tb)
      : p_(p), tb_(tb), o_(static_cast<std::size_t>(tb.h) + 1), y_(o_.size()), S_(o_.size() * tb.M),
        digits_(static_cast<std::size_t>(tb.h), -1), e_(tb.Q), w_(static_cast<std::size_t>(tb.head) * tb.Q),
        a_(w_.size()), psi_(tb.M) {}

  // Fills psi() and returns c for the word index.
  double visit(std::uint64_t index) {
    const int h = tb_.h;
    int first = h + 1;
    std::uint64_t v = index;
    for (int l = h; l >= 1; --l) {
      const int d = static_cast<int>(v % static_cast<std::uint64_t>(p_.b));
      v /= static_cast<std::uint64_t>(p_.b);
      if (digits_[static_cast<std::size_t>(l) - 1] != d) {
        digits_[static_cast<std::size_t>(l) - 1] = d;
        first = l;
      }
    }
    for (int l = first; l <= h; ++l) step(l);
    return leaf();
  }
  const double* psi() const { return psi_.data(); }

 private:
  void step(int l) {
    const auto L = static_cast<std::size_t>(l);
    const std::size_t M = tb_.M, Q = tb_.Q;
    const double o = (o_[L - 1] + digits_[L - 1]) / p_.b;
    o_[L] = o;
    double phi = tb_.T.c0;
    for (std::size_t t = 0; t < Q; ++t) {
      const Complex e = detail::cis_angle(2.0 * std::numbers::pi * tb_.T.q[t] * o);
      phi += (tb_.T.coef[t] * e).real();
      e_[t] = tb_.inv_lambda[L] * tb_.T.coef[t] * e;
    }
    y_[L] = p_.lambda * y_[L - 1] + phi;
    const Complex* E = tb_.E.data() + (L - 1) * M * Q;
    for (std::size_t k = 0; k < M; ++k) {
      double s = 0.0;
      for (std::size_t t = 0; t < Q; ++t) {
        const Complex a = e_[t], x = E[k * Q + t];
        s += a.real() * x.real() - a.imag() * x.imag();
      }
      S_[L * M + k] = S_[(L - 1) * M + k] - s;
    }
  }

  // Gamma_j(o + delta_k) - Gamma_j(o) and Gamma_j(o), split into direct head levels and the tail polynomial.
  double leaf() {
    const auto H = static_cast<std::size_t>(tb_.h);
    const std::size_t M = tb_.M, Q = tb_.Q, R1 = static_cast<std::size_t>(tb_.head);
    const std::size_t N = tb_.poly.size();
    const double o = o_[H];
    detail::ladder(o, p_.b, tb_.head, tb_.T.q, w_.data());
    double gam = 0.0;
    for (std::size_t r = 0; r < R1; ++r)
      for (std::size_t t = 0; t < Q; ++t) {
        const Complex bq = tb_.B[r * Q + t], w = w_[r * Q + t];
        gam += bq.real() * w.real() - bq.imag() * w.imag();
        a_[r * Q + t] = bq + bq * w;
      }
    double on = 1.0;
    for (std::size_t n = 1; n < N; ++n) {
      on *= o;
      gam += tb_.poly[n] * on;
    }
    const double scale = tb_.inv_lambda[H];
    for (std::size_t k = 0; k < M; ++k) {
      double s = 0.0;
      for (std::size_t r = 0; r < R1; ++r) {
        const Complex* E = tb_.E.data() + ((H + r) * M + k) * Q;
        const Complex* A = a_.data() + r * Q;
        for (std::size_t t = 0; t < Q; ++t) s += A[t].real() * E[t].real() - A[t].imag() * E[t].imag();
      }
      // (o + d)^n - o^n = (o + d) D_{n-1} + d o^{n-1}
      const double d = tb_.delta[k], od = o + d;
      double D = 0.0, pw = 1.0;
      for (std::size_t n = 1; n < N; ++n) {
        D = od * D + d * pw;
        pw *= o;
        s += tb_.poly[n] * D;
      }
      psi_[k] = S_[H * M + k] - scale * s;
    }
    return y_[H] + gam;
  }

  const SystemParams& p_;
  const FastTables& tb_;
  std::vector<double> o_, y_, S_;
  std::vector<int> digits_;
  std::vector<Complex> e_, w_, a_;
  std::vector<double> psi_;
};

// Cell hashing at one (height, level) pair with the scales computed once.
struct CellHasher {
  int t = 0;
  int level = 0;
  double psi_scale = 1.0;
  double c_scale = 1.0;

  CellHasher(const SystemParams& p, int t_, int level_) : t(t_), level(level_) {
    if (level < 0) throw InvalidArgument("partition level must be >= 0");
    psi_scale = scale_of(p.b, level);
    c_scale = scale_of(p.b, level + c_level_offset(p, t));
  }
  std::uint64_t psi_only(const double* psi, std::size_t M) const {
    std::uint64_t h = detail::splitmix64(static_cast<std::uint64_t>(t));
    if (level > 0)
      for (std::size_t k = 0; k < M; ++k) h = mix_in(h, cell_index(psi[k], psi_scale));
    return h;
  }
  std::uint64_t operator()(const double* psi, std::size_t M, double c) const {
    return mix_in(psi_only(psi, M), cell_index(c, c_scale));
  }
};

bool resolvable(const SystemParams& p, int t, int level, int limit) {
  return level <= limit && level + c_level_offset(p, t) <= limit;
}

}  // namespace

ContactMap make_contact_map(const SystemParams& p, const Phi& phi, const Word& i, const Code& j, double tol) {
  check_code(p, j);
  if (i.base() != p.b && !i.empty()) throw InvalidArgument("word base differs from b");
  const auto [x, y] = apply_word(p, phi, i, 0.0, 0.0);
  return ContactMap{static_cast<int>(i.size()), j.prepend(i.reversed()), y - eval_Gamma(p, phi, x, j, tol)};
}

double evaluate(const SystemParams& p, const Phi& phi, const ContactMap& psi, double x, double y, double tol) {
  return std::pow(p.lambda, psi.t) * (y - eval_Gamma(p, phi, x, psi.code, tol)) + psi.c;
}

int grid_exponent(int b, long long M) {
  if (M < 1) throw InvalidArgument("M must be a positive power of b");
  int e = 0;
  long long m = M;
  while (m % b == 0) {
    m /= b;
    ++e;
  }
  if (m != 1) throw InvalidArgument("M = " + std::to_string(M) + " is not a power of b = " + std::to_string(b));
  return e;
}

PibarCoords pibar(const SystemParams& p, const Phi& phi, const ContactMap& psi, long long M, double tol) {
  grid_exponent(p.b, M);
  PibarCoords out;
  out.t = psi.t;
  out.c = psi.c;
  out.psi.resize(static_cast<std::size_t>(M));
  for (long long k = 1; k <= M; ++k)
    out.psi[static_cast<std::size_t>(k - 1)] =
        eval_Gamma(p, phi, static_cast<double>(k) / static_cast<double>(M), psi.code, tol);
  return out;
}

int c_level_offset(const SystemParams& p, int t) {
  if (t < 0) throw InvalidArgument("height must be >= 0");
  int e = 0;
  const double m = std::frexp(p.lambda, &e);
  if (is_pow2(p.b) && m == 0.5) {
    const long long s = std::countr_zero(static_cast<unsigned>(p.b));
    return static_cast<int>(static_cast<long long>(t) * (1 - e) / s);
  }
  const long double r = -std::log(static_cast<long double>(p.lambda)) / std::log(static_cast<long double>(p.b));
  return static_cast<int>(std::floor(static_cast<long double>(t) * r));
}

std::uint64_t CellId::hash() const {
  std::uint64_t h = detail::splitmix64(static_cast<std::uint64_t>(t));
  for (auto v : idx) h = mix_in(h, v);
  return h;
}

std::string CellId::str() const {
  std::string s = "t" + std::to_string(t);
  for (auto v : idx) s += ":" + std::to_string(v);
  return s;
}

CellId partition_cell(const SystemParams& p, const PibarCoords& x, int i_level) {
  grid_exponent(p.b, static_cast<long long>(x.psi.size()));
  const CellHasher hs(p, x.t, i_level);
  CellId id;
  id.t = x.t;
  if (i_level > 0)
    for (double v : x.psi) id.idx.push_back(cell_index(v, hs.psi_scale));
  id.idx.push_back(cell_index(x.c, hs.c_scale));
  return id;
}

std::uint64_t cell_hash(const SystemParams& p, int t, const double* psi, std::size_t M, double c, int i_level) {
  return CellHasher(p, t, i_level)(psi, M, c);
}

std::uint64_t psi_cell_hash(const SystemParams& p, int t, const double* psi, std::size_t M, int i_level) {
  return CellHasher(p, t, i_level).psi_only(psi, M);
}

Word word_of_index(int b, int h, std::uint64_t index) { return Word::from_index(b, h, index).reversed(); }

EnumerationInfo enumerate_contact_maps(const SystemParams& p, const Phi& phi, const Code& j, int h, long long M,
                                       const ThetaOptions& opt, const ContactVisitor& visit) {
  check_code(p, j);
  if (h < 0) throw InvalidArgument("height must be >= 0");
  if (!(opt.tol > 0.0)) throw InvalidArgument("tol must be > 0");
  grid_exponent(p.b, M);
  if (phi.max_derivative() < 1)
    throw UnsupportedDerivative("contact maps need phi' , not available for " + phi.describe());
  const long double total_ld = std::pow(static_cast<long double>(p.b), h);
  if (total_ld > 0x1p63L) throw InvalidArgument("b^h exceeds 2^63");
  const auto total = static_cast<std::uint64_t>(total_ld);

  EnumerationInfo info;
  info.height = h;
  std::vector<std::uint64_t> chosen;
  if (total > opt.cap) {
    if (!opt.subsample)
      throw InvalidArgument("b^" + std::to_string(h) + " = " + std::to_string(total) + " maps exceed the cap " +
                            std::to_string(opt.cap) + "; enable subsampling or raise the cap");
    chosen = subsample_indices(total, opt.cap, opt.seed);
    info.subsampled = true;
  }
  info.size = info.subsampled ? chosen.size() : total;
  auto index_at = [&](std::uint64_t pos) { return info.subsampled ? chosen[pos] : pos; };

  const auto Ms = static_cast<std::size_t>(M);
  const FourierPhi* trig = opt.force_generic ? nullptr : phi.trig_form();
  if (trig) {
    const FastTables tb(p, *trig, phi.sup_bound(1), j, h, M, opt.tol);
    detail::parallel_ranges(info.size, opt.threads, [&](int, std::uint64_t begin, std::uint64_t end) {
      FastWalker walker(p, tb);
      for (std::uint64_t pos = begin; pos < end; ++pos) {
        const std::uint64_t idx = index_at(pos);
        const double c = walker.visit(idx);
        visit(pos, idx, walker.psi(), c);
      }
    });
  } else {
    detail::parallel_ranges(info.size, opt.threads, [&](int, std::uint64_t begin, std::uint64_t end) {
      std::vector<double> psi(Ms);
      for (std::uint64_t pos = begin; pos < end; ++pos) {
        const std::uint64_t idx = index_at(pos);
        const ContactMap m = make_contact_map(p, phi, word_of_index(p.b, h, idx), j, opt.tol);
        for (std::size_t k = 1; k <= Ms; ++k)
          psi[k - 1] = eval_Gamma(p, phi, static_cast<double>(k) / static_cast<double>(Ms), m.code, opt.tol);
        visit(pos, idx, psi.data(), m.c);
      }
    });
  }
  return info;
}

PibarCoords ThetaMeasure::coords(std::size_t a) const {
  PibarCoords x;
  x.t = n_hat;
  const auto Ms = static_cast<std::size_t>(M);
  x.psi.assign(psi.begin() + static_cast<std::ptrdiff_t>(a * Ms), psi.begin() + static_cast<std::ptrdiff_t>((a + 1) * Ms));
  x.c = c[a];
  return x;
}

ThetaMeasure build_theta(const SystemParams& p, const Phi& phi, const Code& j, int n, long long M,
                         const ThetaOptions& opt) {
  ThetaMeasure th;
  th.n = n;
  th.n_hat = n_hat(p, n);
  th.M = M;
  grid_exponent(p.b, M);
  const auto Ms = static_cast<std::size_t>(M);
  // Size is known before the walk starts except under subsampling, where it equals the cap.
  const long double total = std::pow(static_cast<long double>(p.b), th.n_hat);
  const std::uint64_t size =
      total > static_cast<long double>(opt.cap) ? opt.cap : static_cast<std::uint64_t>(total);
  if (size * Ms > (std::uint64_t{1} << 31)) throw InvalidArgument("theta measure too large to store");
  th.words.resize(size);
  th.psi.resize(size * Ms);
  th.c.resize(size);
  const auto info = enumerate_contact_maps(p, phi, j, th.n_hat, M, opt,
                                           [&](std::uint64_t pos, std::uint64_t idx, const double* psi, double c) {
                                             th.words[pos] = idx;
                                             std::copy(psi, psi + Ms, th.psi.begin() + static_cast<std::ptrdiff_t>(pos * Ms));
                                             th.c[pos] = c;
                                           });
  th.subsampled = info.subsampled;
  return th;
}

double hash_entropy(std::vector<std::uint64_t>& hashes, int b) {
  if (hashes.empty()) return 0.0;
  std::sort(hashes.begin(), hashes.end());
  const auto N = static_cast<double>(hashes.size());
  detail::CompensatedSum acc;
  std::size_t run = 1;
  for (std::size_t a = 1; a <= hashes.size(); ++a) {
    if (a < hashes.size() && hashes[a] == hashes[a - 1]) {
      ++run;
      continue;
    }
    const double q = static_cast<double>(run) / N;
    acc.add(-q * std::log(q));
    run = 1;
  }
  return std::max(0.0, acc.value() / std::log(static_cast<double>(b)));
}

ThetaEntropyReport theta_entropy(const SystemParams& p, const Phi& phi, const Code& j, int n,
                                 const std::vector<int>& i_levels, long long M, const ThetaOptions& opt) {
  for (int i : i_levels)
    if (i < 0) throw InvalidArgument("partition level must be >= 0");
  ThetaEntropyReport rep;
  rep.n = n;
  rep.n_hat = n_hat(p, n);
  const int t = rep.n_hat;
  const long double total = std::pow(static_cast<long double>(p.b), t);
  const std::uint64_t size = total > static_cast<long double>(opt.cap) ? opt.cap : static_cast<std::uint64_t>(total);
  std::vector<std::vector<std::uint64_t>> hashes(i_levels.size(), std::vector<std::uint64_t>(size));
  const auto Ms = static_cast<std::size_t>(M);
  std::vector<CellHasher> hs;
  for (int i : i_levels) hs.emplace_back(p, t, i);
  const auto info = enumerate_contact_maps(p, phi, j, t, M, opt,
                                           [&](std::uint64_t pos, std::uint64_t, const double* psi, double c) {
                                             for (std::size_t a = 0; a < hs.size(); ++a) hashes[a][pos] = hs[a](psi, Ms, c);
                                           });
  rep.size = info.size;
  rep.subsampled = info.subsampled;
  for (std::size_t a = 0; a < i_levels.size(); ++a) rep.rows.push_back({i_levels[a], hash_entropy(hashes[a], p.b)});
  return rep;
}

SeparationReport separation_constant_C(const SystemParams& p, const Phi& phi, const Code& j, int n_max, long long M,
                                       int C_cap, double tol) {
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  if (C_cap < 1) throw InvalidArgument("C cap must be >= 1");
  SeparationReport rep;
  rep.C_cap = C_cap;
  rep.resolvable_level = static_cast<int>(std::floor(std::log(1.0 / (100.0 * tol)) / std::log(static_cast<double>(p.b))));
  rep.separable = true;
  ThetaOptions opt;
  opt.tol = tol;
  const auto Ms = static_cast<std::size_t>(M);
  for (int n = 1; n <= n_max; ++n) {
    const ThetaMeasure th = build_theta(p, phi, j, n, M, opt);
    const std::size_t N = th.size();
    int found = -1;
    std::vector<std::pair<std::size_t, std::size_t>> clash;
    for (int C = 1; C <= C_cap; ++C) {
      const int level = C * n;
      if (!resolvable(p, th.n_hat, level, rep.resolvable_level)) break;
      const CellHasher hs(p, th.n_hat, level);
      std::vector<std::pair<std::uint64_t, std::size_t>> keys(N);
      for (std::size_t a = 0; a < N; ++a) keys[a] = {hs(th.psi.data() + a * Ms, Ms, th.c[a]), a};
      std::sort(keys.begin(), keys.end());
      clash.clear();
      for (std::size_t a = 1; a < N; ++a) {
        if (keys[a].first != keys[a - 1].first) continue;
        if (partition_cell(p, th.coords(keys[a].second), level) == partition_cell(p, th.coords(keys[a - 1].second), level))
          clash.emplace_back(keys[a - 1].second, keys[a].second);
      }
      if (clash.empty()) {
        found = C;
        break;
      }
    }
    rep.C_per_n.push_back(found);
    if (found < 0) {
      rep.separable = false;
      for (std::size_t a = 0; a < clash.size() && rep.failures.size() < 8; ++a)
        rep.failures.emplace_back(word_of_index(p.b, th.n_hat, th.words[clash[a].first]).str(),
                                  word_of_index(p.b, th.n_hat, th.words[clash[a].second]).str());
    } else {
      rep.C = std::max(rep.C, found);
    }
  }
  if (!rep.separable) rep.C = 0;
  return rep;
}

BadicHistogram eta_dot(const SystemParams& p, const Phi& phi, const std::vector<std::pair<ContactMap, double>>& eta,
                       const std::vector<std::pair<double, double>>& samples, int level, double tol) {
  if (eta.empty()) throw InvalidArgument("eta must have at least one atom");
  if (samples.empty()) throw InvalidArgument("need at least one sample point");
  const double s = scale_of(p.b, level);
  std::vector<BadicHistogram::Cell> cells;
  cells.reserve(eta.size() * samples.size());
  const double per = 1.0 / static_cast<double>(samples.size());
  for (const auto& [m, w] : eta) {
    if (w < 0.0) throw InvalidArgument("eta weights must be >= 0");
    for (const auto& [x, y] : samples) cells.push_back({cell_index(evaluate(p, phi, m, x, y, tol), s), 0, w * per});
  }
  return BadicHistogram(p.b, 1, level, std::move(cells));
}

BadicHistogram convolve(const BadicHistogram& a, const BadicHistogram& b) {
  if (a.dim() != 1 || b.dim() != 1) throw InvalidArgument("convolution needs 1D histograms");
  if (a.base() != b.base() || a.level() != b.level()) throw InvalidArgument("convolution needs a common base and level");
  std::vector<BadicHistogram::Cell> cells;
  cells.reserve(a.size() * b.size());
  for (const auto& u : a.cells())
    for (const auto& v : b.cells()) cells.push_back({u.x + v.x, 0, u.mass * v.mass});
  return BadicHistogram(a.base(), 1, a.level(), std::move(cells));
}

ConvolutionGain convolution_entropy_gain(const BadicHistogram& theta, const BadicHistogram& tau, int n, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (n < 0) throw InvalidArgument("n must be >= 0");
  for (const auto* h : {&theta, &tau}) {
    if (h->dim() != 1 || h->level() != n + k) throw InvalidArgument("histograms must be 1D at level n + k");
    if (h->empty()) throw InvalidArgument("empty histogram");
    // atoms sit at left endpoints, so the diameter is the index span times b^-(n+k)
    const std::int64_t span = h->cells().back().x - h->cells().front().x;
    if (span > detail::ipow(h->base(), k))
      throw PreconditionError("support diameter exceeds b^-n (" + std::to_string(span) + " cells at level n+k)");
  }
  ConvolutionGain g;
  g.H_theta = theta.entropy();
  g.H_tau = tau.entropy();
  g.H_conv = convolve(theta.normalized(), tau.normalized()).entropy();
  g.gain = (g.H_conv - g.H_tau) / k;
  return g;
}

ExperimentReport entropy_increase_experiment(const SystemParams& p, const Phi& phi, const Code& j, int n, int i_level,
                                             int k, long long M, std::uint64_t seed, const ExperimentOptions& opt) {
  if (n < 0 || i_level < 0) throw InvalidArgument("n and i_level must be >= 0");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (opt.u_samples < 1 || opt.x_samples < 1 || opt.max_atoms < 2 || opt.max_components < 1)
    throw InvalidArgument("experiment sample counts must be positive (max_atoms >= 2)");
  ExperimentReport rep;
  rep.n = n;
  rep.i_level = i_level;
  rep.k = k;
  rep.M = M;
  const ThetaMeasure th = build_theta(p, phi, j, n, M, opt.theta);
  const int t = th.n_hat;
  const auto Ms = static_cast<std::size_t>(M);
  const std::size_t N = th.size();

  const CellHasher coarse_hash(p, t, i_level), fine_hash(p, t, i_level + k);
  std::vector<std::pair<std::uint64_t, std::size_t>> keys(N);
  for (std::size_t a = 0; a < N; ++a) keys[a] = {coarse_hash(th.psi.data() + a * Ms, Ms, th.c[a]), a};
  std::sort(keys.begin(), keys.end());

  struct Comp {
    std::vector<std::size_t> atoms;
    double H_eta = 0.0;
    double H_psi = 0.0;
  };
  std::vector<Comp> selected;
  for (std::size_t a = 0; a < N;) {
    std::size_t e = a;
    while (e < N && keys[e].first == keys[a].first) ++e;
    ++rep.components;
    if (e - a < 2) {
      ++rep.skipped;
      a = e;
      continue;
    }
    Comp comp;
    std::vector<std::uint64_t> he, hp;
    for (std::size_t q = a; q < e; ++q) {
      const std::size_t id = keys[q].second;
      comp.atoms.push_back(id);
      he.push_back(fine_hash(th.psi.data() + id * Ms, Ms, th.c[id]));
      hp.push_back(fine_hash.psi_only(th.psi.data() + id * Ms, Ms));
    }
    comp.H_eta = hash_entropy(he, p.b) / k;
    comp.H_psi = hash_entropy(hp, p.b) / k;
    rep.max_H_psi = std::max(rep.max_H_psi, comp.H_psi);
    if (comp.H_psi > opt.eta_threshold) ++rep.h_type_components;
    if (comp.H_eta > opt.eta_threshold) selected.push_back(std::move(comp));
    a = e;
  }
  rep.selected = selected.size();

  std::mt19937_64 rng(seed);
  if (selected.size() > static_cast<std::size_t>(opt.max_components)) {
    std::shuffle(selected.begin(), selected.end(), rng);
    selected.resize(static_cast<std::size_t>(opt.max_components));
  }
  if (selected.empty()) return rep;

  const ProjectionBank bank(p, phi, {j}, opt.theta.tol);
  const int i_hat = n_hat(p, i_level);
  const long double bh = std::pow(static_cast<long double>(p.b), -t);
  const long double bi = std::pow(static_cast<long double>(p.b), -i_hat);
  const int fine = i_level + k + n, coarse = i_level + n;
  const auto xs = static_cast<std::size_t>(opt.x_samples);

  for (std::size_t cid = 0; cid < selected.size(); ++cid) {
    auto& comp = selected[cid];
    if (comp.atoms.size() > static_cast<std::size_t>(opt.max_atoms)) {
      std::shuffle(comp.atoms.begin(), comp.atoms.end(), rng);
      comp.atoms.resize(static_cast<std::size_t>(opt.max_atoms));
    }
    double gain = 0.0;
    for (int us = 0; us < opt.u_samples; ++us) {
      std::vector<std::uint8_t> ud(static_cast<std::size_t>(i_hat));
      for (auto& d : ud) d = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(p.b));
      const long double addr_u = Word(p.b, ud).address();
      const std::uint64_t xseed = rng();
      std::vector<double> all;
      all.reserve(comp.atoms.size() * xs);
      double q_tilde = 0.0;
      for (std::size_t id : comp.atoms) {
        const long double addr_w = word_of_index(p.b, t, th.words[id]).address();
        std::vector<double> vals(xs);
        for (std::size_t s = 0; s < xs; ++s) {
          const long double x = (static_cast<long double>(s) + detail::unit_from(xseed, s)) / static_cast<long double>(xs);
          const auto xx = static_cast<double>(addr_w + bh * (addr_u + x * bi));
          double v = 0.0;
          bank.project_graph(xx, &v);
          vals[s] = v;
        }
        q_tilde += BadicHistogram::from_values(p.b, fine, vals).conditional_entropy(coarse) / k;
        all.insert(all.end(), vals.begin(), vals.end());
      }
      q_tilde /= static_cast<double>(comp.atoms.size());
      const double Q = BadicHistogram::from_values(p.b, fine, all).conditional_entropy(coarse) / k;
      gain += Q - q_tilde;
    }
    rep.rows.push_back({cid, comp.atoms.size(), comp.H_eta, comp.H_psi, gain / opt.u_samples});
  }
  std::size_t pos = 0;
  for (const auto& r : rep.rows)
    if (r.gain > opt.gain_threshold) ++pos;
  rep.positive_fraction = static_cast<double>(pos) / static_cast<double>(rep.rows.size());
  return rep;
}

std::string to_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "n,i_level,k,component_id,H_eta,gain\n";
  for (const auto& row : r.rows)
    os << r.n << ',' << r.i_level << ',' << r.k << ',' << row.component_id << ',' << fmt(row.H_eta) << ','
       << fmt(row.gain) << '\n';
  return os.str();
}

std::string partition_dump(const SystemParams& p, const ThetaMeasure& theta, int i_level) {
  std::ostringstream os;
  os << "word,t,cell_id\n";
  for (std::size_t a = 0; a < theta.size(); ++a) {
    const std::string w = theta.n_hat == 0 ? std::string("-") : word_of_index(p.b, theta.n_hat, theta.words[a]).str();
    os << w << ',' << theta.n_hat << ',' << partition_cell(p, theta.coords(a), i_level).str() << '\n';
  }
  return os.str();
}

}  // namespace weier
