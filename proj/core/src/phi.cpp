#include "weier/phi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "weier/errors.hpp"
#include "weier/format.hpp"
#include "weier/params.hpp"

namespace weier {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_p(int p, int min) {
  if (p < min) throw InvalidArgument("p must be at least " + std::to_string(min) + ", got " + std::to_string(p));
}

// i^k * (2 pi m)^k
Complex deriv_factor(int m, int k) {
  if (k == 0) return 1.0;
  const double mag = std::pow(kTwoPi * m, k);
  switch (k % 4) {
    case 0: return {mag, 0.0};
    case 1: return {0.0, mag};
    case 2: return {-mag, 0.0};
    default: return {0.0, -mag};
  }
}

}  // namespace

// ---------------------------------------------------------------- FourierPhi

FourierPhi::FourierPhi(std::map<int, Complex> coeffs, bool real_valued, std::optional<DecayBound> decay)
    : coeffs_(std::move(coeffs)), real_(real_valued), decay_(decay) {
  if (decay_ && !(decay_->rate > 0.0 && decay_->rate < 1.0 && decay_->constant >= 0.0))
    throw InvalidArgument("decay rate must lie in (0,1) with nonnegative constant");
  if (real_) {
    double scale = 0.0;
    for (auto& [k, c] : coeffs_) scale = std::max(scale, std::abs(c));
    for (auto& [k, c] : coeffs_) {
      if (k < 0) continue;
      auto it = coeffs_.find(-k);
      const Complex partner = it == coeffs_.end() ? Complex{} : it->second;
      if (std::abs(partner - std::conj(c)) > 1e-12 * std::max(scale, 1e-300))
        throw InvalidArgument("real-valued FourierPhi needs c_{-k} = conj(c_k) at k=" + std::to_string(k));
    }
    std::map<int, Complex> sym;
    for (auto& [k, c] : coeffs_) {
      if (k == 0) sym[0] = {c.real(), 0.0};
      else if (k > 0) {
        sym[k] = c;
        sym[-k] = std::conj(c);
      }
    }
    coeffs_ = std::move(sym);
  }
  canonicalize();
}

void FourierPhi::canonicalize() {
  double scale = 0.0;
  for (auto& [k, c] : coeffs_) scale = std::max(scale, std::abs(c));
  const double cut = kZeroThreshold * scale;
  std::erase_if(coeffs_, [&](const auto& kv) { return std::abs(kv.second) <= cut; });
}

FourierPhi FourierPhi::constant(double c) { return FourierPhi({{0, c}}, true); }

FourierPhi FourierPhi::cosine(int freq, double theta, double amplitude) {
  if (freq == 0) return constant(amplitude * std::cos(theta));
  const Complex h = 0.5 * amplitude * std::polar(1.0, theta);
  if (freq < 0) return FourierPhi({{-freq, std::conj(h)}, {freq, h}}, true);
  return FourierPhi({{freq, h}, {-freq, std::conj(h)}}, true);
}

Complex FourierPhi::coeff(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? Complex{} : it->second;
}

int FourierPhi::max_frequency() const {
  int m = 0;
  for (auto& [k, c] : coeffs_) m = std::max(m, std::abs(k));
  return m;
}

double FourierPhi::eval(Phase x, int k) const {
  double re = 0.0;
  if (real_) {
    for (auto it = coeffs_.lower_bound(0); it != coeffs_.end(); ++it) {
      const auto [m, c] = *it;
      double cs, sn;
      cis(x.times(m), cs, sn);
      const Complex t = c * deriv_factor(m, k) * Complex(cs, sn);
      re += m == 0 ? t.real() : 2.0 * t.real();
    }
    return re;
  }
  for (auto [m, c] : coeffs_) {
    double cs, sn;
    cis(x.times(m), cs, sn);
    re += (c * deriv_factor(m, k) * Complex(cs, sn)).real();
  }
  return re;
}

double FourierPhi::eval_truncated(double x, int K) const {
  const Phase p = Phase::from_real(x);
  double re = 0.0;
  for (auto [m, c] : coeffs_) {
    if (std::abs(m) > K) continue;
    double cs, sn;
    cis(p.times(m), cs, sn);
    re += (c * Complex(cs, sn)).real();
  }
  return re;
}

double FourierPhi::tail_bound(int K) const {
  double t = 0.0;
  for (auto [m, c] : coeffs_)
    if (std::abs(m) > K) t += std::abs(c);
  if (decay_) {
    const int from = std::max(K, max_frequency());
    t += decay_->constant * std::pow(decay_->rate, from + 1) / (1.0 - decay_->rate);
  }
  return t;
}

double FourierPhi::sup_bound(int k) const {
  double s = 0.0;
  for (auto [m, c] : coeffs_) s += std::abs(c) * std::pow(kTwoPi * std::abs(m), k);
  if (decay_) {
    const int from = max_frequency() + 1;
    if (k == 0) {
      s += decay_->constant * std::pow(decay_->rate, from) / (1.0 - decay_->rate);
    } else {
      double term = 1.0;
      for (int m = from; term > 1e-18 * std::max(s, 1.0) || m < from + 8; ++m) {
        term = decay_->constant * std::pow(decay_->rate, m) * std::pow(kTwoPi * m, k);
        s += term;
        if (m > from + 100000) break;
      }
    }
  }
  return s;
}

double FourierPhi::diff(double o, double h) const {
  if (h == 0.0) return 0.0;
  // e^{2 pi i m (o+h)} - e^{2 pi i m o} = 2i sin(pi m h) e^{2 pi i m (o + h/2)}
  const Phase mid = Phase::from_real(o + 0.5 * h);
  double re = 0.0;
  for (auto [m, c] : coeffs_) {
    if (m == 0 || (real_ && m < 0)) continue;
    double cs, sn;
    cis(mid.times(m), cs, sn);
    const double s = std::sin(std::numbers::pi * m * h);
    const Complex t = c * Complex(0.0, 2.0 * s) * Complex(cs, sn);
    re += real_ ? 2.0 * t.real() : t.real();
  }
  return re;
}

FourierPhi FourierPhi::scaled(double a) const {
  std::map<int, Complex> out;
  for (auto [m, c] : coeffs_) out[m] = a * c;
  std::optional<DecayBound> d = decay_;
  if (d) d->constant *= std::fabs(a);
  if (a == 0.0) return FourierPhi({}, real_);
  return FourierPhi(std::move(out), real_, d);
}

namespace {
FourierPhi combine(const FourierPhi& a, const FourierPhi& b, double sign) {
  std::map<int, Complex> out = a.coeffs();
  for (auto [m, c] : b.coeffs()) out[m] += sign * c;
  std::optional<DecayBound> d;
  if (a.decay() || b.decay()) {
    DecayBound x = a.decay().value_or(DecayBound{0.5, 0.0});
    DecayBound y = b.decay().value_or(DecayBound{0.5, 0.0});
    d = DecayBound{std::max(x.rate, y.rate), x.constant + y.constant};
  }
  return FourierPhi(std::move(out), a.real_valued() && b.real_valued(), d);
}
}  // namespace

FourierPhi operator+(const FourierPhi& a, const FourierPhi& b) { return combine(a, b, 1.0); }
FourierPhi operator-(const FourierPhi& a, const FourierPhi& b) { return combine(a, b, -1.0); }

FourierPhi renormalize(const FourierPhi& phi, int p) {
  check_p(p, 2);
  std::map<int, Complex> out;
  for (auto [m, c] : phi.coeffs())
    if (m % p == 0) out[m / p] = c;
  return FourierPhi(std::move(out), phi.real_valued());
}

FourierPhi pre_renormalize(const FourierPhi& phi, int p) {
  check_p(p, 2);
  std::map<int, Complex> out;
  for (auto [m, c] : phi.coeffs())
    if (m % p == 0) out[m] = c;
  return FourierPhi(std::move(out), phi.real_valued());
}

FourierPhi s_p(const FourierPhi& phi, int p) {
  check_p(p, 2);
  std::map<int, Complex> out;
  for (auto [m, c] : phi.coeffs())
    if (m % p != 0) out[m] = c;
  return FourierPhi(std::move(out), phi.real_valued());
}

FourierPhi rescale(const FourierPhi& phi, int p) {
  check_p(p, 1);
  std::map<int, Complex> out;
  for (auto [m, c] : phi.coeffs()) out[m * p] = c;
  return FourierPhi(std::move(out), phi.real_valued());
}

FourierPhi phi_from_W0(const FourierPhi& w0, int b, double lambda) {
  (void)make_params(b, lambda);
  if (!w0.finitely_supported()) throw InvalidArgument("phi_from_W0 needs a finitely supported W0");
  std::map<int, Complex> out;
  for (auto [m, c] : w0.coeffs()) out[m] += c;
  for (auto [m, c] : w0.coeffs()) out[m * b] -= lambda * c;
  return FourierPhi(std::move(out), w0.real_valued());
}

std::string to_text(const FourierPhi& phi) {
  std::ostringstream os;
  if (phi.decay()) os << "# decay " << fmt(phi.decay()->rate) << ' ' << fmt(phi.decay()->constant) << '\n';
  for (auto [m, c] : phi.coeffs()) os << m << ' ' << fmt(c.real()) << ' ' << fmt(c.imag()) << '\n';
  return os.str();
}

FourierPhi parse_fourier_text(const std::string& text) {
  std::map<int, Complex> coeffs;
  std::optional<DecayBound> decay;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.rfind("# decay", 0) == 0) {
      std::istringstream ds(t.substr(7));
      DecayBound d;
      if (!(ds >> d.rate >> d.constant)) throw InvalidArgument("bad decay line " + std::to_string(lineno));
      decay = d;
      continue;
    }
    if (auto h = t.find('#'); h != std::string::npos) t = trim(t.substr(0, h));
    if (t.empty()) continue;
    std::istringstream ls(t);
    std::string ks, rs, is2;
    if (!(ls >> ks >> rs >> is2)) throw InvalidArgument("expected `k re im` on line " + std::to_string(lineno));
    coeffs[static_cast<int>(parse_int(ks))] += Complex(parse_double(rs), parse_double(is2));
  }
  bool real = true;
  for (auto [m, c] : coeffs) {
    auto it = coeffs.find(-m);
    const Complex partner = it == coeffs.end() ? Complex{} : it->second;
    if (std::abs(partner - std::conj(c)) > 1e-14 * std::max(1.0, std::abs(c))) real = false;
  }
  return FourierPhi(std::move(coeffs), real, decay);
}

// -------------------------------------------------------------- PiecewisePhi

namespace {

double horner(const std::vector<double>& p, double x) {
  double r = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

std::vector<double> derivative(std::vector<double> p, int k) {
  for (int j = 0; j < k; ++j) {
    if (p.size() <= 1) return {0.0};
    std::vector<double> d(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<double>(i);
    p = std::move(d);
  }
  return p;
}

}  // namespace

PiecewisePhi::PiecewisePhi(Kind kind, std::vector<Piece> pieces, int continuity)
    : kind_(kind), pieces_(std::move(pieces)), continuity_(continuity) {}

PiecewisePhi PiecewisePhi::triangle() {
  return PiecewisePhi(Kind::triangle, {{0.0, 0.5, {0.0, 1.0}}, {0.5, 1.0, {1.0, -1.0}}}, 0);
}

PiecewisePhi PiecewisePhi::rademacher() {
  return PiecewisePhi(Kind::rademacher, {{0.0, 0.5, {1.0}}, {0.5, 1.0, {-1.0}}}, -1);
}

PiecewisePhi PiecewisePhi::polynomial(std::vector<Piece> pieces, int continuity) {
  if (pieces.empty()) throw InvalidArgument("piecewise phi needs at least one piece");
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  if (pieces.front().lo != 0.0 || pieces.back().hi != 1.0)
    throw InvalidArgument("pieces must tile [0,1)");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!(pieces[i].lo < pieces[i].hi)) throw InvalidArgument("empty piece interval");
    if (i + 1 < pieces.size() && pieces[i].hi != pieces[i + 1].lo)
      throw InvalidArgument("pieces must tile [0,1) without gaps or overlap");
    if (pieces[i].poly.empty()) pieces[i].poly = {0.0};
  }
  if (continuity < -1) throw InvalidArgument("continuity must be >= -1");
  PiecewisePhi out(Kind::polynomial, std::move(pieces), continuity);
  // verify the declared continuity, including the wrap at 1 ~ 0
  const auto& ps = out.pieces_;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& a = ps[i];
    const auto& b = ps[(i + 1) % ps.size()];
    const double xb = i + 1 < ps.size() ? b.lo : 0.0;
    for (int k = 0; k <= continuity; ++k) {
      const double left = horner(derivative(a.poly, k), a.hi);
      const double right = horner(derivative(b.poly, k), xb);
      if (std::fabs(left - right) > 1e-9 * std::max(1.0, std::fabs(left)))
        throw InvalidArgument("declared continuity C^" + std::to_string(continuity) + " fails at breakpoint " +
                              fmt(a.hi));
    }
  }
  return out;
}

std::size_t PiecewisePhi::locate(double f) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), f, [](double v, const Piece& p) { return v < p.lo; });
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - pieces_.begin()) - 1));
}

double PiecewisePhi::piece_value(std::size_t i, double x, int k) const {
  if (k == 0) return horner(pieces_[i].poly, x);
  return horner(derivative(pieces_[i].poly, k), x);
}

// p(a + d) - p(a) from the Taylor coefficients at a.
double PiecewisePhi::piece_step(std::size_t i, double a, double d) const {
  const auto& p = pieces_[i].poly;
  double r = 0.0, fact = 1.0;
  std::vector<double> q = p;
  std::vector<double> terms;
  for (std::size_t j = 1; j < p.size(); ++j) {
    q = derivative(q, 1);
    fact *= static_cast<double>(j);
    terms.push_back(horner(q, a) / fact);
  }
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) r = (r + *it) * d;
  return r;
}

double PiecewisePhi::eval(double x, int k) const {
  if (k < 0) throw InvalidArgument("derivative order must be >= 0");
  if (k > max_derivative())
    throw UnsupportedDerivative("derivative order " + std::to_string(k) + " exceeds smoothness of piecewise phi");
  const double f = x - std::floor(x);
  if (kind_ == Kind::triangle && k == 0) return f < 0.5 ? f : 1.0 - f;
  return piece_value(locate(f), f, k);
}

double PiecewisePhi::diff(double o, double h) const {
  if (h == 0.0) return 0.0;
  if (std::fabs(h) >= 0.5) return eval(o + h) - eval(o);
  const double s0 = std::floor(o);
  double cur = o - s0;
  double shift = 0.0;
  std::size_t idx = locate(cur);
  const double end = cur + h;
  const std::size_t n = pieces_.size();
  double total = 0.0;
  if (h > 0) {
    for (;;) {
      const double hi_abs = pieces_[idx].hi + shift;
      if (end < hi_abs) {
        total += piece_step(idx, cur - shift, end - cur);
        break;
      }
      total += piece_step(idx, cur - shift, hi_abs - cur);
      const std::size_t nxt = (idx + 1) % n;
      const double nshift = nxt == 0 ? shift + 1.0 : shift;
      total += piece_value(nxt, pieces_[nxt].lo, 0) - piece_value(idx, pieces_[idx].hi, 0);
      cur = hi_abs;
      idx = nxt;
      shift = nshift;
      if (end == hi_abs) break;
    }
  } else {
    for (;;) {
      const double lo_abs = pieces_[idx].lo + shift;
      if (end >= lo_abs) {
        total += piece_step(idx, cur - shift, end - cur);
        break;
      }
      total += piece_step(idx, cur - shift, lo_abs - cur);
      const std::size_t prv = idx == 0 ? n - 1 : idx - 1;
      const double pshift = idx == 0 ? shift - 1.0 : shift;
      total += piece_value(prv, pieces_[prv].hi, 0) - piece_value(idx, pieces_[idx].lo, 0);
      cur = lo_abs;
      idx = prv;
      shift = pshift;
    }
  }
  return total;
}

double PiecewisePhi::sup_bound(int k) const {
  if (kind_ == Kind::triangle) return k == 0 ? 0.5 : (k == 1 ? 1.0 : 0.0);
  if (kind_ == Kind::rademacher) return k == 0 ? 1.0 : 0.0;
  double s = 0.0;
  for (const auto& p : pieces_) {
    // bound in the local variable u = x - lo on [0, hi - lo]
    auto d = derivative(p.poly, k);
    double bound = 0.0, fact = 1.0, w = p.hi - p.lo;
    std::vector<double> q = d;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j > 0) {
        q = derivative(q, 1);
        fact *= static_cast<double>(j);
      }
      bound += std::fabs(horner(q, p.lo)) / fact * std::pow(w, static_cast<double>(j));
    }
    s = std::max(s, bound);
  }
  return s;
}

// ----------------------------------------------------------------------- Phi

Phi::Phi() : rep_(FourierPhi{}), trig_(FourierPhi{}) {}

Phi::Phi(FourierPhi f) : rep_(f) {
  if (f.finitely_supported()) trig_ = std::move(f);
}

Phi::Phi(PiecewisePhi p) : rep_(std::move(p)) {}

Phi Phi::cosine(double theta) {
  Phi out;
  out.rep_ = Cosine{theta};
  out.trig_ = FourierPhi::cosine(1, theta);
  return out;
}

double Phi::value(Phase x) const {
  if (auto* c = std::get_if<Cosine>(&rep_)) return std::cos(kTwoPi * x.centered() + c->theta);
  if (auto* f = std::get_if<FourierPhi>(&rep_)) return f->eval(x, 0);
  return std::get<PiecewisePhi>(rep_).eval(x.unit(), 0);
}

double Phi::deriv(double x, int k) const {
  if (k < 0) throw InvalidArgument("derivative order must be >= 0");
  if (auto* c = std::get_if<Cosine>(&rep_)) {
    const double a = kTwoPi * Phase::from_real(x).centered() + c->theta;
    const double scale = std::pow(kTwoPi, k);
    switch (k % 4) {
      case 0: return scale * std::cos(a);
      case 1: return -scale * std::sin(a);
      case 2: return -scale * std::cos(a);
      default: return scale * std::sin(a);
    }
  }
  if (auto* f = std::get_if<FourierPhi>(&rep_)) return f->eval(x, k);
  return std::get<PiecewisePhi>(rep_).eval(x, k);
}

double Phi::diff(double o, double h) const {
  if (h == 0.0) return 0.0;
  if (auto* c = std::get_if<Cosine>(&rep_)) {
    const double a = kTwoPi * Phase::from_real(o + 0.5 * h).centered() + c->theta;
    return -2.0 * std::sin(std::numbers::pi * h) * std::sin(a);
  }
  if (auto* f = std::get_if<FourierPhi>(&rep_)) return f->diff(o, h);
  return std::get<PiecewisePhi>(rep_).diff(o, h);
}

double Phi::sup_bound(int k) const {
  if (std::holds_alternative<Cosine>(rep_)) return std::pow(kTwoPi, k);
  if (auto* f = std::get_if<FourierPhi>(&rep_)) return f->sup_bound(k);
  return std::get<PiecewisePhi>(rep_).sup_bound(k);
}

int Phi::max_derivative() const {
  if (auto* p = std::get_if<PiecewisePhi>(&rep_)) return p->max_derivative();
  return kAnalytic;
}

bool Phi::is_zero() const {
  if (auto* f = std::get_if<FourierPhi>(&rep_)) return f->is_zero();
  return false;
}

FourierPhi Phi::to_fourier() const {
  if (trig_) return *trig_;
  if (auto* f = std::get_if<FourierPhi>(&rep_)) return *f;
  throw InvalidArgument("phi has no Fourier representation: " + describe());
}

std::string Phi::describe() const {
  if (auto* c = std::get_if<Cosine>(&rep_)) return c->theta == 0.0 ? "cos" : "cos theta=" + fmt(c->theta);
  if (auto* p = std::get_if<PiecewisePhi>(&rep_)) {
    switch (p->kind()) {
      case PiecewisePhi::Kind::triangle: return "triangle";
      case PiecewisePhi::Kind::rademacher: return "rademacher";
      default: return "piecewise(" + std::to_string(p->pieces().size()) + " pieces)";
    }
  }
  const auto& f = std::get<FourierPhi>(rep_);
  if (f.is_zero()) return "zero";
  std::string s = "fourier{";
  bool first = true;
  for (auto [m, c] : f.coeffs()) {
    if (!first) s += ';';
    first = false;
    s += std::to_string(m) + ':' + fmt(c.real()) + ',' + fmt(c.imag());
  }
  return s + '}';
}

double eval_phi(const Phi& phi, double x, int k) {
  if (k > phi.max_derivative())
    throw UnsupportedDerivative("derivative order " + std::to_string(k) + " not supported by " + phi.describe());
  return phi.deriv(x, k);
}

Phi parse_builtin(const std::string& spec) {
  const std::string s = trim(spec);
  if (s == "zero" || s == "0") return Phi{};
  if (s == "triangle") return Phi(PiecewisePhi::triangle());
  if (s == "rademacher") return Phi(PiecewisePhi::rademacher());
  if (s.rfind("const:", 0) == 0) return Phi(FourierPhi::constant(parse_double(s.substr(6))));
  if (s.rfind("cos", 0) == 0) {
    double theta = 0.0;
    std::istringstream is(s.substr(3));
    std::string tok;
    while (is >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos || trim(tok.substr(0, eq)) != "theta")
        throw InvalidArgument("unknown cos option '" + tok + "'");
      theta = parse_double(tok.substr(eq + 1));
    }
    return Phi::cosine(theta);
  }
  throw InvalidArgument("unknown phi '" + s + "' (expected cos, triangle, rademacher, const:<c>, zero)");
}

}  // namespace weier
