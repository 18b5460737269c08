#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weier/phase.hpp"

namespace weier {

using Complex = std::complex<double>;

// |c_k| <= constant * rate^|k| for every frequency not stored explicitly.
struct DecayBound {
  double rate = 0.0;
  double constant = 0.0;
  bool operator==(const DecayBound&) const = default;
};

class FourierPhi {
 public:
  static constexpr double kZeroThreshold = 1e-15;

  FourierPhi() = default;
  FourierPhi(std::map<int, Complex> coeffs, bool real_valued,
             std::optional<DecayBound> decay = std::nullopt);

  static FourierPhi constant(double c);
  // amplitude * cos(2 pi freq x + theta)
  static FourierPhi cosine(int freq = 1, double theta = 0.0, double amplitude = 1.0);

  const std::map<int, Complex>& coeffs() const { return coeffs_; }
  Complex coeff(int k) const;
  bool real_valued() const { return real_; }
  const std::optional<DecayBound>& decay() const { return decay_; }
  bool finitely_supported() const { return !decay_.has_value(); }
  bool is_zero() const { return coeffs_.empty() && !decay_; }
  int max_frequency() const;

  // k-th derivative; real part when the function is complex valued.
  double eval(Phase x, int k = 0) const;
  double eval(double x, int k = 0) const { return eval(Phase::from_real(x), k); }
  // Sum restricted to |frequency| <= K.
  double eval_truncated(double x, int K) const;
  // Bound on |eval - eval_truncated(K)| coming from the declared decay.
  double tail_bound(int K) const;
  double sup_bound(int k) const;
  // phi(o + h) - phi(o) without cancellation for small h.
  double diff(double o, double h) const;

  FourierPhi scaled(double a) const;
  friend FourierPhi operator+(const FourierPhi& a, const FourierPhi& b);
  friend FourierPhi operator-(const FourierPhi& a, const FourierPhi& b);
  bool operator==(const FourierPhi&) const = default;

 private:
  void canonicalize();

  std::map<int, Complex> coeffs_;
  bool real_ = true;
  std::optional<DecayBound> decay_;
};

class PiecewisePhi {
 public:
  enum class Kind { triangle, rademacher, polynomial };

  // Polynomial in the absolute variable x on [lo, hi), coefficients in
  // increasing degree.
  struct Piece {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> poly;
  };

  static PiecewisePhi triangle();
  static PiecewisePhi rademacher();
  // continuity = r means C^r across breakpoints (-1 for jumps).
  static PiecewisePhi polynomial(std::vector<Piece> pieces, int continuity);

  Kind kind() const { return kind_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  int continuity() const { return continuity_; }
  // Highest derivative order accepted by eval; the top order is taken as a
  // right limit at breakpoints.
  int max_derivative() const { return continuity_ + 1; }

  double eval(double x, int k = 0) const;
  double diff(double o, double h) const;
  double sup_bound(int k) const;

 private:
  PiecewisePhi(Kind kind, std::vector<Piece> pieces, int continuity);
  std::size_t locate(double f) const;
  double piece_value(std::size_t i, double x, int k) const;
  double piece_step(std::size_t i, double a, double d) const;

  Kind kind_ = Kind::polynomial;
  std::vector<Piece> pieces_;
  int continuity_ = 0;
};

// The Z-periodic driving function.
class Phi {
 public:
  struct Cosine {
    double theta = 0.0;
  };

  static constexpr int kAnalytic = 1 << 20;

  Phi();
  Phi(FourierPhi f);
  Phi(PiecewisePhi p);
  static Phi cosine(double theta = 0.0);

  double value(Phase x) const;
  double value(double x) const { return deriv(x, 0); }
  double deriv(double x, int k) const;
  double diff(double o, double h) const;
  double sup_bound(int k) const;
  int max_derivative() const;
  bool is_zero() const;

  // Exact finite trigonometric form when one exists (cosine, finite Fourier).
  const FourierPhi* trig_form() const { return trig_ ? &*trig_ : nullptr; }
  FourierPhi to_fourier() const;

  const std::variant<Cosine, FourierPhi, PiecewisePhi>& rep() const { return rep_; }
  std::string describe() const;

 private:
  std::variant<Cosine, FourierPhi, PiecewisePhi> rep_;
  std::optional<FourierPhi> trig_;
};

double eval_phi(const Phi& phi, double x, int k = 0);

FourierPhi renormalize(const FourierPhi& phi, int p);
FourierPhi pre_renormalize(const FourierPhi& phi, int p);
FourierPhi s_p(const FourierPhi& phi, int p);
FourierPhi rescale(const FourierPhi& phi, int p);
FourierPhi phi_from_W0(const FourierPhi& w0, int b, double lambda);

// `k re im` lines, '#' comments.
std::string to_text(const FourierPhi& phi);
FourierPhi parse_fourier_text(const std::string& text);

// Keywords: cos [theta=<v>], triangle, rademacher, const:<c>, zero.
Phi parse_builtin(const std::string& spec);

}  // namespace weier
