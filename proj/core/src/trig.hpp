#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "weier/phi.hpp"

namespace weier::detail {

// phi(u) = c0 + Re sum_t coef[t] e^{2 pi i q[t] u}. For real phi only q > 0 is kept
// and the conjugate half is folded into coef.
struct TrigTerms {
  double c0 = 0.0;
  std::vector<int> q;
  std::vector<Complex> coef;

  explicit TrigTerms(const FourierPhi& f) {
    c0 = f.coeff(0).real();
    for (const auto& [m, c] : f.coeffs()) {
      if (m == 0) continue;
      if (f.real_valued()) {
        if (m < 0) continue;
        q.push_back(m);
        coef.push_back(2.0 * c);
      } else {
        q.push_back(m);
        coef.push_back(c);
      }
    }
  }
  std::size_t size() const { return q.size(); }
  int max_q() const {
    int r = 0;
    for (int v : q) r = std::max(r, std::abs(v));
    return r;
  }
};

inline Complex cis_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

// e^{i theta} - 1 with full relative accuracy for small theta.
inline Complex cis_minus_one(double theta) {
  const double s = std::sin(0.5 * theta);
  return {-2.0 * s * s, std::sin(theta)};
}

// (1+w)^b - 1 given w = z - 1, |z| = 1.
inline Complex power_minus_one(Complex w, int b) {
  const Complex z = 1.0 + w;
  Complex s = 1.0;
  for (int r = 1; r < b; ++r) s = s * z + 1.0;
  return w * s;
}

// out[(l-1)*Q + t] = e^{2 pi i q_t x / b^l} - 1 for l = 1..L.
// The deepest level is evaluated directly, shallower levels by raising to the b-th power,
// which keeps the absolute error proportional to the angle.
inline void ladder(double x, int b, int L, const std::vector<int>& q, Complex* out) {
  const std::size_t Q = q.size();
  if (L <= 0 || Q == 0) return;
  std::vector<Complex> w(static_cast<std::size_t>(L) + 1);
  w[static_cast<std::size_t>(L)] = cis_minus_one(2.0 * std::numbers::pi * x / std::pow(static_cast<double>(b), L));
  for (int l = L - 1; l >= 1; --l) w[static_cast<std::size_t>(l)] = power_minus_one(w[static_cast<std::size_t>(l) + 1], b);
  int qmax = 0;
  for (int v : q) qmax = std::max(qmax, std::abs(v));
  std::vector<Complex> e(static_cast<std::size_t>(qmax) + 1);
  for (int l = 1; l <= L; ++l) {
    const Complex w1 = w[static_cast<std::size_t>(l)];
    const Complex z = 1.0 + w1;
    e[0] = 0.0;
    for (int m = 1; m <= qmax; ++m) e[static_cast<std::size_t>(m)] = e[static_cast<std::size_t>(m) - 1] * z + w1;
    Complex* row = out + static_cast<std::size_t>(l - 1) * Q;
    for (std::size_t t = 0; t < Q; ++t) {
      const Complex v = e[static_cast<std::size_t>(std::abs(q[t]))];
      row[t] = q[t] >= 0 ? v : std::conj(v);
    }
  }
}

// Smallest N >= 1 with r^{N+1} s / (1 - r) <= tol; 0 when s == 0.
inline int series_terms(double r, double s, double tol) {
  if (s == 0.0) return 0;
  int n = 1;
  double rn = r * r;
  while (rn * s / (1.0 - r) > tol && n < 100000) {
    rn *= r;
    ++n;
  }
  return n;
}

}  // namespace weier::detail
