#include "oracles.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

namespace oracle {

double Y_direct(const weier::SystemParams& p, const weier::Phi& phi, double x, const weier::Code& code) {
  double u = x, g = 1.0, sum = 0.0;
  for (int n = 1; n < 100000; ++n) {
    u = (u + code.at(static_cast<std::size_t>(n - 1))) / p.b;
    g *= p.gamma;
    const double term = g * phi.deriv(u, 1);
    sum += term;
    if (g * phi.sup_bound(1) < 1e-18) break;
  }
  return -sum;
}

double gamma_by_quadrature(const weier::SystemParams& p, const weier::Phi& phi, double x, const weier::Code& code) {
  if (x == 0.0) return 0.0;
  auto f = [&](double t) { return Y_direct(p, phi, t, code); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, x, 15, 1e-14);
}

std::vector<std::complex<double>> fft_W_coefficients(const weier::SystemParams& p, const weier::FourierPhi& phi,
                                                     int N, int M) {
  const int K = std::max(1, phi.max_frequency());
  std::vector<double> lam;  // lambda^n for the kept terms
  long long scale = 1;
  for (int n = 0; scale * K < N / 2; ++n, scale *= p.b) lam.push_back(std::pow(p.lambda, n));

  auto* in = fftw_alloc_complex(static_cast<std::size_t>(N));
  auto* out = fftw_alloc_complex(static_cast<std::size_t>(N));
  fftw_plan plan = fftw_plan_dft_1d(N, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  for (int s = 0; s < N; ++s) {
    std::complex<double> w = 0.0;
    long long bn = 1;
    for (double l : lam) {
      for (const auto& [k, c] : phi.coeffs()) {
        // e^{2 pi i k b^n s / N}, argument reduced exactly in integers
        const long long r = ((static_cast<long long>(k) * bn % N) * s % N + N) % N;
        w += l * c * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / N);
      }
      bn *= p.b;
    }
    in[s][0] = w.real();
    in[s][1] = phi.real_valued() ? 0.0 : w.imag();
  }
  fftw_execute(plan);
  std::vector<std::complex<double>> A(static_cast<std::size_t>(2 * M + 1));
  for (int m = -M; m <= M; ++m) {
    const int idx = (m % N + N) % N;
    A[static_cast<std::size_t>(m + M)] = std::complex<double>(out[idx][0], out[idx][1]) / static_cast<double>(N);
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return A;
}

bool nhat_inequality_holds(int b, double lambda, int n, int k) {
  using F = boost::multiprecision::cpp_bin_float_50;
  const F lam(lambda);
  const F target = F(1) / pow(F(b), n);
  const F lk = pow(lam, k);
  if (!(lk <= target)) return false;
  if (k == 0) return n == 0;
  return target < lk / lam;
}

std::map<std::int64_t, double> brute_convolution(const weier::BadicHistogram& a, const weier::BadicHistogram& b) {
  std::map<std::int64_t, double> out;
  const double ta = a.total(), tb = b.total();
  for (const auto& u : a.cells())
    for (const auto& v : b.cells()) out[u.x + v.x] += (u.mass / ta) * (v.mass / tb);
  return out;
}

double entropy_of(const std::map<std::int64_t, double>& cells, int b) {
  double total = 0.0, h = 0.0;
  for (const auto& [k, m] : cells) total += m;
  for (const auto& [k, m] : cells)
    if (m > 0.0) h -= (m / total) * std::log(m / total);
  return h / std::log(static_cast<double>(b));
}

double conditional_entropy_by_components(const weier::BadicHistogram& h, int m) {
  const auto coarse = h.coarsen(m);
  double sum = 0.0;
  for (const auto& c : coarse.cells()) sum += (c.mass / coarse.total()) * h.component(m, c.x, c.y).entropy();
  return sum;
}

}  // namespace oracle
