#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weier/params.hpp"
#include "weier/phi.hpp"

namespace weier {

// Index N of the last term kept so that lambda^{N+1} sup|phi| / (1-lambda) <= tol.
// Returns -1 when phi vanishes identically.
int w_terms(const SystemParams& p, const Phi& phi, double tol);

double eval_W(const SystemParams& p, const Phi& phi, double x, double tol);
double eval_W(const SystemParams& p, const Phi& phi, Phase x, double tol);

double self_affinity_residual(const SystemParams& p, const Phi& phi, double x, double tol);

struct WFourier {
  int M_max = 0;
  std::vector<Complex> A;  // index m + M_max
  std::vector<double> err;

  Complex at(int m) const { return A[static_cast<std::size_t>(m + M_max)]; }
  double error(int m) const { return err[static_cast<std::size_t>(m + M_max)]; }
};

WFourier fourier_of_W(const SystemParams& p, const FourierPhi& phi, int M_max);
// Single coefficient of W by the same recursion, any frequency.
Complex W_coefficient(const SystemParams& p, const FourierPhi& phi, long long m);
std::string to_csv(const WFourier& w);

double holder_constant_estimate(const SystemParams& p, const Phi& phi, int n_pairs, std::uint64_t seed);

struct AntiHolder {
  double y = 0.0;
  double ratio = 0.0;
};
AntiHolder anti_holder_probe(const SystemParams& p, const Phi& phi, double x, double delta, int grid_size);

// Exact rational t = num/den.
struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};
// Reduced to lowest terms with 0 <= num < den.
Rational reduce_mod1(Rational t);
// Whether t = m b^{-n} for some integers m, n.
bool is_b_adic(Rational t, int b);

struct EnergyEnclosure {
  double lo = 0.0;
  double hi = 0.0;  // +inf when the tail diverges
  bool trivial = false;
};

EnergyEnclosure regulating_energy(const SystemParams& p, const FourierPhi& phi, Rational t, int k, int M_max);

struct KeyEstimate {
  double E2 = 0.0;
  double product = 0.0;
  bool trivial = false;
};
KeyEstimate key_estimate_probe(const SystemParams& p, const FourierPhi& phi, Rational t, int M_max = 256);

enum class PeriodClass { trivial, candidate_regulating, non_regulating };
const char* to_string(PeriodClass c);

struct PeriodScanOptions {
  int M_max = 256;
  // Divergence threshold = factor * max(1, sum |c_m| (2 pi |m|)^k).
  double threshold_factor = 100.0;
};

struct PeriodScanRow {
  Rational t;
  int k = 0;
  double lo = 0.0;
  double hi = 0.0;
  PeriodClass cls = PeriodClass::trivial;
};

struct PeriodScanReport {
  std::vector<PeriodScanRow> rows;
  std::vector<long long> regulating_denominators;
  double threshold = 0.0;
};

PeriodScanReport period_scan(const SystemParams& p, const FourierPhi& phi, int k,
                             const std::vector<long long>& denominators, const PeriodScanOptions& opt = {});
std::string to_csv(const PeriodScanReport& r);

}  // namespace weier
