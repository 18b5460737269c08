#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weier/histogram.hpp"
#include "weier/params.hpp"
#include "weier/phi.hpp"
#include "weier/symbolic.hpp"

namespace weier {

struct SampleOptions {
  // One point per level-ceil(log_b n) cell of [0,1) when true, i.i.d. uniform otherwise.
  bool stratified = true;
  int threads = 0;  // 0: hardware concurrency
  double tol = 1e-10;
  // Box counting: level n uses only the samples of the level-(n + gap) grid, gap = s - level_hi
  // for b^s drawn points, instead of every sample.
  bool matched_subgrid = true;
};

// Number of points actually drawn for a request of n: b^ceil(log_b n) when stratified.
std::uint64_t sample_count(int b, std::uint64_t n, bool stratified);

struct ProjectedSample {
  BadicHistogram hist;
  std::uint64_t n_samples = 0;
  bool undersampled = false;  // fewer samples than level-`level` cells in [0,1)
};

ProjectedSample sample_projected_measure(const SystemParams& p, const Phi& phi, const Code& code,
                                         std::uint64_t n_samples, int level, std::uint64_t seed,
                                         const SampleOptions& opt = {});
// Same x samples shared by all codes; one histogram per code.
std::vector<ProjectedSample> sample_projected_measures(const SystemParams& p, const Phi& phi,
                                                       const std::vector<Code>& codes, std::uint64_t n_samples,
                                                       int level, std::uint64_t seed, const SampleOptions& opt = {});

struct AlphaReport {
  std::vector<EntropyCurve> curves;
  std::vector<double> slopes;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::uint64_t n_samples = 0;
};

AlphaReport alpha_estimate(const SystemParams& p, const Phi& phi, const std::vector<Code>& codes, int level_lo,
                           int level_hi, std::uint64_t n_samples, std::uint64_t seed, const SampleOptions& opt = {});

// count seeded codes Code::random(b, seed + k), k = 0..count-1
std::vector<Code> seeded_codes(int b, int count, std::uint64_t seed);

struct BoxReport {
  std::vector<int> levels;
  std::vector<std::uint64_t> counts;
  std::vector<double> log_counts;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double D = 0.0;
  std::uint64_t n_samples = 0;
  int sample_gap = 0;
};

// Occupied level-n squares of the polyline through the sorted samples and the
// endpoints (0, W(0)), (1, W(0)); slope of log_b N_n against n. See SampleOptions::matched_subgrid.
BoxReport graph_box_dimension(const SystemParams& p, const Phi& phi, int level_lo, int level_hi,
                              std::uint64_t n_samples, std::uint64_t seed, const SampleOptions& opt = {});
std::string to_csv(const BoxReport& r);

// Box counts of an arbitrary polyline through sorted points, for levels lo..hi.
std::vector<std::uint64_t> polyline_box_counts(int b, const std::vector<double>& xs, const std::vector<double>& ys,
                                               int level_lo, int level_hi);

struct DimMuReport {
  double dim_mu = 0.0;
  double alpha = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  EntropyCurve curve2d;
};

DimMuReport dim_mu_check(const SystemParams& p, const Phi& phi, int code_count, int level_lo, int level_hi,
                         std::uint64_t n_samples, std::uint64_t seed, const SampleOptions& opt = {});
// Graph-lift histogram of (x, W(x)) at `level`.
BadicHistogram graph_histogram(const SystemParams& p, const Phi& phi, std::uint64_t n_samples, int level,
                               std::uint64_t seed, const SampleOptions& opt = {});

// The integer with lambda^nhat <= b^-n < lambda^(nhat-1).
int n_hat(const SystemParams& p, int n);

struct Decomposition {
  std::vector<Word> words;
  std::vector<BadicHistogram> components;
  BadicHistogram mixture;
  BadicHistogram direct;
  double residual = 0.0;   // max per-cell |mixture - direct|, normalized masses
  double tolerance = 0.0;  // 3 / sqrt(n_samples)
};

Decomposition decompose_projection(const SystemParams& p, const Phi& phi, const Code& code, int n_decomp, int level,
                                   std::uint64_t n_samples, std::uint64_t seed, std::uint64_t component_cap = 4096,
                                   const SampleOptions& opt = {});

// Masses of balls for a 1D histogram, with the boundary cells prorated linearly.
class BallMass {
 public:
  explicit BallMass(const BadicHistogram& h);
  double operator()(double center, double radius) const;
  double quantile(double q) const;

 private:
  double cdf(double z) const;
  int b_ = 2;
  double scale_ = 1.0;
  std::int64_t first_ = 0;
  std::vector<double> mass_;
  std::vector<double> prefix_;
};

struct UcasOptions {
  // Balls with less normalized mass than this are skipped.
  double min_ball_mass = 1e-3;
  int auto_x_points = 33;
};

struct UcasReport {
  double sup_ratio = 0.0;
  bool degenerate = false;  // the measure has an atom carrying at least half its mass
  int level = 0;
  std::size_t evaluated = 0;
  std::size_t arg_code = 0;
  double arg_x = 0.0;
  double arg_r = 0.0;
};

// sup over codes, x and r of omega(B(x, delta r)) / omega(B(x, r)) for omega = pi_j mu.
// An empty x_grid means quantiles of each measure.
UcasReport ucas_probe(const SystemParams& p, const Phi& phi, const std::vector<Code>& codes, double delta,
                      const std::vector<double>& r_grid, const std::vector<double>& x_grid, std::uint64_t n_samples,
                      std::uint64_t seed, const UcasOptions& uopt = {}, const SampleOptions& opt = {});
UcasReport ucas_ratio(const BadicHistogram& h, double delta, const std::vector<double>& r_grid,
                      const std::vector<double>& x_grid, const UcasOptions& uopt = {});

struct PorosityReport {
  double fraction = 0.0;
  bool porous = false;  // fraction > 1 - delta
  std::size_t components = 0;
};

// Probability, over i uniform in [n1, n2] and x ~ omega, that (1/m) H(omega_{x,i}, L_{i+m}) < h + delta.
PorosityReport porosity_fraction(const BadicHistogram& hist, double h, double delta, int m, int n1, int n2);
PorosityReport porosity_probe(const SystemParams& p, const Phi& phi, const Code& code, double h, double delta, int m,
                              int n1, int n2, int level_cap, std::uint64_t n_samples, std::uint64_t seed,
                              const SampleOptions& opt = {});

}  // namespace weier
