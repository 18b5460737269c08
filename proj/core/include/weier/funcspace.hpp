#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "weier/histogram.hpp"
#include "weier/params.hpp"
#include "weier/phi.hpp"
#include "weier/symbolic.hpp"

namespace weier {

// Psi(x, y) = lambda^t (y - Gamma_code(x)) + c.
struct ContactMap {
  int t = 0;
  Code code;
  double c = 0.0;
};

// pi_j o g_i written in the form above: t = |i|, code = i* j, c = pi_j(g_i(0, 0)).
ContactMap make_contact_map(const SystemParams& p, const Phi& phi, const Word& i, const Code& j, double tol = 1e-12);
double evaluate(const SystemParams& p, const Phi& phi, const ContactMap& psi, double x, double y, double tol = 1e-12);

// The exponent l0 with M = b^l0; throws when M is not a power of b.
int grid_exponent(int b, long long M);

struct PibarCoords {
  int t = 0;
  std::vector<double> psi;  // psi[k-1] = psi(k/M), k = 1..M
  double c = 0.0;
};
PibarCoords pibar(const SystemParams& p, const Phi& phi, const ContactMap& psi, long long M, double tol = 1e-12);

// floor(t log_b(1/lambda)), evaluated in extended precision.
int c_level_offset(const SystemParams& p, int t);

struct CellId {
  int t = 0;
  std::vector<std::int64_t> idx;  // M psi indices then the c index; just the c index at level 0
  bool operator==(const CellId&) const = default;
  std::uint64_t hash() const;
  std::string str() const;
};
CellId partition_cell(const SystemParams& p, const PibarCoords& x, int i_level);
// Cell hash computed straight from coordinates; equals partition_cell(...).hash().
std::uint64_t cell_hash(const SystemParams& p, int t, const double* psi, std::size_t M, double c, int i_level);
// Same, ignoring the c coordinate.
std::uint64_t psi_cell_hash(const SystemParams& p, int t, const double* psi, std::size_t M, int i_level);

struct ThetaOptions {
  std::uint64_t cap = std::uint64_t{1} << 24;
  bool subsample = false;  // draw `cap` distinct words when b^h exceeds it
  std::uint64_t seed = 0;
  double tol = 1e-12;
  bool force_generic = false;
  int threads = 0;
};

struct EnumerationInfo {
  int height = 0;
  std::uint64_t size = 0;
  bool subsampled = false;
};

// Visits pi_j g_i for every i in Lambda^h (or a sorted seeded subsample). The word index
// spells i_h ... i_1 in base b, most significant first; position is the ordinal in the
// enumeration. Calls may come from several threads, never twice for one position.
using ContactVisitor =
    std::function<void(std::uint64_t position, std::uint64_t word_index, const double* psi, double c)>;
EnumerationInfo enumerate_contact_maps(const SystemParams& p, const Phi& phi, const Code& j, int h, long long M,
                                       const ThetaOptions& opt, const ContactVisitor& visit);
Word word_of_index(int b, int h, std::uint64_t index);

struct ThetaMeasure {
  int n = 0;
  int n_hat = 0;
  long long M = 1;
  bool subsampled = false;
  std::vector<std::uint64_t> words;
  std::vector<double> psi;  // size() * M
  std::vector<double> c;

  std::size_t size() const { return words.size(); }
  PibarCoords coords(std::size_t a) const;
};
ThetaMeasure build_theta(const SystemParams& p, const Phi& phi, const Code& j, int n, long long M,
                         const ThetaOptions& opt = {});

struct ThetaEntropyRow {
  int i_level = 0;
  double H = 0.0;
};
struct ThetaEntropyReport {
  int n = 0;
  int n_hat = 0;
  std::uint64_t size = 0;
  bool subsampled = false;
  std::vector<ThetaEntropyRow> rows;
};
// H(theta_n, L_i^X) in log base b for each requested i.
ThetaEntropyReport theta_entropy(const SystemParams& p, const Phi& phi, const Code& j, int n,
                                 const std::vector<int>& i_levels, long long M, const ThetaOptions& opt = {});
// Entropy (log base b) of equal-weight atoms given by their hashes; sorts in place.
double hash_entropy(std::vector<std::uint64_t>& hashes, int b);

struct SeparationReport {
  bool separable = false;
  int C = 0;
  int C_cap = 0;
  // Finest level at which cells are trusted: b^-level >= 100 tol.
  int resolvable_level = 0;
  std::vector<int> C_per_n;  // -1 when not separated within the cap
  std::vector<std::pair<std::string, std::string>> failures;
};
SeparationReport separation_constant_C(const SystemParams& p, const Phi& phi, const Code& j, int n_max, long long M,
                                       int C_cap = 8, double tol = 1e-12);

BadicHistogram eta_dot(const SystemParams& p, const Phi& phi, const std::vector<std::pair<ContactMap, double>>& eta,
                       const std::vector<std::pair<double, double>>& samples, int level, double tol = 1e-12);

// Exact convolution of two 1D histograms at a common level; atoms sit at left cell endpoints.
BadicHistogram convolve(const BadicHistogram& a, const BadicHistogram& b);

struct ConvolutionGain {
  double gain = 0.0;
  double H_conv = 0.0;
  double H_tau = 0.0;
  double H_theta = 0.0;
};
// Both histograms at level n + k with support diameter at most b^-n.
ConvolutionGain convolution_entropy_gain(const BadicHistogram& theta, const BadicHistogram& tau, int n, int k);

struct ExperimentOptions {
  double eta_threshold = 0.05;   // components with (1/k) H(eta, L_{i+k}^X) above this are used
  double gain_threshold = 0.01;  // a gain above this counts as positive
  int max_components = 32;
  int max_atoms = 64;
  int u_samples = 2;
  int x_samples = 256;
  ThetaOptions theta;
};

struct ExperimentRow {
  std::size_t component_id = 0;
  std::size_t atoms = 0;
  double H_eta = 0.0;
  double H_psi = 0.0;
  double gain = 0.0;
};

struct ExperimentReport {
  int n = 0;
  int i_level = 0;
  int k = 0;
  long long M = 1;
  std::size_t components = 0;
  std::size_t selected = 0;
  std::size_t skipped = 0;         // single-atom components
  std::size_t h_type_components = 0;  // psi coordinates alone carry entropy above the threshold
  double max_H_psi = 0.0;
  double positive_fraction = 0.0;
  std::vector<ExperimentRow> rows;
};

ExperimentReport entropy_increase_experiment(const SystemParams& p, const Phi& phi, const Code& j, int n, int i_level,
                                             int k, long long M, std::uint64_t seed,
                                             const ExperimentOptions& opt = {});
std::string to_csv(const ExperimentReport& r);
// `word,t,cell_id` lines for every atom of theta.
std::string partition_dump(const SystemParams& p, const ThetaMeasure& theta, int i_level);

}  // namespace weier
