#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weier/params.hpp"
#include "weier/phi.hpp"
#include "weier/symbolic.hpp"

namespace weier {

double eval_Y(const SystemParams& p, const Phi& phi, double x, const Code& code, double tol);
double eval_Y_deriv(const SystemParams& p, const Phi& phi, double x, const Code& code, int k, double tol);
double eval_Gamma(const SystemParams& p, const Phi& phi, double x, const Code& code, double tol);
double project(const SystemParams& p, const Phi& phi, const Code& code, double x, double y, double tol);

std::pair<double, double> apply_ifs(const SystemParams& p, const Phi& phi, int i, double x, double y);
// g_{i_1} o ... o g_{i_n}; the empty word is the identity.
std::pair<double, double> apply_word(const SystemParams& p, const Phi& phi, const Word& w, double x, double y);

double transition_residual(const SystemParams& p, const Phi& phi, const Word& w, const Code& code, double x,
                           double y, double tol);

struct Separation {
  double sup = 0.0;
  double argmax = 0.0;
  bool identical = false;
};
Separation separation_sup(const SystemParams& p, const Phi& phi, const Code& u, const Code& v, int grid_size,
                          bool refine, double tol = 1e-12);

enum class HClass { h_evidence, h_star_evidence, inconclusive };
const char* to_string(HClass c);

struct HScanOptions {
  int grid_size = 1024;
  bool refine = true;
  double eps_h = 1e-6;
  double eps_star = 1e-8;
  double tol = 1e-12;
};

struct HScanRow {
  std::string u_prefix;
  std::string v_prefix;
  std::uint64_t seed = 0;
  double sep = 0.0;
  Code u;
  Code v;
};

struct HScanReport {
  double min_sep = 0.0;
  double max_sep = 0.0;
  HClass classification = HClass::inconclusive;
  std::vector<HScanRow> rows;
};

HScanReport condition_H_scan(const SystemParams& p, const Phi& phi, int depth, int samples_per_pair,
                             std::uint64_t seed, const HScanOptions& opt = {});
std::string to_csv(const HScanReport& r);

// 129 Chebyshev points on [a, b], endpoints included.
std::vector<double> chebyshev_nodes(double a, double b, int count = 129);

struct Regularity {
  int k = 0;
  double sup = 0.0;
  double inf = 0.0;
};
// Least k in [k_min, k_max] with 0 < sup_I |f^(k)| <= 2 inf_I |f^(k)|, tested on the node grid
// plus one golden-section refinement of the sup and the inf.
std::optional<Regularity> regularity_on_interval(const std::function<double(double, int)>& fk, double a, double b,
                                                 int k_min, int k_max);

struct RegularityRow {
  std::size_t interval = 0;
  std::optional<Regularity> reg;
};

struct RegularityTable {
  std::vector<RegularityRow> rows;
  int k_max_used = 0;
  bool truncated = false;   // smoothness of phi capped the k range
  bool degenerate = false;  // Gamma_u - Gamma_v vanishes identically on the grid
};

RegularityTable k_regularity(const SystemParams& p, const Phi& phi, const Code& u, const Code& v, int level,
                             int k_max, double tol = 1e-12);

struct CertificateRow {
  std::size_t interval = 0;
  double inf = 0.0;
  double sup = 0.0;
};

struct Certificate {
  double lhs = 0.0;      // mean over level-l0 intervals of inf_I |Y_u - Y_v|
  double rhs_sup = 0.0;  // sup over [0,1) of |Y_u - Y_v|
  double ratio = 0.0;
  bool degenerate = false;
  std::vector<CertificateRow> rows;
};

Certificate transversality_certificate(const SystemParams& p, const Phi& phi, const Code& u, const Code& v, int l0,
                                       double tol = 1e-12);
std::string to_csv(const Certificate& c);

struct StabilizationReport {
  int level = 0;
  bool stabilized = false;
  std::vector<double> min_ratio;  // index = level - 1
};
// Smallest l0 <= max_level at which the minimum certificate ratio over the pairs
// changes by at most rel_tol when passing to l0 + 1.
StabilizationReport certificate_stabilization(const SystemParams& p, const Phi& phi,
                                              const std::vector<std::pair<Code, Code>>& pairs, int max_level,
                                              double rel_tol = 0.05);

}  // namespace weier
