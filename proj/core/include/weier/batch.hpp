#pragma once

#include <memory>
#include <vector>

#include "weier/params.hpp"
#include "weier/phi.hpp"
#include "weier/symbolic.hpp"

namespace weier {

// Evaluates W and the flow maps Gamma_j for a fixed list of codes at many points.
// When phi has a finite trigonometric form the per-level angles are shared by all
// codes, so each extra code costs a few multiply-adds per level. Results agree with
// eval_W / eval_Gamma to within tol for x in [0, 1].
class ProjectionBank {
 public:
  ProjectionBank(const SystemParams& p, const Phi& phi, std::vector<Code> codes, double tol);
  ~ProjectionBank();
  ProjectionBank(ProjectionBank&&) noexcept;
  ProjectionBank& operator=(ProjectionBank&&) noexcept;

  std::size_t size() const { return codes_.size(); }
  const std::vector<Code>& codes() const { return codes_; }
  bool fast() const;

  double W(double x) const;
  void gamma(double x, double* out) const;
  // out[c] = W(x) - Gamma_{codes[c]}(x), the projection of the graph point over x.
  void project_graph(double x, double* out) const;
  // Bound on |pi_j(x, W(x))| over x in [0, 1] and all codes.
  double projection_bound() const;

 private:
  struct Tables;
  SystemParams p_;
  Phi phi_;
  std::vector<Code> codes_;
  double tol_;
  std::unique_ptr<Tables> t_;
};

}  // namespace weier
