#include "weier/batch.hpp"

#include <cmath>
#include <numbers>

#include "trig.hpp"
#include "weier/errors.hpp"
#include "weier/kernel.hpp"
#include "weier/weier.hpp"

namespace weier {

struct ProjectionBank::Tables {
  detail::TrigTerms terms;
  int L = 0;
  // a[(c*L + l-1)*Q + t] = lambda^{-l} coef_t e^{2 pi i q_t o_l(code c)}
  std::vector<Complex> a;

  explicit Tables(const FourierPhi& f) : terms(f) {}
};

ProjectionBank::ProjectionBank(const SystemParams& p, const Phi& phi, std::vector<Code> codes, double tol)
    : p_(p), phi_(phi), codes_(std::move(codes)), tol_(tol) {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (phi.max_derivative() < 1)
    throw UnsupportedDerivative("flow maps need phi', not available for " + phi.describe());
  for (const auto& c : codes_)
    if (c.base() != p.b) throw InvalidArgument("code base does not match b");
  const FourierPhi* trig = phi.trig_form();
  if (!trig) return;
  t_ = std::make_unique<Tables>(*trig);
  const std::size_t Q = t_->terms.size();
  t_->L = detail::series_terms(p.gamma, phi.sup_bound(1), tol);
  const auto L = static_cast<std::size_t>(t_->L);
  t_->a.resize(codes_.size() * L * Q);
  for (std::size_t c = 0; c < codes_.size(); ++c) {
    double o = 0.0, inv = 1.0;
    for (std::size_t l = 1; l <= L; ++l) {
      o = (o + codes_[c].at(l - 1)) / p.b;
      inv /= p.lambda;
      for (std::size_t t = 0; t < Q; ++t) {
        const double ang = 2.0 * std::numbers::pi * t_->terms.q[t] * o;
        t_->a[(c * L + l - 1) * Q + t] = inv * t_->terms.coef[t] * detail::cis_angle(ang);
      }
    }
  }
}

ProjectionBank::~ProjectionBank() = default;
ProjectionBank::ProjectionBank(ProjectionBank&&) noexcept = default;
ProjectionBank& ProjectionBank::operator=(ProjectionBank&&) noexcept = default;

bool ProjectionBank::fast() const { return t_ != nullptr; }

double ProjectionBank::W(double x) const { return eval_W(p_, phi_, x, tol_); }

void ProjectionBank::gamma(double x, double* out) const {
  if (!t_) {
    for (std::size_t c = 0; c < codes_.size(); ++c) out[c] = eval_Gamma(p_, phi_, x, codes_[c], tol_);
    return;
  }
  const std::size_t Q = t_->terms.size();
  const auto L = static_cast<std::size_t>(t_->L);
  if (Q == 0 || L == 0) {
    for (std::size_t c = 0; c < codes_.size(); ++c) out[c] = 0.0;
    return;
  }
  std::vector<Complex> E(L * Q);
  detail::ladder(x, p_.b, t_->L, t_->terms.q, E.data());
  const std::size_t n = L * Q;
  for (std::size_t c = 0; c < codes_.size(); ++c) {
    const Complex* a = t_->a.data() + c * n;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i].real() * E[i].real() - a[i].imag() * E[i].imag();
    out[c] = -s;
  }
}

void ProjectionBank::project_graph(double x, double* out) const {
  gamma(x, out);
  const double w = W(x);
  for (std::size_t c = 0; c < codes_.size(); ++c) out[c] = w - out[c];
}

double ProjectionBank::projection_bound() const {
  const double s0 = phi_.sup_bound(0), s1 = phi_.sup_bound(1);
  return s0 / (1.0 - p_.lambda) + s1 * p_.gamma / (1.0 - p_.gamma) + 2.0 * tol_;
}

}  // namespace weier
