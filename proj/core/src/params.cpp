#include "weier/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "weier/errors.hpp"
#include "weier/format.hpp"

namespace weier {

double SystemParams::log_b(double x) const { return std::log(x) / std::log(static_cast<double>(b)); }

SystemParams make_params(int b, double lambda) {
  if (b < 2) throw InvalidArgument("b must be an integer >= 2, got " + std::to_string(b));
  if (!(lambda > 1.0 / b))
    throw InvalidArgument("lambda must exceed 1/b strictly (lambda=" + fmt(lambda) + ", 1/b=" + fmt(1.0 / b) + ")");
  if (!(lambda < 1.0)) throw InvalidArgument("lambda must be < 1 (lambda=" + fmt(lambda) + ")");
  SystemParams p;
  p.b = b;
  p.lambda = lambda;
  p.gamma = 1.0 / (b * lambda);
  p.D = 2.0 + std::log(lambda) / std::log(static_cast<double>(b));
  p.holder_exp = 2.0 - p.D;
  if (!(p.gamma > 1.0 / b && p.gamma < 1.0 && p.D > 1.0 && p.D < 2.0))
    throw InvariantViolation("derived constants out of range for b=" + std::to_string(b) + ", lambda=" + fmt(lambda));
  if (std::fabs(p.gamma * b * lambda - 1.0) > 2.0 * std::numeric_limits<double>::epsilon())
    throw InvariantViolation("gamma*b*lambda deviates from 1");
  return p;
}

}  // namespace weier
