#pragma once

namespace weier {

struct SystemParams {
  int b = 2;
  double lambda = 0.5;
  double gamma = 1.0;       // 1/(b lambda)
  double D = 1.0;           // 2 + log_b lambda
  double holder_exp = 1.0;  // 2 - D

  double log_b(double x) const;
};

SystemParams make_params(int b, double lambda);

}  // namespace weier
