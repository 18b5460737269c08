#include "weier/phase.hpp"

#include <cmath>
#include <numbers>

namespace weier {

Phase Phase::from_real(double x) {
  const double f = x - std::floor(x);
  long double scaled = std::ldexp(static_cast<long double>(f), 64);
  if (scaled >= 18446744073709551616.0L) scaled = 0.0L;
  return Phase{static_cast<std::uint64_t>(scaled)};
}

Phase Phase::from_ratio(std::int64_t num, std::int64_t den) {
  std::int64_t r = num % den;
  if (r < 0) r += den;
  // floor(r * 2^64 / den) by long division on 128 bits.
  unsigned __int128 n = static_cast<unsigned __int128>(r) << 64;
  return Phase{static_cast<std::uint64_t>(n / static_cast<unsigned __int128>(den))};
}

double Phase::unit() const { return std::ldexp(static_cast<double>(bits >> 11), -53); }

double Phase::centered() const {
  const auto s = static_cast<std::int64_t>(bits);
  return std::ldexp(static_cast<double>(s >> 11), -53);
}

void cis(Phase p, double& c, double& s) {
  const double a = 2.0 * std::numbers::pi * p.centered();
  c = std::cos(a);
  s = std::sin(a);
}

}  // namespace weier
