#pragma once

#include <cstdint>

namespace weier {

// A point of the circle R/Z stored as a 64-bit fixed-point fraction.
// Multiplication by an integer is exact modulo 1, which keeps b^n x mod 1
// free of the error growth that plain doubles suffer for odd b.
struct Phase {
  std::uint64_t bits = 0;

  static Phase from_real(double x);
  static Phase from_ratio(std::int64_t num, std::int64_t den);

  Phase times(std::int64_t m) const { return Phase{bits * static_cast<std::uint64_t>(m)}; }
  Phase operator+(Phase o) const { return Phase{bits + o.bits}; }

  // Representative in [0, 1).
  double unit() const;
  // Representative in [-1/2, 1/2).
  double centered() const;

  bool operator==(const Phase&) const = default;
};

// cos and sin of 2*pi*p, evaluated from the centered representative.
void cis(Phase p, double& c, double& s);

}  // namespace weier
