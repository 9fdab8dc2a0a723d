#pragma once

#include <cmath>

#include "lomix/common.hpp"
#include "lomix/quadrature.hpp"

namespace lomix {

struct BesselEval {
  double alpha = 0;
  double x = 0;
  double value = 0;  // > 0 whenever x > 0
};

// Modified Bessel function of the second kind,
//   K_a(x) = 1/2 \int_0^inf t^{-(a+1)} e^{-(x/2)(t + 1/t)} dt.
// The substitution t = e^s symmetrizes the integrand into
// cosh(a s) e^{-x cosh s}, which decays double-exponentially; a plain
// trapezoid with fixed spacing then converges past the target tolerance.
inline double bessel_k(double alpha, double x) {
  if (!(x > 0)) throw OutsideDomain("bessel_k needs x > 0");
  const double h = 1e-3;
  KahanSum<double> sum;
  sum.add(0.5 * std::exp(-x));  // s = 0 term with trapezoid half weight
  for (double s = h; s <= 40.0; s += h) {
    const double e = x * std::cosh(s);
    if (e > 745.0 && e - std::abs(alpha) * s > 745.0) break;
    sum.add(std::cosh(alpha * s) * std::exp(-e));
  }
  return sum.value() * h;
}

inline BesselEval bessel_k_eval(double alpha, double x) {
  return {alpha, x, bessel_k(alpha, x)};
}

// Profile function
//   E(x) = Gamma((rank-1)/2)^{-1} \int_0^inf e^{-t} (t + t^2/(2x))^{(rank-3)/2} dt.
// The substitution t = u^2 removes the endpoint singularity for rank 2:
//   E(x) = Gamma((rank-1)/2)^{-1}
//          \int_0^inf 2 e^{-u^2} u^{rank-2} (1 + u^2/(2x))^{(rank-3)/2} du.
inline double profile_E(int rank, double x) {
  if (rank < 2) throw OutsideDomain("profile needs rank >= 2");
  if (!(x > 0)) throw OutsideDomain("profile needs x > 0");
  const double p = 0.5 * (rank - 3);
  auto f = [&](double u) {
    return 2.0 * std::exp(-u * u) * std::pow(u, rank - 2) *
           std::pow(1.0 + u * u / (2.0 * x), p);
  };
  const double value = gk15_adaptive(f, 0.0, 40.0, 1e-12, 1e-300);
  return value / std::tgamma(0.5 * (rank - 1));
}

}  // namespace lomix
