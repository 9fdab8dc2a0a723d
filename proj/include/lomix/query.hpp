#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "lomix/quadrature.hpp"
#include "lomix/thermo.hpp"

namespace lomix {

// Compactly supported radial profile on the frequency side,
// A exp(-1/(1 - (r/R)^2)) inside the ball and zero outside. Smooth across
// the boundary, so its inverse transform decays faster than any power.
struct RadialBump {
  double amplitude = 1.0;
  double radius = 32.0;

  double operator()(double r) const {
    const double x = r / radius;
    if (!(x * x < 1.0)) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - x * x));
  }
};

// One factor of a correlation pair: a word function on the working basis,
// a frequency-side window, a holonomy pairing character and a unit pair
// contracting the character's line.
struct TestFunction {
  Eigen::VectorXd f;
  RadialBump omega_hat;
  Character mu;
  std::complex<double> w1{1.0, 0.0};
  std::complex<double> w2{1.0, 0.0};
};

// Fiber average of the two pairing characters against their unit pairs.
// Characters that are not conjugate average to zero and kill the pair.
inline std::complex<double> pair_weight(const AbelianGroup& g, const TestFunction& p1,
                                        const TestFunction& p2) {
  std::complex<double> sel{0.0, 0.0};
  for (int k = 0; k < g.size(); ++k) {
    const auto e = g.from_flat(k);
    sel += p1.mu(e) * p2.mu(e);
  }
  sel /= static_cast<double>(g.size());
  return p1.w1 * std::conj(p1.w2) * p2.w1 * std::conj(p2.w2) * sel;
}

enum class RProfile { Zero, SqrtEllT, CubeRootT, TwoThirdsT };

// Cross-correlation of the two position-side windows, tabulated on a uniform
// radial grid and cut once the tail is below threshold. Values outside the
// cut are treated as exactly zero.
struct CorrelationProfile {
  double step = 0.0;
  double cut = 0.0;
  std::vector<double> val;

  double operator()(double s) const {
    s = std::abs(s);
    if (s >= cut || val.size() < 2) return 0.0;
    const double x = s / step;
    const auto n = static_cast<long>(val.size());
    long i = static_cast<long>(std::floor(x));
    if (i > n - 2) return 0.0;
    const double u = x - static_cast<double>(i);
    // Catmull-Rom with even reflection at the origin and zero padding past
    // the cut; the profile is even and compactly supported in effect.
    auto at = [&](long k) -> double {
      if (k < 0) k = -k;
      return k < n ? val[static_cast<std::size_t>(k)] : 0.0;
    };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * u * (p2 - p0 +
                           u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                u * (3.0 * (p1 - p2) + p3 - p0)));
  }
};

// Tabulate s -> int w1(xi + s e) w2(xi) dxi for radial windows given by their
// frequency profiles. The product profile is supported in the smaller ball,
// so on the frequency side this is one radial integral per sample: a cosine
// transform for a one-dimensional argument, a Hankel transform for a planar
// one. Sampling stops after a sustained run below tail * |value at 0|.
inline CorrelationProfile cross_profile(const RadialBump& b1, const RadialBump& b2,
                                        int rank, double tail = 1e-11) {
  if (rank != 1 && rank != 2)
    throw OutsideDomain("window cross-correlation implemented for ranks 1 and 2");
  const double R = std::min(b1.radius, b2.radius);
  if (!(R > 0.0)) throw OutsideDomain("window radius must be positive");
  auto fhat = [&](double r) { return b1(r) * b2(r); };

  CorrelationProfile g;
  g.step = kPi / (40.0 * R);
  // deep in the tail the oscillatory integrals sit at the cancellation
  // floor, so past the first sample the driver gets an absolute goal tied
  // to the profile's own scale instead of an unreachable relative one
  double abs_goal = 0.0;
  auto sample = [&](double s) {
    if (rank == 2) return hankel_radial(fhat, R, s, 1e-9, abs_goal) / (2.0 * kPi);
    auto integrand = [&](double r) { return fhat(r) * std::cos(r * s); };
    return gk15_adaptive(integrand, 0.0, R, 1e-10, abs_goal) / kPi;
  };

  const double g0 = sample(0.0);
  abs_goal = std::abs(g0) * (rank == 2 ? 2.0 * kPi : kPi) * tail * 0.1;
  const double floor_abs = std::abs(g0) * tail;
  g.val.push_back(g0);
  int quiet = 0;
  const std::size_t hard_cap = 60000;
  while (quiet < 50 && g.val.size() < hard_cap) {
    const double v = sample(g.step * static_cast<double>(g.val.size()));
    g.val.push_back(v);
    quiet = std::abs(v) < floor_abs ? quiet + 1 : 0;
  }
  g.cut = g.step * static_cast<double>(g.val.size() - 1);
  return g;
}

// A correlation query: the two observables, a transverse displacement
// direction with its rate profile, and the time grid to probe.
struct MixingQuery {
  TestFunction psi1;
  TestFunction psi2;
  Eigen::VectorXd u_drift;  // cocycle coordinates, annihilated by psi0
  double ell = 0.0;
  RProfile r_profile = RProfile::Zero;
  std::vector<double> t_grid;

  mutable std::shared_ptr<const CorrelationProfile> window_cache;

  double r_at(double t) const {
    switch (r_profile) {
      case RProfile::Zero:
        return 0.0;
      case RProfile::SqrtEllT:
        if (!std::isfinite(ell)) throw OutsideDomain("square-root rate needs finite ell");
        return std::sqrt(ell * t);
      case RProfile::CubeRootT:
        return std::cbrt(t);
      case RProfile::TwoThirdsT:
        // grows too fast for any finite rate: the rate-squared per unit
        // time diverges and only a vanishing rate function survives
        return std::cbrt(t * t);
    }
    throw OutsideDomain("unknown displacement profile");
  }
};

// Transverse frame coordinates of the query displacement. The frame's first
// row recovers the flow component, which must vanish for a legal query.
inline Eigen::VectorXd transverse_drift(const CalibratedModel& cm, const MixingQuery& q) {
  if (q.u_drift.size() == 0) return Eigen::VectorXd::Zero(cm.rank() - 1);
  if (q.u_drift.size() != cm.rank())
    throw DimensionMismatch("displacement arity does not match the cocycle rank");
  const Eigen::VectorXd uf = cm.frame.to_frame(q.u_drift);
  if (std::abs(uf[0]) > 1e-10 * (1.0 + uf.norm()))
    throw NotInKernel("displacement has a flow component");
  return uf.tail(cm.rank() - 1);
}

// Mass of one observable factor against the normalized product measure:
// equilibrium mass of the word function, total position-side window mass,
// and the fiber average of the character line, per unit roof. Any
// nontrivial pairing character averages to zero over the compact fiber.
inline double suspension_mass(const CalibratedModel& cm, const TestFunction& psi) {
  if (psi.f.size() != cm.dim())
    throw DimensionMismatch("observable table does not match the working basis");
  std::complex<double> fiber{0.0, 0.0};
  const auto& grp = cm.model.group;
  for (int k = 0; k < grp.size(); ++k) fiber += psi.mu(grp.from_flat(k));
  fiber *= psi.w1 * std::conj(psi.w2) / static_cast<double>(grp.size());
  return cm.gibbs.dot(psi.f) * psi.omega_hat(0.0) * fiber.real() / cm.mean_tau;
}

inline const CorrelationProfile& query_profile(const CalibratedModel& cm,
                                               const MixingQuery& q) {
  if (!q.window_cache)
    q.window_cache = std::make_shared<const CorrelationProfile>(
        cross_profile(q.psi1.omega_hat, q.psi2.omega_hat, cm.rank()));
  return *q.window_cache;
}

// Geometric time grid, endpoints included.
inline std::vector<double> geometric_grid(double a, double b, int n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw OutsideDomain("need 0 < a < b and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    g[static_cast<std::size_t>(j)] =
        a * std::pow(b / a, static_cast<double>(j) / (n - 1));
  return g;
}

}  // namespace lomix
