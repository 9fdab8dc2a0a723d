#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "lomix/model.hpp"
#include "lomix/query.hpp"
#include "lomix/thermo.hpp"

// Slow, independently coded reference computations. Everything here works by
// direct enumeration of admissible words: no transfer matrices, no spectral
// solves, no Fourier analysis. The point is to cross-check the fast paths, so
// simplicity beats speed throughout.

namespace lomix {

// One partition sum over the period-n points of the shift.
struct OrbitSum {
  int n = 0;
  std::complex<double> value{0.0, 0.0};
};

namespace detail {

// Visit every admissible n-periodic symbol loop. The visitor receives the
// length-n word; adjacency holds cyclically, including the wrap pair.
template <class Visit>
void for_each_cycle(const Shift& sh, int n, Visit&& visit) {
  Word w(static_cast<std::size_t>(n));
  auto rec = [&](auto&& self, int p) -> void {
    for (int a = 0; a < sh.symbols(); ++a) {
      if (p > 0 && !sh.allowed(w[static_cast<std::size_t>(p - 1)], a)) continue;
      if (p == n - 1 && !sh.allowed(a, w[0])) continue;
      w[static_cast<std::size_t>(p)] = a;
      if (p == n - 1)
        visit(static_cast<const Word&>(w));
      else
        self(self, p + 1);
    }
  };
  rec(rec, 0);
}

// Birkhoff sum of a word function around a cycle: the window at each of the
// n cyclic positions, wrapped with the word's own head.
inline double cycle_sum(const WordSpace& ws, const Eigen::VectorXd& f, const Word& w) {
  const int L = ws.depth() + 1;
  Word u = w;
  while (u.size() < w.size() + static_cast<std::size_t>(ws.depth()))
    u.push_back(w[u.size() % w.size()]);
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    s += f[ws.index(Word(u.begin() + static_cast<long>(j),
                         u.begin() + static_cast<long>(j) + L))];
  return s;
}

}  // namespace detail

struct PressureByOrbits {
  std::vector<OrbitSum> sums;  // raw partition sums, last three periods
  std::vector<double> per_n;   // (1/n) log of each sum
  double value = 0.0;          // Richardson limit of per_n in powers of 1/n
};

// Pressure from periodic-orbit partition sums. The finite-n estimates carry
// a 1/n tail from the subleading spectrum, so a quadratic fit in 1/n through
// the last three periods is extrapolated to 1/n -> 0.
inline PressureByOrbits pressure_by_orbits(const WordSpace& ws, const Eigen::VectorXd& f,
                                           int n_max) {
  if (f.size() != ws.dim())
    throw DimensionMismatch("need one word-function value per basis word");
  if (n_max < 3) throw OutsideDomain("need at least three periods to extrapolate");

  PressureByOrbits out;
  for (int n = n_max - 2; n <= n_max; ++n) {
    // shift by the crude Birkhoff bound so the exponentials stay in range
    const double shift = static_cast<double>(n) * f.cwiseAbs().maxCoeff();
    KahanSum<double> z;
    detail::for_each_cycle(ws.shift(), n, [&](const Word& w) {
      z.add(std::exp(detail::cycle_sum(ws, f, w) - shift));
    });
    if (!(z.value() > 0.0)) throw NoConvergence("no admissible cycles at this period");
    const double log_z = shift + std::log(z.value());
    out.sums.push_back({n, std::exp(log_z)});
    out.per_n.push_back(log_z / static_cast<double>(n));
  }

  // Lagrange value at x = 0 of the quadratic through (1/n, per_n)
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double xi = 1.0 / static_cast<double>(out.sums[static_cast<std::size_t>(i)].n);
    double wgt = 1.0;
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      const double xj = 1.0 / static_cast<double>(out.sums[static_cast<std::size_t>(j)].n);
      wgt *= xj / (xj - xi);
    }
    acc += wgt * out.per_n[static_cast<std::size_t>(i)];
  }
  out.value = acc;
  return out;
}

inline PressureByOrbits pressure_by_orbits(const Model& m, const Eigen::VectorXd& f,
                                           int n_max) {
  return pressure_by_orbits(m.basis, f, n_max);
}

struct KappaByOrbits {
  std::vector<OrbitSum> sums;        // twisted partition sums, last five periods
  std::complex<double> value{0.0, 0.0};  // stabilized consecutive-ratio limit
};

// Leading twisted eigenvalue from periodic orbits: the twisted partition sum
// over period-n points grows like kappa^n, so consecutive ratios converge
// geometrically and one Aitken step removes the dominant error term. Two
// overlapping accelerations are compared; if they disagree the ratios are a
// mixture of comparable eigenvalues and no limit is claimed. The holonomy
// enters through the conjugated character, matching the pullback weights, so
// this is a route-independent check of the spectral path.
inline KappaByOrbits kappa_by_orbits(const CalibratedModel& cm,
                                     const Eigen::VectorXd& v_frame, const Character& mu,
                                     int n_max) {
  if (v_frame.size() != cm.rank())
    throw DimensionMismatch("frequency arity does not match the cocycle rank");
  if (n_max < 5) throw OutsideDomain("need at least five periods to stabilize");

  Eigen::VectorXcd wgt(cm.dim());
  for (int j = 0; j < cm.dim(); ++j)
    wgt[j] = std::exp(std::complex<double>(cm.log_weight0[j],
                                           v_frame.dot(cm.K_frame.col(j)))) *
             std::conj(mu(cm.theta[static_cast<std::size_t>(j)]));

  KappaByOrbits out;
  const int L = cm.ws.depth() + 1;
  for (int n = n_max - 4; n <= n_max; ++n) {
    KahanSum<std::complex<double>> z;
    detail::for_each_cycle(cm.ws.shift(), n, [&](const Word& w) {
      Word u = w;
      while (u.size() < w.size() + static_cast<std::size_t>(cm.ws.depth()))
        u.push_back(w[u.size() % w.size()]);
      std::complex<double> prod{1.0, 0.0};
      for (std::size_t j = 0; j < w.size(); ++j)
        prod *= wgt[cm.ws.index(Word(u.begin() + static_cast<long>(j),
                                     u.begin() + static_cast<long>(j) + L))];
      z.add(prod);
    });
    out.sums.push_back({n, z.value()});
  }

  std::complex<double> r[4];
  for (int i = 0; i < 4; ++i) {
    const auto& a = out.sums[static_cast<std::size_t>(i)].value;
    const auto& b = out.sums[static_cast<std::size_t>(i + 1)].value;
    if (std::abs(a) < 1e-280) throw NoConvergence("orbit sums vanish");
    r[i] = b / a;
  }
  auto aitken = [](std::complex<double> a, std::complex<double> b,
                   std::complex<double> c) {
    const std::complex<double> den = (c - b) - (b - a);
    if (std::abs(den) < 1e-14 * (std::abs(a) + std::abs(b) + std::abs(c))) return c;
    return c - (c - b) * (c - b) / den;
  };
  const std::complex<double> a1 = aitken(r[0], r[1], r[2]);
  const std::complex<double> a2 = aitken(r[1], r[2], r[3]);
  if (std::abs(a2 - a1) > 1e-6 * std::max(1.0, std::abs(a2)))
    throw NoConvergence("orbit ratios do not stabilize");
  out.value = a2;
  return out;
}

// Correlation value at one time by exhaustive cylinder enumeration. Every
// surviving term of the shifted-window series is summed directly: for each
// step count k, all admissible words long enough to pin the k cocycle
// windows at refinement depth_d, each weighted by its exact Gibbs mass.
// The group average over the compact fiber is done in closed form (character
// orthogonality), and the position-side pair integral is the tabulated
// radial cross-correlation of the two windows. Terms whose flow offset lies
// beyond the table cut vanish identically, which bounds the step counts.
//
// The enumeration count is capped: past the budget the call refuses rather
// than grinding. Order-two holonomy keeps the sum real; the real part is
// returned, per unit of suspension volume (the mean roof divides the sum,
// matching the normalized product measure the limit statement is about).
inline double correlation_by_cylinders(const CalibratedModel& cm, const MixingQuery& q,
                                       double t, int depth_d, double budget = 1e7) {
  if (depth_d < cm.work_depth)
    throw DepthMismatch("refinement depth below the working depth");
  if (q.psi1.f.size() != cm.dim() || q.psi2.f.size() != cm.dim())
    throw DimensionMismatch("observable tables do not match the working basis");

  const std::complex<double> wfac = pair_weight(cm.model.group, q.psi1, q.psi2);
  if (std::abs(wfac) == 0.0) return 0.0;

  const Eigen::VectorXd uperp = transverse_drift(cm, q) * q.r_at(t);
  const CorrelationProfile& g = query_profile(cm, q);
  const int nperp = cm.rank() - 1;
  const Eigen::MatrixXd khat = cm.K_frame.bottomRows(nperp);

  const double tau_min = cm.tau.minCoeff(), tau_max = cm.tau.maxCoeff();
  const int k_lo = std::max(0, static_cast<int>(std::floor((t - g.cut) / tau_max)));
  const int k_hi = static_cast<int>(std::floor((t + g.cut) / tau_min));

  const int L = cm.work_depth + 1;
  const Shift& sh = cm.ws.shift();
  double nodes = 0.0;
  KahanSum<std::complex<double>> total;

  for (int k = k_lo; k <= k_hi; ++k) {
    const int len = k + depth_d + 1;
    Word w;
    w.reserve(static_cast<std::size_t>(len));

    auto rec = [&](auto&& self, double tau_part, Eigen::VectorXd kh_part,
                   AbelianGroup::Elem th_part) -> void {
      if (++nodes > budget) throw CombinatorialBlowup("cylinder budget exhausted");
      const int p = static_cast<int>(w.size());
      if (p == len) {
        const double flow = t - tau_part;
        const double rad = std::sqrt(flow * flow + (uperp - kh_part).squaredNorm());
        const double gv = g(rad);
        if (gv != 0.0) {
          const Word head(w.begin(), w.begin() + L);
          const Word at_k(w.begin() + k, w.begin() + k + L);
          total.add(cm.gibbs_cylinder(w) * q.psi2.f[cm.ws.index(head)] *
                    q.psi1.f[cm.ws.index(at_k)] * gv * wfac *
                    std::conj(q.psi1.mu(th_part)));
        }
        return;
      }
      for (int a = 0; a < sh.symbols(); ++a) {
        if (p > 0 && !sh.allowed(w[static_cast<std::size_t>(p - 1)], a)) continue;
        w.push_back(a);
        double tp = tau_part;
        Eigen::VectorXd kp = kh_part;
        AbelianGroup::Elem th = th_part;
        const int jw = p + 1 - L;  // start of the window completed by this symbol
        if (jw >= 0 && jw < k) {
          const int idx = cm.ws.index(Word(w.end() - L, w.end()));
          tp += cm.tau[idx];
          kp += khat.col(idx);
          th = cm.model.group.compose(th, cm.theta[static_cast<std::size_t>(idx)]);
        }
        // reachability of the flow window by the remaining steps
        const int done = std::min(std::max(jw + 1, 0), k);
        const double room = static_cast<double>(k - done);
        if (tp + room * tau_min <= t + g.cut && tp + room * tau_max >= t - g.cut)
          self(self, tp, std::move(kp), std::move(th));
        w.pop_back();
      }
    };
    rec(rec, 0.0, Eigen::VectorXd::Zero(nperp), cm.model.group.identity());
  }
  return total.value().real() / cm.mean_tau;
}

}  // namespace lomix
