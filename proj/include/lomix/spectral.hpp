#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "lomix/thermo.hpp"

namespace lomix {

// Twisted weighted pullback: the unit-normalized weights, a Laplace damping
// e^{-a tau}, a frequency phase along the cocycle (frame coordinates), and a
// conjugated holonomy character per word.
inline Eigen::MatrixXcd twisted_matrix(const CalibratedModel& cm,
                                       const Eigen::VectorXd& v_frame,
                                       const Character& mu, double a = 0.0) {
  if (v_frame.size() != cm.rank())
    throw DimensionMismatch("frequency arity does not match the cocycle rank");
  Eigen::VectorXcd factor(cm.dim());
  for (int j = 0; j < cm.dim(); ++j) {
    const double phase = v_frame.dot(cm.K_frame.col(j));
    factor[j] =
        std::exp(std::complex<double>(cm.log_weight0[j] - a * cm.tau[j], phase)) *
        std::conj(mu(cm.theta[static_cast<std::size_t>(j)]));
  }
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(cm.dim(), cm.dim());
  for (int i = 0; i < cm.dim(); ++i)
    for (int j : cm.ws.preimages(i)) M(i, j) = factor[j];
  return M;
}

// Leading eigenvalue with an isolation guard.
inline std::complex<double> kappa_lead(const Eigen::MatrixXcd& M,
                                       double gap_floor = 1e-6) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed");
  const auto& ev = es.eigenvalues();
  int imax = 0;
  for (int i = 1; i < ev.size(); ++i)
    if (std::abs(ev[i]) > std::abs(ev[imax])) imax = i;
  double sub = 0.0;
  for (int i = 0; i < ev.size(); ++i)
    if (i != imax) sub = std::max(sub, std::abs(ev[i]));
  if (ev.size() > 1 && std::abs(ev[imax]) - sub < gap_floor)
    throw GapTooSmall("leading eigenvalue is not isolated");
  return ev[imax];
}

inline std::complex<double> kappa_lead(const CalibratedModel& cm,
                                       const Eigen::VectorXd& v_frame,
                                       const Character& mu, double a = 0.0,
                                       double gap_floor = 1e-6) {
  return kappa_lead(twisted_matrix(cm, v_frame, mu, a), gap_floor);
}

// Largest eigenvalue modulus, no isolation requirement: the right quantity
// for circle-distance scans, where subleading moduli may tie.
inline double spectral_radius(const CalibratedModel& cm, const Eigen::VectorXd& v_frame,
                              const Character& mu, double a = 0.0) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(twisted_matrix(cm, v_frame, mu, a),
                                                 /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Rank-one split at the leading eigenvalue: M = kappa P + R with P the
// spectral projector and R = M - kappa P, so P R = R P = 0 and
// (I - M)^{-1} = P/(1 - kappa) + (I - R)^{-1}(I - P).
struct SpectralSplit {
  std::complex<double> kappa;
  double gap = 0.0;      // |kappa| minus the largest remaining modulus
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd R;
};

inline SpectralSplit spectral_split(const Eigen::MatrixXcd& M,
                                    double gap_floor = 1e-6) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || n == 0) throw DimensionMismatch("square matrix required");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(M);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> left(M.transpose());
  if (right.info() != Eigen::Success || left.info() != Eigen::Success)
    throw NoConvergence("dense eigensolver failed");

  const auto& ev = right.eigenvalues();
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(ev[i]) > std::abs(ev[imax])) imax = i;
  double sub = 0.0;
  for (int i = 0; i < n; ++i)
    if (i != imax) sub = std::max(sub, std::abs(ev[i]));
  const double gap = std::abs(ev[imax]) - sub;
  if (n > 1 && gap < gap_floor) throw GapTooSmall("leading eigenvalue is not isolated");

  const auto& evl = left.eigenvalues();
  int jmax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(evl[i]) > std::abs(evl[jmax])) jmax = i;
  if (std::abs(evl[jmax] - ev[imax]) > 1e-8 * (1.0 + std::abs(ev[imax])))
    throw NoConvergence("left and right leading eigenvalues disagree");

  Eigen::VectorXcd r = right.eigenvectors().col(imax);
  Eigen::VectorXcd w = left.eigenvectors().col(jmax);
  const std::complex<double> denom = w.transpose() * r;
  if (std::abs(denom) < 1e-12 * r.norm() * w.norm())
    throw GapTooSmall("leading eigenvalue is defective");

  SpectralSplit s;
  s.kappa = ev[imax];
  s.gap = gap;
  s.P = (r * w.transpose()) / denom;
  s.R = M - s.kappa * s.P;
  return s;
}

// Direct solve of (I - M) x = f with an invertibility guard.
inline Eigen::VectorXcd resolvent_apply(const Eigen::MatrixXcd& M,
                                        const Eigen::VectorXcd& f) {
  if (M.rows() != f.size()) throw DimensionMismatch("operand size mismatch");
  Eigen::MatrixXcd A =
      Eigen::MatrixXcd::Identity(M.rows(), M.cols()) - M;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  if (!lu.isInvertible()) throw SingularResolvent("operator has a unit eigenvalue");
  Eigen::VectorXcd x = lu.solve(f);
  if ((A * x - f).norm() > 1e-9 * (1.0 + f.norm()))
    throw SingularResolvent("resolvent solve residual too large");
  return x;
}

// (I - R)^{-1} (I - P) f: the part of the resolvent that stays bounded when
// kappa crosses 1. R kills the leading line, so I - R is invertible as long
// as the remaining spectrum avoids 1.
inline Eigen::VectorXcd q_part_apply(const SpectralSplit& s,
                                     const Eigen::VectorXcd& f) {
  Eigen::VectorXcd g = f - s.P * f;
  Eigen::MatrixXcd A =
      Eigen::MatrixXcd::Identity(s.R.rows(), s.R.cols()) - s.R;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  if (!lu.isInvertible()) throw SingularResolvent("residual spectrum touches 1");
  Eigen::VectorXcd x = lu.solve(g);
  if ((A * x - g).norm() > 1e-9 * (1.0 + g.norm()))
    throw SingularResolvent("residual resolvent solve failed");
  return x;
}

inline Eigen::VectorXcd split_resolvent_apply(const SpectralSplit& s,
                                              const Eigen::VectorXcd& f) {
  if (std::abs(1.0 - s.kappa) < 1e-14)
    throw SingularResolvent("leading eigenvalue equals 1");
  return (s.P * f) / (1.0 - s.kappa) + q_part_apply(s, f);
}

namespace detail {

// Two Richardson sweeps over h, h/2, h/4 for an O(h^2) difference rule.
inline std::complex<double> richardson2(
    const std::function<std::complex<double>(double)>& d, double h0) {
  const std::complex<double> d0 = d(h0), d1 = d(h0 / 2), d2 = d(h0 / 4);
  const std::complex<double> r0 = (4.0 * d1 - d0) / 3.0;
  const std::complex<double> r1 = (4.0 * d2 - d1) / 3.0;
  return (16.0 * r1 - r0) / 15.0;
}

inline double richardson2_real(const std::function<double(double)>& d, double h0) {
  const double d0 = d(h0), d1 = d(h0 / 2), d2 = d(h0 / 4);
  const double r0 = (4.0 * d1 - d0) / 3.0;
  const double r1 = (4.0 * d2 - d1) / 3.0;
  return (16.0 * r1 - r0) / 15.0;
}

}  // namespace detail

// Value, gradient, and Hessian of the leading-eigenvalue function at v = 0,
// by central differences with two Richardson sweeps (base step 1e-2).
struct KappaJet {
  std::complex<double> value0;
  Eigen::VectorXcd D;
  Eigen::MatrixXcd D2;
};

inline KappaJet kappa_jet(const CalibratedModel& cm, const Character& mu,
                          double gap_floor = 1e-6, double h0 = 1e-2) {
  const int r = cm.rank();
  auto kap = [&](const Eigen::VectorXd& v) {
    return kappa_lead(cm, v, mu, 0.0, gap_floor);
  };
  KappaJet jet;
  jet.value0 = kap(Eigen::VectorXd::Zero(r));
  jet.D.resize(r);
  jet.D2.resize(r, r);
  const std::complex<double> k0 = jet.value0;

  for (int i = 0; i < r; ++i) {
    jet.D[i] = detail::richardson2(
        [&](double h) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
          v[i] = h;
          auto kp = kap(v);
          v[i] = -h;
          return (kp - kap(v)) / (2.0 * h);
        },
        h0);
    jet.D2(i, i) = detail::richardson2(
        [&](double h) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
          v[i] = h;
          auto kp = kap(v);
          v[i] = -h;
          return (kp - 2.0 * k0 + kap(v)) / (h * h);
        },
        h0);
  }
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      jet.D2(i, j) = detail::richardson2(
          [&](double h) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
            auto at = [&](double si, double sj) {
              v[i] = si * h;
              v[j] = sj * h;
              return kap(v);
            };
            return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
          },
          h0);
      jet.D2(j, i) = jet.D2(i, j);
    }
  return jet;
}

// Quadratic-model remainder |kappa(v) - (1 + D.v + v^T D2 v / 2)|; cubic decay
// in |v| certifies the jet.
inline double kappa_cubic_remainder(const CalibratedModel& cm, const Character& mu,
                                    const KappaJet& jet,
                                    const Eigen::VectorXd& v_frame,
                                    double gap_floor = 1e-6) {
  const Eigen::VectorXcd vc = v_frame.cast<std::complex<double>>();
  // plain bilinear pairing, no conjugation
  const std::complex<double> quad =
      jet.value0 + (jet.D.transpose() * vc)(0) + 0.5 * (vc.transpose() * jet.D2 * vc)(0);
  return std::abs(kappa_lead(cm, v_frame, mu, 0.0, gap_floor) - quad);
}

// Implicit pressure shift: the unique t - 1 with Pr(-t tau + <u, Khat>) = 0,
// for u in the kernel of psi0 (frame coordinates, first entry zero).
inline double pressure_shift(const CalibratedModel& cm, const Eigen::VectorXd& u_frame) {
  if (u_frame.size() != cm.rank()) throw DimensionMismatch("direction arity mismatch");
  if (std::abs(u_frame[0]) > 1e-10 * std::max(1.0, u_frame.norm()))
    throw NotInKernel("transverse direction has a roof component");
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(cm.dim());
  for (int c = 1; c < cm.rank(); ++c)
    phi += u_frame[c] * cm.K_frame.row(c).transpose();
  auto F = [&](double t) { return pressure(cm.ws, (-t * cm.tau + phi).eval()); };
  double lo = 1.0;
  int guard = 0;
  while (F(lo) < 0.0) {
    lo -= 0.5;
    if (++guard > 60) throw RootBracketFailure("no lower bracket for the shifted root");
  }
  double hi = lo + 0.5;
  guard = 0;
  while (F(hi) > 0.0) {
    hi += 0.5;
    if (++guard > 60) throw RootBracketFailure("no upper bracket for the shifted root");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) - 1.0;
}

// Transverse covariance per unit roof, three independent routes.

// Hessian of the implicit pressure shift at u = 0.
inline Eigen::MatrixXd transverse_covariance_pressure(const CalibratedModel& cm,
                                                      double h0 = 1e-2) {
  const int k = cm.rank() - 1;
  Eigen::MatrixXd H(k, k);
  auto P = [&](const Eigen::VectorXd& ut) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(cm.rank());
    u.tail(k) = ut;
    return pressure_shift(cm, u);
  };
  const double p0 = P(Eigen::VectorXd::Zero(k));
  for (int i = 0; i < k; ++i) {
    H(i, i) = detail::richardson2_real(
        [&](double h) {
          Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
          u[i] = h;
          const double pp = P(u);
          u[i] = -h;
          return (pp - 2.0 * p0 + P(u)) / (h * h);
        },
        h0);
    for (int j = i + 1; j < k; ++j) {
      H(i, j) = detail::richardson2_real(
          [&](double h) {
            Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
            auto at = [&](double si, double sj) {
              u[i] = si * h;
              u[j] = sj * h;
              return P(u);
            };
            return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
          },
          h0);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

// Transverse block of -Re D2 kappa(0) per unit roof.
inline Eigen::MatrixXd transverse_covariance_kappa(const CalibratedModel& cm,
                                                   const KappaJet& jet) {
  const int k = cm.rank() - 1;
  Eigen::MatrixXd out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = -jet.D2(i + 1, j + 1).real();
  return out / cm.mean_tau;
}

// Green-Kubo limit covariance of the transverse cocycle rows per unit roof.
inline Eigen::MatrixXd transverse_covariance_greenkubo(const CalibratedModel& cm) {
  const int k = cm.rank() - 1;
  Eigen::MatrixXd out(k, k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd fi = cm.K_frame.row(i + 1);
    out(i, i) = asymptotic_variance(cm, fi);
    for (int j = i + 1; j < k; ++j) {
      Eigen::VectorXd fj = cm.K_frame.row(j + 1);
      const double vp = asymptotic_variance(cm, (fi + fj).eval());
      const double vm = asymptotic_variance(cm, (fi - fj).eval());
      out(i, j) = out(j, i) = 0.25 * (vp - vm);
    }
  }
  return out / cm.mean_tau;
}

// Quadratic rate of transverse displacement per unit drift time.
inline double rate_function(const CalibratedModel& cm, const Eigen::MatrixXd& sigma,
                            const Eigen::VectorXd& u_frame) {
  if (u_frame.size() != cm.rank()) throw DimensionMismatch("direction arity mismatch");
  if (std::abs(u_frame[0]) > 1e-10 * std::max(1.0, u_frame.norm()))
    throw NotInKernel("displacement has a roof component");
  const int k = cm.rank() - 1;
  if (sigma.rows() != k || sigma.cols() != k)
    throw DimensionMismatch("covariance block size mismatch");
  if (k == 0) return 0.0;
  Eigen::VectorXd ut = u_frame.tail(k);
  return 0.5 * ut.dot(sigma.ldlt().solve(ut));
}

// 1 - spectral radius; vanishing values flag a lattice frequency.
inline double lattice_defect(const CalibratedModel& cm, const Eigen::VectorXd& v_frame,
                             const Character& mu) {
  return 1.0 - spectral_radius(cm, v_frame, mu);
}

// Ring scan for returns of |kappa| to the unit circle. Scans radii up to
// 4 pi / mean roof, far enough to catch any arithmetic roof lattice.
inline void assert_nonlattice(const CalibratedModel& cm, const Character& mu,
                              double threshold = 1e-8) {
  const int r = cm.rank();
  const double rmax = 4.0 * kPi / cm.mean_tau;
  const int nrad = 64;
  std::vector<Eigen::VectorXd> dirs;
  if (r == 1) {
    dirs.push_back(Eigen::VectorXd::Ones(1));
    dirs.push_back(-Eigen::VectorXd::Ones(1));
  } else {
    // a fixed fan of directions; lattice stripes are codimension-one affine
    // families, so any fan this dense meets the first few stripes
    const int nang = 16;
    for (int a = 0; a < nang; ++a) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(r);
      const double ang = 2.0 * kPi * a / nang;
      d[0] = std::cos(ang);
      d[1] = std::sin(ang);
      dirs.push_back(d);
    }
  }
  for (int k = 1; k <= nrad; ++k) {
    const double rad = rmax * k / nrad;
    for (const auto& d : dirs)
      if (spectral_radius(cm, (rad * d).eval(), mu) >= 1.0 - threshold)
        throw LatticeModel("leading eigenvalue returns to the unit circle");
  }
}

namespace detail {

// Polynomial extrapolation in h^2 down to h = 0 of an even-order difference
// rule sampled at the given steps. spread reports the change from the
// tableau diagonal one order lower, a running noise estimate.
inline std::complex<double> neville_h2(const std::vector<double>& steps,
                                       std::vector<std::complex<double>> t,
                                       double* spread) {
  const std::size_t n = t.size();
  std::vector<double> x(n);
  for (std::size_t s = 0; s < n; ++s) x[s] = steps[s] * steps[s];
  std::complex<double> prev = t[0];
  for (std::size_t m = 1; m < n; ++m) {
    prev = t[0];
    for (std::size_t s = 0; s + m < n; ++s)
      t[s] = (x[s] * t[s + 1] - x[s + m] * t[s]) / (x[s] - x[s + m]);
  }
  if (spread) *spread = std::abs(t[0] - prev);
  return t[0];
}

}  // namespace detail

// Quadratic data of the leading eigenvalue at frequency zero, in frame
// coordinates. star_inner is the frequency-side form of the second-order
// term; displacement-side pairings go through its inverse (see
// rate_function_I). P_hessian is the transverse Hessian of the implicit
// pressure and curvature_c its determinant, the curvature constant of the
// polynomially scaled limit.
struct SpectralExpansion {
  Eigen::VectorXcd Dkappa;     // purely imaginary, i nu_tau e0
  Eigen::MatrixXd D2kappa;     // real symmetric negative definite
  Eigen::MatrixXd star_inner;  // -D2kappa / 2
  Eigen::MatrixXd P_hessian;   // (rank-1) x (rank-1), empty for rank one
  double curvature_c = 1.0;    // det P_hessian, 1 for rank one
  double nu_tau = 0.0;
  PsiFrame frame;

  int rank() const { return static_cast<int>(D2kappa.rows()); }
  double star(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return a.dot(star_inner * b);
  }
};

// Normalized pressure response to a transverse frequency shift; the
// argument lives in the transverse block of the frame. P(0) = 1 and 0 is a
// critical minimum.
inline double implicit_pressure_P(const CalibratedModel& cm,
                                  const Eigen::VectorXd& v_perp) {
  if (v_perp.size() != cm.rank() - 1)
    throw DimensionMismatch("transverse argument needs rank-1 entries");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(cm.rank());
  if (cm.rank() > 1) u.tail(cm.rank() - 1) = v_perp;
  return 1.0 + pressure_shift(cm, u);
}

// Differentiate the leading eigenvalue at zero with its own step ladder and
// assemble the expansion record. Every structural property the record
// promises is verified here: lattice models are rejected up front, the
// extrapolation ladder must agree with itself, the gradient must be the
// mean roof times i e0, the Hessian must be real symmetric negative
// definite, and its transverse block must reproduce the independently
// computed implicit-pressure Hessian through the mean roof.
inline SpectralExpansion expand_kappa(const CalibratedModel& cm,
                                      std::vector<double> steps = {1e-2, 5e-3,
                                                                   2.5e-3}) {
  const int r = cm.rank();
  if (steps.size() < 2) throw OutsideDomain("need at least two step sizes");
  const Character triv = dual_group(cm.model.group).front();
  assert_nonlattice(cm, triv);

  const auto kap = [&](const Eigen::VectorXd& v) { return kappa_lead(cm, v, triv); };
  const std::complex<double> k0 = kap(Eigen::VectorXd::Zero(r));

  const std::size_t S = steps.size();
  double worst = 0.0;
  auto extrap = [&](const std::vector<std::complex<double>>& vals) {
    double spread = 0.0;
    const auto out = detail::neville_h2(steps, vals, &spread);
    worst = std::max(worst, spread);
    return out;
  };

  Eigen::VectorXcd D(r);
  Eigen::MatrixXcd D2(r, r);
  for (int i = 0; i < r; ++i) {
    // the +-h e_i values serve both the gradient and the Hessian diagonal
    std::vector<std::complex<double>> grad(S), diag(S);
    for (std::size_t s = 0; s < S; ++s) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
      v[i] = steps[s];
      const auto kp = kap(v);
      v[i] = -steps[s];
      const auto km = kap(v);
      grad[s] = (kp - km) / (2.0 * steps[s]);
      diag[s] = (kp - 2.0 * k0 + km) / (steps[s] * steps[s]);
    }
    D[i] = extrap(grad);
    D2(i, i) = extrap(diag);
  }
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      std::vector<std::complex<double>> cross(S);
      for (std::size_t s = 0; s < S; ++s) {
        const double h = steps[s];
        auto at = [&](double si, double sj) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
          v[i] = si * h;
          v[j] = sj * h;
          return kap(v);
        };
        cross[s] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      }
      D2(i, j) = D2(j, i) = extrap(cross);
    }
  if (worst > 1e-4)
    throw NoiseFloor("step ladder disagrees with itself beyond 1e-4");

  if (D.real().cwiseAbs().maxCoeff() > 1e-7)
    throw NoiseFloor("eigenvalue gradient has a real part above the noise budget");
  const Eigen::VectorXd slope = D.imag();
  Eigen::VectorXd want = Eigen::VectorXd::Zero(r);
  want[0] = cm.mean_tau;
  if ((slope - want).cwiseAbs().maxCoeff() > 1e-5 * cm.mean_tau)
    throw NoiseFloor("gradient is not the mean roof along the flow covector");

  if (D2.imag().cwiseAbs().maxCoeff() > 1e-6)
    throw NoiseFloor("eigenvalue Hessian has an imaginary part above the budget");
  const Eigen::MatrixXd Hraw = D2.real();
  if ((Hraw - Hraw.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw NoiseFloor("eigenvalue Hessian asymmetry above the budget");
  const Eigen::MatrixXd H = 0.5 * (Hraw + Hraw.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.eigenvalues().maxCoeff() > -1e-6)
    throw NoiseFloor("eigenvalue Hessian is not negative definite");

  SpectralExpansion ex;
  ex.frame = cm.frame;
  ex.nu_tau = cm.mean_tau;
  ex.Dkappa = D;
  ex.D2kappa = H;
  ex.star_inner = -0.5 * H;
  if (r > 1) {
    ex.P_hessian = transverse_covariance_pressure(cm);
    // two independent routes to one curvature: the kappa Hessian block and
    // the implicit-function Hessian, tied by the mean roof
    const Eigen::MatrixXd lhs = 2.0 * ex.star_inner.bottomRightCorner(r - 1, r - 1);
    const Eigen::MatrixXd rhs = cm.mean_tau * ex.P_hessian;
    if ((lhs - rhs).norm() > 1e-4 * rhs.norm())
      throw NoiseFloor("eigenvalue and pressure Hessians disagree");
    ex.curvature_c = ex.P_hessian.determinant();
    if (!(ex.curvature_c > 0.0))
      throw NoiseFloor("pressure Hessian lost positive definiteness");
  } else {
    ex.P_hessian.resize(0, 0);
    ex.curvature_c = 1.0;
  }
  return ex;
}

// Displacement rate in the limit exponent. The displacement side pairs in
// the dual of the frequency-side form, scaled by the mean roof: with
// S = star_inner, <a, b> = (nu_tau / 4) a^T S^{-1} b, deflated along the
// drift. On ker psi0 the block-inverse identity collapses this to half the
// squared P_hessian^{-1} norm of the transverse part, which is how the
// scaled correlation actually decays under a sqrt(ell t) displacement.
inline double rate_function_I(const SpectralExpansion& ex, const Eigen::VectorXd& u) {
  const int r = ex.rank();
  if (u.size() != r) throw DimensionMismatch("displacement arity mismatch");
  const Eigen::VectorXd uf = ex.frame.to_frame(u);
  if (std::abs(uf[0]) > 1e-10 * (1.0 + uf.norm()))
    throw NotInKernel("displacement has a flow component");
  if (r == 1) return 0.0;
  const Eigen::MatrixXd Sinv =
      ex.star_inner.llt().solve(Eigen::MatrixXd::Identity(r, r));
  const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(r, 0);
  const double c = 0.25 * ex.nu_tau;
  const double uu = c * uf.dot(Sinv * uf);
  const double uv = c * uf.dot(Sinv * e0);
  const double vv = c * e0.dot(Sinv * e0);
  return std::max(0.0, uu - uv * uv / vv);
}

// Worst distance to 2 pi Z, over cyclic words up to n_max, of the phase
// balance <v, K_cyc> + arg conj mu(theta_cyc) - n arg kappa(v). At a lattice
// frequency this vanishes identically.
inline double lattice_phase_defect(const CalibratedModel& cm,
                                   const Eigen::VectorXd& v_frame, const Character& mu,
                                   int n_max) {
  const std::complex<double> kap = kappa_lead(cm, v_frame, mu);
  const double akap = std::arg(kap);
  const Cocycle cal{cm.work_depth, cm.K};
  double worst = 0.0;
  const auto& sh = cm.ws.shift();
  for (int n = 1; n <= n_max; ++n) {
    for (const Word& w : sh.words(n)) {
      if (!sh.allowed(w.back(), w.front())) continue;
      Word u = w;
      while (u.size() < w.size() + static_cast<std::size_t>(cm.work_depth))
        u.push_back(w[u.size() % w.size()]);
      if (!sh.admissible(u)) continue;
      const Eigen::VectorXd Kc =
          cm.frame.Binv * birkhoff_cyclic(cal, cm.ws, w);
      auto mark = holonomy_cyclic(cm.model, w);
      const double phase =
          v_frame.dot(Kc) + std::arg(std::conj(mu(mark))) - n * akap;
      worst = std::max(worst, std::abs(std::remainder(phase, 2.0 * kPi)));
    }
  }
  return worst;
}

}  // namespace lomix
