#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "lomix/model.hpp"
#include "lomix/transfer.hpp"

namespace lomix {

// log of the dominant eigenvalue of the e^{potential}-weighted pullback.
inline double pressure(const WordSpace& ws, const Eigen::VectorXd& potential) {
  return std::log(rpf_solve(transfer_matrix_real(ws, potential)).lead);
}

// Adapted frame for the drift direction: columns [drift | orthonormal basis
// of ker psi0]. In frame coordinates the adapted inner product is the plain
// dot product, the drift is e_0, and the first coordinate of a cocycle value
// is its roof.
struct PsiFrame {
  Eigen::MatrixXd B;
  Eigen::MatrixXd Binv;
  Eigen::VectorXd psi0;

  int rank() const { return static_cast<int>(B.rows()); }
  Eigen::VectorXd to_frame(const Eigen::VectorXd& x) const { return Binv * x; }
  Eigen::VectorXd from_frame(const Eigen::VectorXd& c) const { return B * c; }
  Eigen::MatrixXd gram() const { return Binv.transpose() * Binv; }
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return (Binv * x).dot(Binv * y);
  }
  double norm(const Eigen::VectorXd& x) const { return (Binv * x).norm(); }
};

inline PsiFrame make_frame(const Eigen::VectorXd& drift, const Eigen::VectorXd& psi0) {
  const int r = static_cast<int>(drift.size());
  if (psi0.size() != r) throw DimensionMismatch("psi0 arity mismatch");
  if (std::abs(psi0.dot(drift) - 1.0) > 1e-8)
    throw OutsideDomain("drift must be psi0-normalized");
  Eigen::MatrixXd B(r, r);
  B.col(0) = drift;
  if (r > 1) {
    // Householder completion of psi0; trailing columns span its null space.
    Eigen::MatrixXd p = psi0;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
    Eigen::MatrixXd Q = qr.householderQ();
    for (int c = 1; c < r; ++c) {
      Eigen::VectorXd q = Q.col(c);
      int lead = 0;
      while (lead < r - 1 && std::abs(q[lead]) < 1e-12) ++lead;
      if (q[lead] < 0) q = -q;  // pin the sign so frames are reproducible
      B.col(c) = q;
    }
  }
  PsiFrame f;
  f.B = B;
  f.Binv = B.fullPivLu().inverse();
  f.psi0 = psi0;
  return f;
}

// Calibrated bundle: everything downstream of the pressure normalization.
//
// The raw cocycle is rescaled by the unique s* > 0 solving
// Pr(-s* psi0.K_raw) = 0; tau = psi0.K is then a pressure-normalized roof,
// the Perron triple at -tau gives the invariant Gibbs masses, the drift is
// the Gibbs mean of K per unit roof, and Khat = K - drift tau^T integrates
// to zero by construction. Depth-0 data is carried at working depth 1 so the
// eigenfunction correction stays expressible as a per-word weight.
struct CalibratedModel {
  Model model;
  WordSpace ws;  // working basis
  int work_depth;
  double scale;

  Eigen::MatrixXd K;     // calibrated cocycle values, rank x dim
  Eigen::VectorXd tau;   // psi0^T K per word, strictly positive
  std::vector<AbelianGroup::Elem> theta;  // promoted marks

  RpfData rpf;             // Perron data of the e^{-tau} pullback (lead ~ 1)
  Eigen::VectorXd gibbs;   // cylinder masses nu_i h_i, sum 1
  double mean_tau = 0.0;   // gibbs . tau
  Eigen::VectorXd drift;   // psi0(drift) = 1
  Eigen::MatrixXd Khat;    // K - drift tau^T, Gibbs-mean zero per row
  PsiFrame frame;
  Eigen::MatrixXd K_frame;  // Binv K; row 0 agrees with tau

  // log weights of the unit-normalized pullback: the weighted matrix fixes
  // the constant vector and gibbs is its stationary left vector
  Eigen::VectorXd log_weight0;

  // prefix-class bookkeeping for the eigenfunction (depth work_depth-1 data)
  std::vector<int> prefix_class;   // per word
  std::vector<int> suffix_class;   // per word
  std::vector<double> class_log_h; // per class

  CalibratedModel(Model m, WordSpace basis, int wd, double sc)
      : model(std::move(m)), ws(std::move(basis)), work_depth(wd), scale(sc) {}

  int dim() const { return ws.dim(); }
  int rank() const { return model.rank(); }

  // Eigenmeasure mass of an arbitrary cylinder. Words shorter than the
  // working window are summed over their admissible completions; longer
  // words strip one left window at a time.
  double nu_cylinder(const Word& w) const {
    if (w.empty()) return 1.0;
    if (!ws.shift().admissible(w)) return 0.0;
    const std::size_t L = static_cast<std::size_t>(work_depth) + 1;
    if (w.size() < L) {
      double s = 0.0;
      for (int i = 0; i < ws.dim(); ++i)
        if (in_cylinder(w, ws.word(i))) s += rpf.nu[i];
      return s;
    }
    const double log_lead = std::log(rpf.lead);
    double log_mass = 0.0;
    for (std::size_t j = 0; j + L < w.size(); ++j)
      log_mass -= tau[ws.index(Word(w.begin() + j, w.begin() + j + L))] + log_lead;
    return std::exp(log_mass) * rpf.nu[ws.index(Word(w.end() - L, w.end()))];
  }

  // Gibbs mass of a cylinder: h is constant on the cylinder once the word
  // reaches the eigenfunction window, so the density is one factor.
  double gibbs_cylinder(const Word& w) const {
    if (static_cast<int>(w.size()) < work_depth)
      throw WordTooShort("cylinder shorter than the eigenfunction window");
    if (!ws.shift().admissible(w)) return 0.0;
    if (w.size() < static_cast<std::size_t>(work_depth) + 1) {
      double s = 0.0;
      for (int i = 0; i < ws.dim(); ++i)
        if (in_cylinder(w, ws.word(i))) s += gibbs[i];
      return s;
    }
    const Word head(w.begin(), w.begin() + work_depth + 1);
    const int pc = prefix_class[static_cast<std::size_t>(ws.index(head))];
    return std::exp(class_log_h[static_cast<std::size_t>(pc)]) * nu_cylinder(w);
  }
};

namespace detail {

// Per-word data promoted from the model depth to the working depth.
template <class T>
std::vector<T> promote_table(const std::vector<T>& src, const WordSpace& from,
                             const WordSpace& to) {
  std::vector<T> out(static_cast<std::size_t>(to.dim()));
  for (int i = 0; i < to.dim(); ++i) {
    const Word& w = to.word(i);
    out[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(
        from.index(Word(w.begin(), w.begin() + from.depth() + 1)))];
  }
  return out;
}

}  // namespace detail

inline CalibratedModel calibrate(const Model& m) {
  const int work_depth = std::max(m.depth(), 1);
  WordSpace ws(m.basis.shift(), work_depth);
  const int D = ws.dim();
  const int r = m.rank();

  Eigen::MatrixXd Kraw(r, D);
  for (int i = 0; i < D; ++i) {
    const Word& w = ws.word(i);
    Kraw.col(i) =
        m.raw.values.col(m.basis.index(Word(w.begin(), w.begin() + m.depth() + 1)));
  }
  Eigen::VectorXd tau_raw = Kraw.transpose() * m.psi0;
  if (tau_raw.minCoeff() <= 0.0)
    throw NonPositiveRoof("psi0 of the cocycle must be strictly positive");

  // unique root of s -> Pr(-s tau_raw), strictly decreasing from htop >= 0
  auto pr = [&](double s) { return pressure(ws, (-s * tau_raw).eval()); };
  double lo = 0.0, hi = 1.0;
  if (pr(0.0) < 0.0) throw RootBracketFailure("pressure negative at zero scale");
  int guard = 0;
  while (pr(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) throw RootBracketFailure("pressure does not change sign");
  }
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pr(mid) > 0.0 ? lo : hi) = mid;
  }
  const double scale = 0.5 * (lo + hi);

  CalibratedModel cm(m, ws, work_depth, scale);
  cm.K = scale * Kraw;
  cm.tau = scale * tau_raw;
  cm.theta = detail::promote_table(m.theta, m.basis, cm.ws);

  cm.rpf = rpf_solve(transfer_matrix_real(cm.ws, (-cm.tau).eval()));
  cm.gibbs = cm.rpf.nu.cwiseProduct(cm.rpf.h);
  cm.mean_tau = cm.gibbs.dot(cm.tau);
  cm.drift = (cm.K * cm.gibbs) / cm.mean_tau;
  cm.Khat = cm.K - cm.drift * cm.tau.transpose();
  cm.frame = make_frame(cm.drift, m.psi0);
  cm.K_frame = cm.frame.Binv * cm.K;

  // eigenfunction depends on the first work_depth symbols only; bucket words
  // by that prefix and insist the solved vector honors the reduction
  std::map<Word, int> classes;
  cm.prefix_class.resize(static_cast<std::size_t>(D));
  cm.suffix_class.resize(static_cast<std::size_t>(D));
  for (int i = 0; i < D; ++i) {
    const Word& w = cm.ws.word(i);
    Word p(w.begin(), w.begin() + work_depth);
    auto [it, fresh] = classes.emplace(p, static_cast<int>(classes.size()));
    if (fresh)
      cm.class_log_h.push_back(std::log(cm.rpf.h[i]));
    else if (std::abs(std::log(cm.rpf.h[i]) - cm.class_log_h[static_cast<std::size_t>(
                                                   it->second)]) > 1e-8)
      throw NoConvergence("eigenfunction failed its depth reduction");
    cm.prefix_class[static_cast<std::size_t>(i)] = it->second;
  }
  for (int i = 0; i < D; ++i) {
    const Word& w = cm.ws.word(i);
    auto it = classes.find(Word(w.end() - work_depth, w.end()));
    if (it == classes.end()) throw NotMixing("suffix class unreachable");
    cm.suffix_class[static_cast<std::size_t>(i)] = it->second;
  }

  cm.log_weight0.resize(D);
  const double log_lead = std::log(cm.rpf.lead);
  for (int i = 0; i < D; ++i)
    cm.log_weight0[i] =
        -cm.tau[i] +
        cm.class_log_h[static_cast<std::size_t>(cm.prefix_class[static_cast<std::size_t>(i)])] -
        cm.class_log_h[static_cast<std::size_t>(cm.suffix_class[static_cast<std::size_t>(i)])] -
        log_lead;
  return cm;
}

// Green-Kubo limit variance of an observable on the working basis:
// var = c0 + 2 sum_{n>=1} c_n with c_n the stationary autocovariance of the
// centered values. The normalized pullback makes each c_n one matrix-vector
// product; terms decay geometrically at the spectral gap.
inline double asymptotic_variance(const CalibratedModel& cm, const Eigen::VectorXd& f) {
  if (f.size() != cm.dim()) throw DimensionMismatch("observable basis mismatch");
  const Eigen::MatrixXd L0 = transfer_matrix_real(cm.ws, cm.log_weight0);
  Eigen::VectorXd fb = f - Eigen::VectorXd::Constant(f.size(), cm.gibbs.dot(f));
  const double c0 = cm.gibbs.dot(fb.cwiseProduct(fb));
  double var = c0;
  Eigen::VectorXd u = fb;
  const double floor = std::max(c0, 1e-30) * 1e-16;
  for (int n = 1; n <= 100000; ++n) {
    u = L0 * u;
    const double cn = cm.gibbs.dot(fb.cwiseProduct(u));
    var += 2.0 * cn;
    if (std::abs(cn) < floor && n > 3) return var;
  }
  throw NoConvergence("autocovariance sum did not settle");
}

}  // namespace lomix
