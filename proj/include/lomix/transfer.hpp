#pragma once

#include <Eigen/Dense>
#include <complex>

#include "lomix/sft.hpp"

namespace lomix {

// Weighted pullback matrix on a word basis: row i collects its one-symbol
// extensions j with weight exp(log_weight[j]). Applying it to a value table
// realizes "sum over preimages, weighted", and powers stay on the basis.
inline Eigen::MatrixXcd transfer_matrix(const WordSpace& ws,
                                        const Eigen::VectorXcd& log_weight) {
  if (log_weight.size() != ws.dim())
    throw DimensionMismatch("one log weight per basis word required");
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(ws.dim(), ws.dim());
  for (int i = 0; i < ws.dim(); ++i)
    for (int j : ws.preimages(i)) M(i, j) = std::exp(log_weight[j]);
  return M;
}

inline Eigen::MatrixXd transfer_matrix_real(const WordSpace& ws,
                                            const Eigen::VectorXd& log_weight) {
  if (log_weight.size() != ws.dim())
    throw DimensionMismatch("one log weight per basis word required");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ws.dim(), ws.dim());
  for (int i = 0; i < ws.dim(); ++i)
    for (int j : ws.preimages(i)) M(i, j) = std::exp(log_weight[j]);
  return M;
}

// Perron triple of a nonnegative primitive matrix.
struct RpfData {
  double lead = 0.0;          // simple positive dominant eigenvalue
  Eigen::VectorXd h;          // right vector, strictly positive, nu.dot(h) = 1
  Eigen::VectorXd nu;         // left vector, strictly positive, sums to 1
  double sub_modulus = 0.0;   // largest modulus among the other eigenvalues
};

namespace detail {

// Extract an essentially-real eigenvector as a real one, or fail.
inline Eigen::VectorXd realize(const Eigen::VectorXcd& vc) {
  int imax = 0;
  for (int i = 1; i < vc.size(); ++i)
    if (std::abs(vc[i]) > std::abs(vc[imax])) imax = i;
  if (std::abs(vc[imax]) == 0.0) throw NoConvergence("null eigenvector");
  Eigen::VectorXcd rotated = vc * (std::abs(vc[imax]) / vc[imax]);
  if (rotated.imag().cwiseAbs().maxCoeff() > 1e-8 * rotated.real().cwiseAbs().maxCoeff())
    throw NoConvergence("eigenvector is not real after rotation");
  return rotated.real();
}

}  // namespace detail

inline RpfData rpf_solve(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || n == 0) throw DimensionMismatch("square matrix required");
  if ((M.array() < 0.0).any()) throw OutsideDomain("matrix must be entrywise nonnegative");

  Eigen::EigenSolver<Eigen::MatrixXd> right(M);
  Eigen::EigenSolver<Eigen::MatrixXd> left(M.transpose());
  if (right.info() != Eigen::Success || left.info() != Eigen::Success)
    throw NoConvergence("dense eigensolver failed");

  const auto& ev = right.eigenvalues();
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(ev[i]) > std::abs(ev[imax])) imax = i;
  const double lead_mod = std::abs(ev[imax]);
  if (lead_mod <= 0.0) throw NotMixing("matrix is nilpotent");

  double sub = 0.0;
  for (int i = 0; i < n; ++i)
    if (i != imax) sub = std::max(sub, std::abs(ev[i]));
  // a primitive matrix has a strictly dominant simple positive eigenvalue
  if (n > 1 && sub >= lead_mod * (1.0 - 1e-10))
    throw NotMixing("no strictly dominant eigenvalue");
  if (std::abs(ev[imax].imag()) > 1e-9 * lead_mod || ev[imax].real() <= 0.0)
    throw NotMixing("dominant eigenvalue is not real positive");

  const double lead = ev[imax].real();

  Eigen::VectorXd h = detail::realize(right.eigenvectors().col(imax));
  if (h.sum() < 0) h = -h;

  int jmax = 0;
  const auto& evl = left.eigenvalues();
  for (int i = 1; i < n; ++i)
    if (std::abs(evl[i]) > std::abs(evl[jmax])) jmax = i;
  Eigen::VectorXd nu = detail::realize(left.eigenvectors().col(jmax));
  if (nu.sum() < 0) nu = -nu;

  const double hmax = h.cwiseAbs().maxCoeff();
  const double numax = nu.cwiseAbs().maxCoeff();
  if (h.minCoeff() <= 1e-12 * hmax || nu.minCoeff() <= 1e-12 * numax)
    throw NotMixing("Perron vectors are not strictly positive");

  nu /= nu.sum();
  h /= nu.dot(h);

  const double res_r = (M * h - lead * h).cwiseAbs().maxCoeff();
  const double res_l = (M.transpose() * nu - lead * nu).cwiseAbs().maxCoeff();
  if (res_r > 1e-10 * lead * h.cwiseAbs().maxCoeff() ||
      res_l > 1e-10 * lead * nu.cwiseAbs().maxCoeff())
    throw NoConvergence("Perron residual too large");

  RpfData out;
  out.lead = lead;
  out.h = std::move(h);
  out.nu = std::move(nu);
  out.sub_modulus = sub;
  return out;
}

}  // namespace lomix
