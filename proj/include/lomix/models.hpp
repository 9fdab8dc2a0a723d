#pragma once

#include <string>

#include "lomix/schottky.hpp"

namespace lomix {

// Frozen two-generator fixture. Axis data per factor: (attractor, repeller,
// length). The letter lengths average 25 vs 32.5: a wide roof spread, so the
// return-time distribution smooths out within a short flow horizon, while
// the shortest length 23 keeps the depth-1 cylinder truncation near 1e-10.
// One lift per factor is negated: with both lifts plain, every sign cocycle
// is a coboundary of the cell indicator and one character would never mix.
// The second-factor poles flank the cells from opposite outer sides (-0.55
// and 1.55), while the first factor keeps one pole beyond the cells (2.0)
// and one between them (0.40). For each letter the two factors' source-cell
// contrasts then enter with opposite signs. With only two letters the
// letter contrast alone would make roof and transverse component collinear,
// leaving a near-unit twisted radius along one frequency ray; the opposed
// cell contrasts are what keep the step covariance well conditioned.
inline SchottkyPair r2a_pair() {
  const FactorGen f1g0{loxodromic_on_axis(0.0, 2.00, 23.0).negated(),
                       {-0.1, 0.1}, {1.80, 2.20}};
  const FactorGen f1g1{loxodromic_on_axis(1.0, 0.40, 35.0),
                       {0.9, 1.1}, {0.30, 0.50}};
  const FactorGen f2g0{loxodromic_on_axis(0.0, -0.55, 27.0),
                       {-0.1, 0.1}, {-0.65, -0.45}};
  const FactorGen f2g1{loxodromic_on_axis(1.0, 1.55, 30.0).negated(),
                       {0.9, 1.1}, {1.45, 1.65}};
  return SchottkyPair({{f1g0, f2g0}, {f1g1, f2g1}});
}

// rank-2 model with the full sign group (Z/2)^2
inline Model r2a() { return r2a_pair().model(1, "r2a"); }

// same cocycle, holonomy reduced to the first factor's sign bit
inline Model r2a_z2() { return r2a_pair().model(1, "r2a-z2", 1); }

// full 2-shift with unit roof: calibration lands on log 2 and the model is
// lattice by design (every return time equal)
inline Model full2_const() {
  return Model("full2-const", Shift::full(2), 0,
               Cocycle{0, Eigen::MatrixXd::Ones(1, 2)}, AbelianGroup(),
               {{}, {}}, Eigen::VectorXd::Ones(1));
}

// golden-mean shift with unit roof: calibration lands on log phi
inline Model gm_const() {
  return Model("gm-const", Shift(2, {1, 1, 1, 0}), 0,
               Cocycle{0, Eigen::MatrixXd::Ones(1, 2)}, AbelianGroup(),
               {{}, {}}, Eigen::VectorXd::Ones(1));
}

// full 2-shift with letter roofs 1 and sqrt 2: the worst-approximable
// ratio keeps every return-time resonance far from the scan window, so the
// rank-1 nonlattice branch has a clean fixture
inline Model r1a() {
  Eigen::MatrixXd k(1, 2);
  k << 1.0, std::sqrt(2.0);
  return Model("r1a", Shift::full(2), 0, Cocycle{0, k}, AbelianGroup(), {{}, {}},
               Eigen::VectorXd::Ones(1));
}

inline Model by_name(const std::string& name) {
  if (name == "r2a") return r2a();
  if (name == "r2a-z2") return r2a_z2();
  if (name == "full2-const") return full2_const();
  if (name == "gm-const") return gm_const();
  if (name == "r1a") return r1a();
  throw OutsideDomain("unknown builtin model '" + name +
                      "' (have r2a, r2a-z2, full2-const, gm-const, r1a)");
}

}  // namespace lomix
