#include <cmath>

#include "catch_amalgamated.hpp"
#include "lomix/thermo.hpp"

using namespace lomix;

namespace {

const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

Shift golden_mean() { return Shift(2, {1, 1, 1, 0}); }

// constant unit roof on the golden mean shift, rank 1, no holonomy
Model gm_const() {
  Cocycle K{0, Eigen::MatrixXd::Ones(1, 2)};
  AbelianGroup g;
  return Model("gm-const", golden_mean(), 0, K, g,
               {g.identity(), g.identity()}, Eigen::VectorXd::Ones(1));
}

// full 2-shift with word weights (p, 1-p) after calibration
Model coin(double p) {
  Cocycle K{0, Eigen::MatrixXd(1, 2)};
  K.values << -std::log(p), -std::log(1.0 - p);
  AbelianGroup g;
  return Model("coin", Shift::full(2), 0, K, g, {g.identity(), g.identity()},
               Eigen::VectorXd::Ones(1));
}

// rank-2 cocycle on the full 2-shift: K(0) = (1,0), K(1) = (1,1), psi0 = e_0
Model rank2_toy() {
  Cocycle K{0, Eigen::MatrixXd(2, 2)};
  K.values << 1, 1, 0, 1;
  AbelianGroup g;
  Eigen::VectorXd psi0(2);
  psi0 << 1, 0;
  return Model("toy", Shift::full(2), 0, K, g, {g.identity(), g.identity()}, psi0);
}

}  // namespace

TEST_CASE("Perron data of the golden mean adjacency matrix") {
  Eigen::MatrixXd M(2, 2);
  M << 1, 1, 1, 0;
  auto p = rpf_solve(M);
  REQUIRE(std::abs(p.lead - kGolden) < 1e-12);
  REQUIRE(p.h.minCoeff() > 0);
  REQUIRE(p.nu.minCoeff() > 0);
  REQUIRE(std::abs(p.nu.sum() - 1.0) < 1e-14);
  REQUIRE(std::abs(p.nu.dot(p.h) - 1.0) < 1e-14);
  // M is symmetric here, so left and right vectors coincide up to scale
  REQUIRE(std::abs(p.h[0] / p.h[1] - p.nu[0] / p.nu[1]) < 1e-12);
  REQUIRE(std::abs(p.h[0] / p.h[1] - kGolden) < 1e-12);
}

TEST_CASE("rpf_solve rejects matrices without a dominant eigenvalue") {
  Eigen::MatrixXd swap2(2, 2);
  swap2 << 0, 1, 1, 0;  // eigenvalues +1 and -1 tie in modulus
  REQUIRE_THROWS_AS(rpf_solve(swap2), NotMixing);
  Eigen::MatrixXd neg(1, 1);
  neg << -1;
  REQUIRE_THROWS_AS(rpf_solve(neg), OutsideDomain);
}

TEST_CASE("transfer matrix sums weighted preimages") {
  WordSpace ws(golden_mean(), 1);  // words 00, 01, 10
  Eigen::VectorXd lw = Eigen::VectorXd::Zero(3);
  auto M = transfer_matrix_real(ws, lw);
  // row of 00 pulls back to 00 and 10, row of 01 the same, row of 10 to 01
  Eigen::MatrixXd expect(3, 3);
  expect << 1, 0, 1, 1, 0, 1, 0, 1, 0;
  REQUIRE((M - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("calibration of the constant golden mean roof finds log phi") {
  auto cm = calibrate(gm_const());
  REQUIRE(std::abs(cm.scale - std::log(kGolden)) < 1e-12);
  REQUIRE(cm.work_depth == 1);
  REQUIRE(std::abs(cm.rpf.lead - 1.0) < 1e-12);
  REQUIRE(std::abs(cm.mean_tau - std::log(kGolden)) < 1e-12);
  REQUIRE(std::abs(cm.drift[0] - 1.0) < 1e-12);
  REQUIRE(cm.Khat.cwiseAbs().maxCoeff() < 1e-12);

  // Gibbs two-word masses of the maximal measure, from the Parry chain
  const double denom = kGolden * kGolden + 1.0;
  REQUIRE(std::abs(cm.gibbs[cm.ws.index({0, 0})] - kGolden / denom) < 1e-12);
  REQUIRE(std::abs(cm.gibbs[cm.ws.index({0, 1})] - 1.0 / denom) < 1e-12);
  REQUIRE(std::abs(cm.gibbs[cm.ws.index({1, 0})] - 1.0 / denom) < 1e-12);
}

TEST_CASE("normalized weights fix constants and preserve gibbs") {
  for (auto model : {gm_const(), coin(0.3), rank2_toy()}) {
    auto cm = calibrate(model);
    auto L0 = transfer_matrix_real(cm.ws, cm.log_weight0);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(cm.dim());
    REQUIRE((L0 * ones - ones).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((L0.transpose() * cm.gibbs - cm.gibbs).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(std::abs(cm.gibbs.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("pressure of an iid weight table is the log of the weight sum") {
  WordSpace ws(Shift::full(2), 0);
  Eigen::VectorXd pot(2);
  pot << std::log(0.4), std::log(0.35);
  REQUIRE(std::abs(pressure(ws, pot) - std::log(0.75)) < 1e-12);
}

TEST_CASE("coin model calibrates to unit scale and product masses") {
  const double p = 0.3;
  auto cm = calibrate(coin(p));
  REQUIRE(std::abs(cm.scale - 1.0) < 1e-12);
  REQUIRE(std::abs(cm.gibbs[cm.ws.index({0, 0})] - p * p) < 1e-12);
  REQUIRE(std::abs(cm.gibbs[cm.ws.index({0, 1})] - p * (1 - p)) < 1e-12);
  REQUIRE(std::abs(cm.gibbs[cm.ws.index({1, 1})] - (1 - p) * (1 - p)) < 1e-12);
}

TEST_CASE("asymptotic variance of an iid indicator is p(1-p)") {
  const double p = 0.3;
  auto cm = calibrate(coin(p));
  Eigen::VectorXd f(cm.dim());
  for (int i = 0; i < cm.dim(); ++i) f[i] = cm.ws.word(i)[0] == 0 ? 1.0 : 0.0;
  REQUIRE(std::abs(asymptotic_variance(cm, f) - p * (1 - p)) < 1e-13);
}

TEST_CASE("asymptotic variance of the golden mean indicator matches the chain") {
  // two-state chain: the centered indicator is the subleading eigenfunction,
  // so the autocovariances form an exact geometric series
  auto cm = calibrate(gm_const());
  Eigen::VectorXd f(cm.dim());
  for (int i = 0; i < cm.dim(); ++i) f[i] = cm.ws.word(i)[0] == 1 ? 1.0 : 0.0;
  const double g2 = kGolden * kGolden;
  const double expect = kGolden * kGolden * kGolden / std::pow(g2 + 1.0, 3);
  REQUIRE(std::abs(asymptotic_variance(cm, f) - expect) < 1e-12);
}

TEST_CASE("rank-2 toy splits into drift and a centered transverse part") {
  auto cm = calibrate(rank2_toy());
  REQUIRE(std::abs(cm.scale - std::log(2.0)) < 1e-12);
  REQUIRE(std::abs(cm.mean_tau - std::log(2.0)) < 1e-12);
  REQUIRE(std::abs(cm.drift[0] - 1.0) < 1e-12);
  REQUIRE(std::abs(cm.drift[1] - 0.5) < 1e-12);

  // frame: row 0 of K_frame is the roof, row 1 the centered transverse part
  REQUIRE((cm.K_frame.row(0).transpose() - cm.tau).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd khat2 = cm.K_frame.row(1);
  REQUIRE(std::abs(cm.gibbs.dot(khat2)) < 1e-13);
  const double half_log2 = 0.5 * std::log(2.0);
  for (int i = 0; i < cm.dim(); ++i) {
    const double expect = cm.ws.word(i)[0] == 0 ? -half_log2 : half_log2;
    REQUIRE(std::abs(khat2[i] - expect) < 1e-12);
  }

  // Gibbs mean of Khat vanishes row-wise
  REQUIRE((cm.Khat * cm.gibbs).cwiseAbs().maxCoeff() < 1e-13);
  // psi frame is an actual inverse pair
  REQUIRE((cm.frame.B * cm.frame.Binv - Eigen::MatrixXd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
  REQUIRE(std::abs(cm.frame.inner(cm.drift, cm.drift) - 1.0) < 1e-13);
}

TEST_CASE("cylinder masses are additive and consistent across lengths") {
  for (auto model : {gm_const(), coin(0.4)}) {
    auto cm = calibrate(model);
    const auto& sh = cm.ws.shift();
    for (const Word& w : {Word{0}, Word{0, 0}, Word{1, 0}, Word{0, 0, 1, 0}}) {
      double ext_nu = 0.0, ext_gibbs = 0.0;
      for (int a = 0; a < sh.symbols(); ++a) {
        Word wa = w;
        wa.push_back(a);
        if (!sh.admissible(wa)) continue;
        ext_nu += cm.nu_cylinder(wa);
        if (static_cast<int>(w.size()) >= cm.work_depth)
          ext_gibbs += cm.gibbs_cylinder(wa);
      }
      REQUIRE(std::abs(ext_nu - cm.nu_cylinder(w)) < 1e-13);
      if (static_cast<int>(w.size()) >= cm.work_depth)
        REQUIRE(std::abs(ext_gibbs - cm.gibbs_cylinder(w)) < 1e-13);
    }
    // all cylinders of length 4 partition the space
    double total = 0.0;
    for (const Word& w : sh.words(4)) total += cm.gibbs_cylinder(w);
    REQUIRE(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("birkhoff sums follow words and wrap cyclically") {
  auto cm = calibrate(rank2_toy());
  Cocycle cal{cm.work_depth, cm.K};
  Eigen::VectorXd s = birkhoff(cal, cm.ws, {0, 1, 1});
  // windows 01 and 11
  Eigen::VectorXd expect = cm.K.col(cm.ws.index({0, 1})) + cm.K.col(cm.ws.index({1, 1}));
  REQUIRE((s - expect).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd c = birkhoff_cyclic(cal, cm.ws, {0, 1});
  expect = cm.K.col(cm.ws.index({0, 1})) + cm.K.col(cm.ws.index({1, 0}));
  REQUIRE((c - expect).cwiseAbs().maxCoeff() < 1e-14);

  REQUIRE_THROWS_AS(birkhoff(cal, cm.ws, {0}), WordTooShort);
}

TEST_CASE("cyclically inadmissible words are rejected") {
  auto gm = gm_const();
  auto cm = calibrate(gm);
  Cocycle cal{cm.work_depth, cm.K};
  REQUIRE_THROWS_AS(birkhoff_cyclic(cal, cm.ws, {0, 1, 1}), OutsideDomain);
  // (1) read cyclically needs the 11 window, also inadmissible
  REQUIRE_THROWS_AS(birkhoff_cyclic(cal, cm.ws, {1}), OutsideDomain);
}

TEST_CASE("observable promotion reads through the prefix") {
  WordSpace deep(golden_mean(), 2);
  Observable f{0, Eigen::VectorXd(2)};
  f.values << 2.0, -1.0;
  auto vals = promote(f, deep);
  for (int i = 0; i < deep.dim(); ++i)
    REQUIRE(vals[i] == (deep.word(i)[0] == 0 ? 2.0 : -1.0));
  Observable bad{3, Eigen::VectorXd::Zero(5)};
  REQUIRE_THROWS_AS(promote(bad, deep), DepthMismatch);
}

TEST_CASE("nonpositive roofs are refused") {
  Cocycle K{0, Eigen::MatrixXd(1, 2)};
  K.values << 1.0, 0.0;
  AbelianGroup g;
  Model bad("bad", Shift::full(2), 0, K, g, {g.identity(), g.identity()},
            Eigen::VectorXd::Ones(1));
  REQUIRE_THROWS_AS(calibrate(bad), NonPositiveRoof);
}
