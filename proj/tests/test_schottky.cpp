#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "lomix/models.hpp"
#include "lomix/spectral.hpp"

using namespace lomix;

namespace {

// every word over {0,1} of length 1..max_len
std::vector<Word> all_words(int max_len) {
  std::vector<Word> out;
  for (int n = 1; n <= max_len; ++n)
    for (int code = 0; code < (1 << n); ++code) {
      Word w(n);
      for (int i = 0; i < n; ++i) w[i] = (code >> i) & 1;
      out.push_back(w);
    }
  return out;
}

double apply_growth(const Mobius& m, Eigen::Vector2d& v) {
  const Eigen::Vector2d next(m.a * v[0] + m.b * v[1], m.c * v[0] + m.d * v[1]);
  const double growth = next.norm() / v.norm();
  v = next / next.norm();
  return growth;
}

}  // namespace

TEST_CASE("mobius products act by composition") {
  const Mobius g = loxodromic_on_axis(0.2, 1.7, 3.0);
  const Mobius h = loxodromic_on_axis(-0.4, 0.9, 2.1);
  REQUIRE(std::abs(g.det() - 1.0) < 1e-12);
  REQUIRE(std::abs((g * h).det() - 1.0) < 1e-10);
  for (double x : {-2.0, -0.3, 0.1, 2.4}) {
    REQUIRE((g * h)(x) == Catch::Approx(g(h(x))).margin(1e-10));
    REQUIRE(g.inverse()(g(x)) == Catch::Approx(x).margin(1e-10));
    REQUIRE(g.negated()(x) == Catch::Approx(g(x)).margin(1e-12));
  }
}

TEST_CASE("axis builder pins fixed points, length and contraction") {
  const Mobius g = loxodromic_on_axis(0.0, 2.0, 24.0);
  REQUIRE(g(0.0) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(g(2.0) == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(translation_length(g) == Catch::Approx(24.0).margin(1e-10));
  // derivative at the attractor is e^{-L}: the expansion cocycle reads L
  REQUIRE(log_expansion(g, 0.0) == Catch::Approx(24.0).margin(1e-10));
  // diagonal matrix with eigenvalues e^{+-1} translates by exactly 2
  const Mobius diag{std::exp(1.0), 0.0, 0.0, std::exp(-1.0)};
  REQUIRE(translation_length(diag) == Catch::Approx(2.0).margin(1e-13));
}

TEST_CASE("non-loxodromic matrices are rejected") {
  const double t = 0.3;
  REQUIRE_THROWS_AS(
      translation_length(Mobius{std::cos(t), -std::sin(t), std::sin(t), std::cos(t)}),
      NotLoxodromic);
  REQUIRE_THROWS_AS(translation_length(Mobius{1, 1, 0, 1}), NotLoxodromic);
}

TEST_CASE("expansion cocycle is additive with multiplicative signs") {
  REQUIRE(log_expansion(Mobius{}, 0.37) == 0.0);
  REQUIRE(expansion_sign(Mobius{}, 0.37) == 0);
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> pt(-3.0, 3.0), len(0.8, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Mobius g = loxodromic_on_axis(pt(rng), pt(rng) + 7.0, len(rng));
    const Mobius h =
        (trial % 2 ? loxodromic_on_axis(pt(rng), pt(rng) - 7.0, len(rng)).negated()
                   : loxodromic_on_axis(pt(rng), pt(rng) - 7.0, len(rng)));
    const double xi = pt(rng);
    if (std::abs(h.c * xi + h.d) < 1e-2) continue;
    if (std::abs(g.c * h(xi) + g.d) < 1e-2) continue;
    REQUIRE(log_expansion(g * h, xi) ==
            Catch::Approx(log_expansion(g, h(xi)) + log_expansion(h, xi)).margin(1e-12));
    REQUIRE(expansion_sign(g * h, xi) ==
            (expansion_sign(g, h(xi)) ^ expansion_sign(h, xi)));
  }
}

TEST_CASE("ping-pong validation accepts the fixture and rejects damage") {
  REQUIRE_NOTHROW(r2a_pair());

  const FactorGen good{loxodromic_on_axis(0.0, 2.0, 24.0), {-0.1, 0.1}, {1.8, 2.2}};
  const FactorGen partner{loxodromic_on_axis(1.0, 0.4, 26.0), {0.9, 1.1}, {0.3, 0.5}};

  // repelling interval missing its pole
  FactorGen swapped = good;
  std::swap(swapped.attract, swapped.repel);
  REQUIRE_THROWS_AS(SchottkyPair({{swapped, swapped}, {partner, partner}}),
                    OutsideDomain);

  // contraction too weak to land inside the cell
  const FactorGen weak{loxodromic_on_axis(0.0, 2.0, 0.5), {-0.1, 0.1}, {1.8, 2.2}};
  REQUIRE_THROWS_AS(SchottkyPair({{weak, weak}, {partner, partner}}), OutsideDomain);

  // overlapping cells
  FactorGen wide = partner;
  wide.attract = {0.05, 1.1};
  REQUIRE_THROWS_AS(SchottkyPair({{good, good}, {wide, wide}}), OutsideDomain);

  // determinant off
  FactorGen scaled = good;
  scaled.g.a *= 1.1;
  scaled.g.b *= 1.1;
  REQUIRE_THROWS_AS(SchottkyPair({{scaled, scaled}, {partner, partner}}),
                    OutsideDomain);
}

TEST_CASE("letter lengths match the frozen design") {
  const SchottkyPair pair = r2a_pair();
  const Eigen::Vector2d l0 = pair.length_vector({0});
  const Eigen::Vector2d l1 = pair.length_vector({1});
  REQUIRE(l0[0] == Catch::Approx(23.0).margin(1e-9));
  REQUIRE(l0[1] == Catch::Approx(27.0).margin(1e-9));
  REQUIRE(l1[0] == Catch::Approx(35.0).margin(1e-9));
  REQUIRE(l1[1] == Catch::Approx(30.0).margin(1e-9));
}

TEST_CASE("length vectors are conjugation and inversion invariant") {
  const SchottkyPair pair = r2a_pair();
  const Word w = {0, 1, 1, 0, 1};
  Word rot(w.begin() + 2, w.end());
  rot.insert(rot.end(), w.begin(), w.begin() + 2);
  REQUIRE((pair.length_vector(w) - pair.length_vector(rot)).norm() < 1e-9);

  // product of inverses in reverse order has the same length per factor
  for (int f = 0; f < 2; ++f) {
    Mobius fwd = pair.matrix(w[0], f);
    for (std::size_t i = 1; i < w.size(); ++i) fwd = fwd * pair.matrix(w[i], f);
    Mobius bwd = pair.matrix(w.back(), f).inverse();
    for (std::size_t i = w.size() - 1; i-- > 0;)
      bwd = bwd * pair.matrix(w[i], f).inverse();
    REQUIRE(translation_length(bwd) ==
            Catch::Approx(translation_length(fwd)).epsilon(1e-10));
    REQUIRE(translation_length(fwd) ==
            Catch::Approx(pair.length_vector(w)[f]).epsilon(1e-10));
  }
}

TEST_CASE("power iteration confirms the dominant root") {
  const SchottkyPair pair = r2a_pair();
  const Word w = {0, 1, 1};
  for (int f = 0; f < 2; ++f) {
    Mobius prod = pair.matrix(w[0], f);
    for (std::size_t i = 1; i < w.size(); ++i) prod = prod * pair.matrix(w[i], f);
    Eigen::Vector2d v(0.37, 1.0);
    double growth = 0;
    for (int it = 0; it < 4; ++it) growth = apply_growth(prod, v);
    REQUIRE(2.0 * std::log(growth) ==
            Catch::Approx(pair.length_vector(w)[f]).epsilon(1e-9));
  }
}

TEST_CASE("cyclic cocycle sums reproduce translation lengths and signs") {
  const SchottkyPair pair = r2a_pair();
  const Model m = r2a();
  for (const Word& w : all_words(6)) {
    const Eigen::VectorXd sum = birkhoff_cyclic(m.raw, m.basis, w);
    const Eigen::Vector2d lam = pair.length_vector(w);
    REQUIRE((sum - lam).lpNorm<Eigen::Infinity>() < 1e-8);
    REQUIRE(holonomy_cyclic(m, w) == pair.sign_vector(w));
  }
  // words wrapping a full period evaluate at exact fixed points
  for (const Word& w : {Word{0}, Word{1}, Word{0, 1}}) {
    const Eigen::VectorXd sum = birkhoff_cyclic(m.raw, m.basis, w);
    REQUIRE((sum - pair.length_vector(w)).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("deeper truncation agrees exactly on short periodic words") {
  const SchottkyPair pair = r2a_pair();
  const Model m1 = pair.model(1, "d1");
  const Model m2 = pair.model(2, "d2");
  for (const Word& w : all_words(2)) {
    const Eigen::VectorXd s1 = birkhoff_cyclic(m1.raw, m1.basis, w);
    const Eigen::VectorXd s2 = birkhoff_cyclic(m2.raw, m2.basis, w);
    REQUIRE((s1 - s2).lpNorm<Eigen::Infinity>() < 1e-15);
    REQUIRE(holonomy_cyclic(m1, w) == holonomy_cyclic(m2, w));
  }
}

TEST_CASE("length directions span a genuinely two-dimensional cone") {
  const SchottkyPair pair = r2a_pair();
  double lo = 1e300, hi = -1e300;
  for (const Word& w : all_words(4)) {
    const Eigen::Vector2d lam = pair.length_vector(w);
    const double ratio = lam[1] / lam[0];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  REQUIRE(hi - lo > 0.1);
  // the calibrated drift direction lies strictly inside the cone
  const CalibratedModel cm = calibrate(r2a());
  const double drift_ratio = cm.drift[1] / cm.drift[0];
  REQUIRE(drift_ratio > lo + 1e-3);
  REQUIRE(drift_ratio < hi - 1e-3);
}

TEST_CASE("r2a calibrates to a healthy nonlattice rank-2 model") {
  const Model m = r2a();
  REQUIRE(m.rank() == 2);
  REQUIRE(m.group.orders == std::vector<int>{2, 2});

  // frozen sign table over the words 00, 01, 10, 11
  const std::vector<AbelianGroup::Elem> expected = {{1, 0}, {1, 0}, {1, 1}, {0, 1}};
  REQUIRE(m.theta == expected);

  const CalibratedModel cm = calibrate(m);
  REQUIRE(cm.scale > 0.02);
  REQUIRE(cm.scale < 0.04);
  REQUIRE(cm.mean_tau > 0.6);
  REQUIRE(cm.mean_tau < 0.8);

  const auto chars = dual_group(m.group);
  REQUIRE(chars.size() == 4);
  for (std::size_t i = 1; i < chars.size(); ++i) {
    // spectral radius, not the isolated lead: a sign twist can pair moduli
    const double mod = spectral_radius(cm, Eigen::VectorXd::Zero(2), chars[i]);
    REQUIRE(mod < 1.0 - 1e-6);
  }
  for (const auto& ch : chars) REQUIRE_NOTHROW(assert_nonlattice(cm, ch));

  // step covariance conditioning: both eigenvalues of the second cumulant
  // stay well away from zero, so no frequency ray mixes anomalously slowly
  const KappaJet jet = kappa_jet(cm, chars[0]);
  const Eigen::VectorXd mean = jet.D.imag();
  const Eigen::MatrixXd cum2 = -jet.D2.real() - mean * mean.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cum2);
  REQUIRE(es.eigenvalues()[0] > 3e-4);
  REQUIRE(es.eigenvalues()[1] / es.eigenvalues()[0] < 40.0);
}

TEST_CASE("r2a spectrum stays inside the circle across the transform window") {
  const CalibratedModel cm = calibrate(r2a());
  const auto chars = dual_group(cm.model.group);
  double worst = 0;
  for (double r = 0.75; r <= 32.0; r += 1.25)
    for (int k = 0; k < 24; ++k) {
      const double ang = 2.0 * kPi * k / 24;
      Eigen::VectorXd v(2);
      v << r * std::cos(ang), r * std::sin(ang);
      for (const auto& ch : chars)
        worst = std::max(worst, spectral_radius(cm, v, ch));
    }
  REQUIRE(worst < 1.0 - 1e-4);
}

TEST_CASE("equal factors collapse to a lattice model") {
  const FactorGen g0{loxodromic_on_axis(0.0, 2.0, 24.0), {-0.1, 0.1}, {1.8, 2.2}};
  const FactorGen g1{loxodromic_on_axis(1.0, 0.4, 26.0), {0.9, 1.1}, {0.3, 0.5}};
  const SchottkyPair pair({{g0, g0}, {g1, g1}});
  const CalibratedModel cm = calibrate(pair.model(1, "degenerate"));
  REQUIRE_THROWS_AS(assert_nonlattice(cm, Character(cm.model.group, {0, 0})),
                    LatticeModel);
}

TEST_CASE("r2a-z2 carries the first sign bit of r2a") {
  const Model full = r2a();
  const Model half = r2a_z2();
  REQUIRE(half.group.orders == std::vector<int>{2});
  REQUIRE(half.raw.values == full.raw.values);
  for (std::size_t i = 0; i < full.theta.size(); ++i)
    REQUIRE(half.theta[i][0] == full.theta[i][0]);

  const CalibratedModel cf = calibrate(full);
  const CalibratedModel ch = calibrate(half);
  const Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
  const auto k_half = kappa_lead(ch, v, Character(ch.model.group, {1}));
  const auto k_full = kappa_lead(cf, v, Character(cf.model.group, {1, 0}));
  REQUIRE(std::abs(k_half - k_full) < 1e-12);
}

TEST_CASE("constant-roof builtins calibrate to the expected scales") {
  const CalibratedModel f2 = calibrate(full2_const());
  REQUIRE(f2.scale == Catch::Approx(std::log(2.0)).margin(1e-12));
  REQUIRE(f2.mean_tau == Catch::Approx(std::log(2.0)).margin(1e-12));
  Eigen::VectorXd vstar(1);
  vstar << 2.0 * kPi / std::log(2.0);
  REQUIRE(lattice_defect(f2, vstar, Character(f2.model.group, {})) < 1e-10);
  REQUIRE_THROWS_AS(assert_nonlattice(f2, Character(f2.model.group, {})),
                    LatticeModel);

  const CalibratedModel gm = calibrate(gm_const());
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  REQUIRE(gm.scale == Catch::Approx(std::log(phi)).margin(1e-12));
}

TEST_CASE("builtin dispatch by name") {
  for (const std::string name : {"r2a", "r2a-z2", "full2-const", "gm-const"}) {
    const Model m = by_name(name);
    REQUIRE(m.name == name);
  }
  REQUIRE_THROWS_AS(by_name("nope"), OutsideDomain);
}

TEST_CASE("boundary points outside a letter's domain are rejected") {
  const SchottkyPair pair = r2a_pair();
  REQUIRE_THROWS_AS(pair.letter_cocycle(0, {2.0, 0.0}), OutsideDomain);
  REQUIRE_THROWS_AS(pair.letter_cocycle(1, {0.4, 1.0}), OutsideDomain);
}
