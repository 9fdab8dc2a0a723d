#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "lomix/model.hpp"

namespace lomix {

// Real 2x2 matrix acting on the boundary line by fractional-linear maps.
// All routines below assume determinant 1; SchottkyPair enforces it.
struct Mobius {
  double a = 1, b = 0, c = 0, d = 1;

  double det() const { return a * d - b * c; }
  double tr() const { return a + d; }

  Mobius operator*(const Mobius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d};
  }
  Mobius inverse() const { return {d, -b, -c, a}; }
  // same boundary action, opposite sign cocycle
  Mobius negated() const { return {-a, -b, -c, -d}; }

  double operator()(double x) const { return (a * x + b) / (c * x + d); }
  double pole() const { return -d / c; }
};

namespace detail {

// 2 log of the dominant characteristic root of a matrix with trace t and
// determinant delta, both roots real. Safe for |t| beyond sqrt overflow.
inline double dominant_log_root(double t, double delta) {
  const double at = std::abs(t);
  if (at * at <= 4 * delta) throw NotLoxodromic("|trace| must exceed twice the root of det");
  if (at > 1e150) return 2 * std::log(at);  // the small root is below resolution
  return 2 * std::log(0.5 * (at + std::sqrt(at * at - 4 * delta)));
}

}  // namespace detail

// translation length on the hyperbolic plane: 2 log of the big eigenvalue
inline double translation_length(const Mobius& m) {
  return detail::dominant_log_root(m.tr(), m.det());
}

// minus log of the boundary derivative at xi; additive under composition
inline double log_expansion(const Mobius& m, double xi) {
  return 2 * std::log(std::abs(m.c * xi + m.d));
}

// sign bit of c xi + d: 0 positive, 1 negative; multiplicative companion of
// log_expansion (mod-2 additive under composition)
inline int expansion_sign(const Mobius& m, double xi) {
  return m.c * xi + m.d < 0 ? 1 : 0;
}

// determinant-1 matrix fixing `attract` and `repel` on the boundary, with
// derivative e^{-length} at the attractor: V diag(e^{L/2}, e^{-L/2}) V^{-1}
// for V = [attract repel; 1 1]
inline Mobius loxodromic_on_axis(double attract, double repel, double length) {
  if (attract == repel) throw OutsideDomain("fixed points must differ");
  if (length <= 0) throw OutsideDomain("translation length must be positive");
  const double e = std::exp(0.5 * length), s = 1 / (attract - repel);
  return {s * (attract * e - repel / e), s * attract * repel * (1 / e - e),
          s * (e - 1 / e), s * (attract / e - repel * e)};
}

struct Interval {
  double lo = 0, hi = 0;

  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo < x && x < hi; }
  bool meets(const Interval& o) const { return lo < o.hi && o.lo < hi; }
};

// One boundary factor of one semigroup generator. Everything outside the
// repelling interval must map strictly inside the attracting one.
struct FactorGen {
  Mobius g;
  Interval attract;
  Interval repel;
};

// Ping-pong semigroup in a product of two boundary actions. The coding is
// the full shift on the letters; the attracting intervals are the Markov
// cells of the inverse-branch expanding map.
class SchottkyPair {
 public:
  explicit SchottkyPair(std::vector<std::array<FactorGen, 2>> gens)
      : gens_(std::move(gens)) {
    validate();
  }

  int letters() const { return static_cast<int>(gens_.size()); }
  const Mobius& matrix(int letter, int factor) const {
    return gens_.at(letter).at(factor).g;
  }
  const Interval& cell(int letter, int factor) const {
    return gens_.at(letter).at(factor).attract;
  }

  // per-factor translation length of the word's matrix product
  Eigen::Vector2d length_vector(const Word& w) const {
    Eigen::Vector2d out;
    for (int f = 0; f < 2; ++f) {
      const Scaled p = product(w, f);
      out[f] = 2 * p.log_scale + detail::dominant_log_root(p.m.tr(), p.m.det());
    }
    return out;
  }

  // sign bits of the product's dominant eigenvalue per factor
  AbelianGroup::Elem sign_vector(const Word& w) const {
    AbelianGroup::Elem out(2);
    for (int f = 0; f < 2; ++f) out[f] = product(w, f).m.tr() < 0 ? 1 : 0;
    return out;
  }

  // Canonical boundary pair for the cylinder of u: the coding image of the
  // minimal-period extension of u, shifted by one letter. Exact for words
  // that wrap a full period; off by one contraction factor otherwise.
  std::array<double, 2> boundary_point(const Word& u) const {
    if (u.empty()) throw WordTooShort("cylinder word is empty");
    check_letters(u);
    std::size_t p = 1;
    while (p < u.size()) {
      bool periodic = true;
      for (std::size_t j = 0; j + p < u.size(); ++j)
        if (u[j] != u[j + p]) { periodic = false; break; }
      if (periodic) break;
      ++p;
    }
    Word tail(p);
    for (std::size_t i = 0; i < p; ++i) tail[i] = u[(i + 1) % p];
    std::array<double, 2> xi;
    for (int f = 0; f < 2; ++f) {
      double x = gens_[tail[0]][f].attract.mid();
      for (int round = 0; round < 3; ++round)
        for (std::size_t i = tail.size(); i-- > 0;) x = gens_[tail[i]][f].g(x);
      xi[f] = x;
    }
    return xi;
  }

  // log-derivative cocycle of one letter at a boundary pair, with sign bits
  std::pair<Eigen::Vector2d, AbelianGroup::Elem> letter_cocycle(
      int letter, const std::array<double, 2>& xi) const {
    check_letters({letter});
    Eigen::Vector2d vec;
    AbelianGroup::Elem sgn(2);
    for (int f = 0; f < 2; ++f) {
      const FactorGen& fg = gens_[letter][f];
      if (fg.repel.contains(xi[f]))
        throw OutsideDomain("boundary point lies inside the repelling interval");
      vec[f] = log_expansion(fg.g, xi[f]);
      sgn[f] = expansion_sign(fg.g, xi[f]);
    }
    return {vec, sgn};
  }

  // Depth-k model on the full shift: cocycle column and sign mark per
  // (k+1)-word, both read at the word's canonical boundary pair. sign_factors
  // keeps both bits (group (Z/2)^2) or only the first (Z/2).
  Model model(int depth, std::string name, int sign_factors = 2,
              Eigen::Vector2d psi0 = Eigen::Vector2d(0.5, 0.5)) const {
    if (sign_factors < 0 || sign_factors > 2)
      throw OutsideDomain("sign_factors must be 0, 1 or 2");
    WordSpace ws(Shift::full(letters()), depth);
    Eigen::MatrixXd K(2, ws.dim());
    std::vector<AbelianGroup::Elem> theta(ws.dim());
    for (int i = 0; i < ws.dim(); ++i) {
      const Word& u = ws.word(i);
      auto [vec, sgn] = letter_cocycle(u[0], boundary_point(u));
      K.col(i) = vec;
      theta[i] = AbelianGroup::Elem(sgn.begin(), sgn.begin() + sign_factors);
    }
    return Model(std::move(name), Shift::full(letters()), depth, Cocycle{depth, K},
                 AbelianGroup(std::vector<int>(sign_factors, 2)), std::move(theta),
                 psi0);
  }

 private:
  std::vector<std::array<FactorGen, 2>> gens_;

  struct Scaled {
    Mobius m;
    double log_scale = 0;  // true matrix = e^{log_scale} m
  };

  Scaled product(const Word& w, int factor) const {
    if (w.empty()) throw WordTooShort("empty word has no matrix product");
    check_letters(w);
    Scaled p{gens_[w[0]][factor].g, 0};
    for (std::size_t i = 1; i < w.size(); ++i) {
      p.m = p.m * gens_[w[i]][factor].g;
      const double big = std::max({std::abs(p.m.a), std::abs(p.m.b),
                                   std::abs(p.m.c), std::abs(p.m.d)});
      if (big > 1e100) {
        p.m = Mobius{p.m.a / big, p.m.b / big, p.m.c / big, p.m.d / big};
        p.log_scale += std::log(big);
      }
    }
    return p;
  }

  void check_letters(const Word& w) const {
    for (int s : w)
      if (s < 0 || s >= letters()) throw OutsideDomain("letter outside the alphabet");
  }

  void validate() const {
    if (gens_.empty()) throw OutsideDomain("need at least one generator");
    for (const auto& gen : gens_)
      for (const auto& fg : gen) {
        if (!(fg.attract.lo < fg.attract.hi) || !(fg.repel.lo < fg.repel.hi))
          throw OutsideDomain("intervals must have positive length");
        // det roundoff grows with the square of the entry scale
        const double big = std::max({std::abs(fg.g.a), std::abs(fg.g.b),
                                     std::abs(fg.g.c), std::abs(fg.g.d)});
        if (std::abs(fg.g.det() - 1) > 1e-9 + 1e-13 * big * big)
          throw OutsideDomain("generators must have determinant 1");
        translation_length(fg.g);  // throws NotLoxodromic otherwise
        if (fg.g.c == 0 || !fg.repel.contains(fg.g.pole()))
          throw OutsideDomain("the repelling interval must contain the pole");
        if (fg.attract.meets(fg.repel))
          throw OutsideDomain("attracting and repelling intervals overlap");
        // the complement of the repelling interval is one arc through
        // infinity; its image is the interval spanned by the endpoint images
        const double y1 = fg.g(fg.repel.lo), y2 = fg.g(fg.repel.hi);
        if (!fg.attract.contains(y1) || !fg.attract.contains(y2) ||
            !fg.attract.contains(fg.g.a / fg.g.c))
          throw OutsideDomain("generator fails its ping-pong contraction");
      }
    for (std::size_t i = 0; i < gens_.size(); ++i)
      for (std::size_t j = 0; j < gens_.size(); ++j)
        for (int f = 0; f < 2; ++f) {
          if (i < j && gens_[i][f].attract.meets(gens_[j][f].attract))
            throw OutsideDomain("attracting cells must be pairwise disjoint");
          if (gens_[i][f].repel.meets(gens_[j][f].attract))
            throw OutsideDomain("cells must avoid every repelling interval");
        }
  }
};

}  // namespace lomix
