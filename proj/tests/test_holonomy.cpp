#include <complex>

#include "catch_amalgamated.hpp"
#include "lomix/holonomy.hpp"

using namespace lomix;
using Elem = AbelianGroup::Elem;

TEST_CASE("two-torsion characters take exact sign values") {
  AbelianGroup g({2, 2});
  REQUIRE(g.size() == 4);
  auto chars = dual_group(g);
  REQUIRE(chars.size() == 4);
  REQUIRE(chars[0].trivial());

  for (const auto& chi : chars)
    for (int idx = 0; idx < g.size(); ++idx) {
      auto v = chi(g.from_flat(idx));
      // exactly +1 or -1, no rounding dirt
      REQUIRE((v == std::complex<double>{1.0, 0.0} ||
               v == std::complex<double>{-1.0, 0.0}));
    }

  // the three sign characters each vanish when summed over the group
  for (std::size_t c = 1; c < chars.size(); ++c) {
    std::complex<double> sum = 0;
    for (int idx = 0; idx < g.size(); ++idx) sum += chars[c](g.from_flat(idx));
    REQUIRE(sum == std::complex<double>{0.0, 0.0});
  }
}

TEST_CASE("characters are multiplicative") {
  AbelianGroup g({2, 3});
  auto chars = dual_group(g);
  REQUIRE(static_cast<int>(chars.size()) == 6);
  for (const auto& chi : chars)
    for (int i = 0; i < g.size(); ++i)
      for (int j = 0; j < g.size(); ++j) {
        auto a = g.from_flat(i), b = g.from_flat(j);
        auto lhs = chi(g.compose(a, b));
        auto rhs = chi(a) * chi(b);
        REQUIRE(std::abs(lhs - rhs) < 1e-15);
      }
}

TEST_CASE("dual group is orthogonal") {
  AbelianGroup g({3, 2});
  auto chars = dual_group(g);
  for (std::size_t c1 = 0; c1 < chars.size(); ++c1)
    for (std::size_t c2 = 0; c2 < chars.size(); ++c2) {
      std::complex<double> sum = 0;
      for (int idx = 0; idx < g.size(); ++idx) {
        auto a = g.from_flat(idx);
        sum += chars[c1](a) * std::conj(chars[c2](a));
      }
      const double expected = (c1 == c2) ? g.size() : 0.0;
      REQUIRE(std::abs(sum - expected) < 1e-13);
    }
}

TEST_CASE("conjugate character inverts every value") {
  AbelianGroup g({4});
  auto chars = dual_group(g);
  Elem a{3};
  for (const auto& chi : chars) {
    auto v = chi(a) * chi.conjugate()(a);
    REQUIRE(std::abs(v - std::complex<double>{1.0, 0.0}) < 1e-15);
  }
  // order-4 character hits the exact imaginary axis
  Character chi(g, {1});
  REQUIRE(chi(Elem{1}) == std::complex<double>{0.0, 1.0});
  REQUIRE(chi(Elem{3}) == std::complex<double>{0.0, -1.0});
  REQUIRE(chi(Elem{2}) == std::complex<double>{-1.0, 0.0});
}

TEST_CASE("group arithmetic wraps residues") {
  AbelianGroup g({2, 3});
  Elem a{1, 2}, b{1, 2};
  REQUIRE(g.compose(a, b) == Elem{0, 1});
  REQUIRE(g.inverse(a) == Elem{1, 1});
  REQUIRE(g.compose(a, g.inverse(a)) == g.identity());
  REQUIRE(g.power(a, 6) == g.identity());
  REQUIRE(g.power(a, -1) == g.inverse(a));
  for (int idx = 0; idx < g.size(); ++idx)
    REQUIRE(g.flat_index(g.from_flat(idx)) == idx);
}

TEST_CASE("trivial group has one empty element and one character") {
  AbelianGroup g;
  REQUIRE(g.size() == 1);
  auto chars = dual_group(g);
  REQUIRE(chars.size() == 1);
  REQUIRE(chars[0].trivial());
  REQUIRE(chars[0](Elem{}) == std::complex<double>{1.0, 0.0});
}

TEST_CASE("group validates elements and orders") {
  REQUIRE_THROWS_AS(AbelianGroup({2, 0}), OutsideDomain);
  AbelianGroup g({2, 2});
  REQUIRE_THROWS_AS(g.check(Elem{1}), DimensionMismatch);
  REQUIRE_THROWS_AS(g.check(Elem{1, 2}), OutsideDomain);
  REQUIRE_THROWS_AS(g.from_flat(4), OutsideDomain);
}
