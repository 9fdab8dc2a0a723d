#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lomix/cocycle.hpp"
#include "lomix/holonomy.hpp"

namespace lomix {

// Raw description of a twisted suspension model: mixing base shift, a vector
// cocycle generator at some data depth, a holonomy mark per basis word, and
// the positive functional psi0 singling out the flow direction.
struct Model {
  std::string name;
  WordSpace basis;  // admissible (depth+1)-words of the base shift
  Cocycle raw;      // rank x basis.dim(), unscaled
  AbelianGroup group;
  std::vector<AbelianGroup::Elem> theta;  // one mark per basis word
  Eigen::VectorXd psi0;

  Model(std::string name_, Shift shift, int depth, Cocycle raw_, AbelianGroup group_,
        std::vector<AbelianGroup::Elem> theta_, Eigen::VectorXd psi0_)
      : name(std::move(name_)),
        basis(std::move(shift), depth),
        raw(std::move(raw_)),
        group(std::move(group_)),
        theta(std::move(theta_)),
        psi0(std::move(psi0_)) {
    basis.shift().mixing_exponent();  // throws NotMixing otherwise
    check_cocycle(raw, basis);
    if (psi0.size() != raw.rank())
      throw DimensionMismatch("psi0 arity does not match the cocycle rank");
    if (theta.size() != static_cast<std::size_t>(basis.dim()))
      throw DimensionMismatch("need one holonomy mark per basis word");
    for (const auto& e : theta) group.check(e);
  }

  int depth() const { return basis.depth(); }
  int rank() const { return raw.rank(); }
};

// Holonomy accumulated along a word, one factor per window. The group is
// abelian so the factor order never matters.
inline AbelianGroup::Elem holonomy_along(const Model& m, const Word& w) {
  if (static_cast<int>(w.size()) < m.depth() + 1)
    throw WordTooShort("need at least depth+1 symbols");
  if (!m.basis.shift().admissible(w)) throw OutsideDomain("word is not admissible");
  auto acc = m.group.identity();
  for (std::size_t j = 0; j + m.depth() < w.size(); ++j)
    acc = m.group.compose(
        acc, m.theta[m.basis.index(Word(w.begin() + j, w.begin() + j + m.depth() + 1))]);
  return acc;
}

inline AbelianGroup::Elem holonomy_cyclic(const Model& m, const Word& w) {
  if (w.empty()) throw WordTooShort("empty cycle");
  Word u = w;
  while (u.size() < w.size() + static_cast<std::size_t>(m.depth()))
    u.push_back(w[u.size() % w.size()]);
  if (!m.basis.shift().admissible(u))
    throw OutsideDomain("word is not cyclically admissible");
  auto acc = m.group.identity();
  for (std::size_t j = 0; j < w.size(); ++j)
    acc = m.group.compose(
        acc, m.theta[m.basis.index(Word(u.begin() + j, u.begin() + j + m.depth() + 1))]);
  return acc;
}

}  // namespace lomix
