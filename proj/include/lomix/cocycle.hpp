#pragma once

#include <Eigen/Dense>

#include "lomix/sft.hpp"

namespace lomix {

// Depth-d real observable: one value per admissible (d+1)-word.
struct Observable {
  int depth = 0;
  Eigen::VectorXd values;
};

// Value table of a shallower observable on a deeper basis. A function of the
// first d+1 symbols reads off any longer word through its prefix.
inline Eigen::VectorXd promote(const Observable& f, const WordSpace& target) {
  if (f.depth > target.depth())
    throw DepthMismatch("cannot promote onto a shallower basis");
  WordSpace src(target.shift(), f.depth);
  if (f.values.size() != src.dim())
    throw DimensionMismatch("observable table does not match its depth");
  Eigen::VectorXd out(target.dim());
  for (int i = 0; i < target.dim(); ++i) {
    const Word& w = target.word(i);
    out[i] = f.values[src.index(Word(w.begin(), w.begin() + f.depth + 1))];
  }
  return out;
}

// Vector cocycle generator at depth d: an R^rank value per (d+1)-word,
// stored as columns.
struct Cocycle {
  int depth = 0;
  Eigen::MatrixXd values;  // rank x dim(WordSpace(shift, depth))

  int rank() const { return static_cast<int>(values.rows()); }
};

inline void check_cocycle(const Cocycle& K, const WordSpace& ws) {
  if (K.depth != ws.depth()) throw DepthMismatch("cocycle depth does not match basis");
  if (K.values.cols() != ws.dim())
    throw DimensionMismatch("cocycle table does not match basis size");
}

// Forward partial sum along w: windows w[j..j+depth] for j = 0..|w|-1-depth.
inline Eigen::VectorXd birkhoff(const Cocycle& K, const WordSpace& ws, const Word& w) {
  check_cocycle(K, ws);
  if (static_cast<int>(w.size()) < K.depth + 1)
    throw WordTooShort("need at least depth+1 symbols");
  if (!ws.shift().admissible(w)) throw OutsideDomain("word is not admissible");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(K.rank());
  for (std::size_t j = 0; j + K.depth < w.size(); ++j)
    s += K.values.col(ws.index(Word(w.begin() + j, w.begin() + j + K.depth + 1)));
  return s;
}

// Cyclic sum: w read periodically, one window per symbol of w.
inline Eigen::VectorXd birkhoff_cyclic(const Cocycle& K, const WordSpace& ws,
                                       const Word& w) {
  check_cocycle(K, ws);
  if (w.empty()) throw WordTooShort("empty cycle");
  Word u = w;
  while (u.size() < w.size() + static_cast<std::size_t>(K.depth))
    u.push_back(w[(u.size()) % w.size()]);
  if (!ws.shift().admissible(u))
    throw OutsideDomain("word is not cyclically admissible");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(K.rank());
  for (std::size_t j = 0; j < w.size(); ++j)
    s += K.values.col(ws.index(Word(u.begin() + j, u.begin() + j + K.depth + 1)));
  return s;
}

}  // namespace lomix
