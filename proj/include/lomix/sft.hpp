#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "lomix/common.hpp"

namespace lomix {

using Word = std::vector<int>;

// One-sided subshift of finite type over symbols 0..n-1. A sequence is
// admissible iff allowed(x_j, x_{j+1}) holds for every j.
class Shift {
 public:
  Shift(int n_symbols, std::vector<std::uint8_t> allowed)
      : n_(n_symbols), adj_(std::move(allowed)) {
    if (n_ < 1 || adj_.size() != static_cast<std::size_t>(n_) * n_)
      throw DimensionMismatch("transition table size does not match symbol count");
    for (auto f : adj_)
      if (f > 1) throw OutsideDomain("transition flags must be 0 or 1");
  }

  static Shift full(int n_symbols) {
    if (n_symbols < 1) throw OutsideDomain("need at least one symbol");
    return Shift(n_symbols, std::vector<std::uint8_t>(
                                static_cast<std::size_t>(n_symbols) * n_symbols, 1));
  }

  int symbols() const { return n_; }

  bool allowed(int a, int b) const {
    check_symbol(a);
    check_symbol(b);
    return adj_[static_cast<std::size_t>(a) * n_ + b] != 0;
  }

  bool admissible(const Word& w) const {
    for (int s : w) check_symbol(s);
    for (std::size_t j = 0; j + 1 < w.size(); ++j)
      if (!allowed(w[j], w[j + 1])) return false;
    return true;
  }

  // Least m >= 1 with every entry of T^m positive. A primitive 0/1 matrix
  // reaches positivity by (n-1)^2 + 1 (Wielandt), so exceeding that bound
  // proves the matrix is not primitive.
  int mixing_exponent() const {
    const int bound = (n_ - 1) * (n_ - 1) + 1;
    std::vector<std::uint8_t> p = adj_;
    for (int m = 1; m <= bound; ++m) {
      if (std::find(p.begin(), p.end(), std::uint8_t{0}) == p.end()) return m;
      p = bool_product(p, adj_);
    }
    throw NotMixing("transition matrix is not primitive");
  }

  bool mixing() const {
    try {
      mixing_exponent();
      return true;
    } catch (const NotMixing&) {
      return false;
    }
  }

  // Number of n-periodic sequences, i.e. the trace of T^n.
  std::uint64_t fixed_point_count(int n) const {
    if (n < 1) throw OutsideDomain("period must be positive");
    auto p = int_power(n);
    std::uint64_t tr = 0;
    for (int i = 0; i < n_; ++i) tr += p[static_cast<std::size_t>(i) * n_ + i];
    return tr;
  }

  // Number of admissible words of a given length; length 0 is the empty word.
  std::uint64_t word_count(int len) const {
    if (len < 0) throw OutsideDomain("negative word length");
    if (len == 0) return 1;
    if (len == 1) return static_cast<std::uint64_t>(n_);
    auto p = int_power(len - 1);
    std::uint64_t total = 0;
    for (auto e : p) total += e;
    return total;
  }

  // All admissible words of a given length, lexicographic.
  std::vector<Word> words(int len) const {
    if (len < 0) throw OutsideDomain("negative word length");
    std::vector<Word> out;
    Word cur;
    grow(cur, len, out);
    return out;
  }

 private:
  void check_symbol(int s) const {
    if (s < 0 || s >= n_) throw OutsideDomain("symbol out of range");
  }

  void grow(Word& cur, int len, std::vector<Word>& out) const {
    if (static_cast<int>(cur.size()) == len) {
      out.push_back(cur);
      return;
    }
    for (int s = 0; s < n_; ++s) {
      if (!cur.empty() && !adj_[static_cast<std::size_t>(cur.back()) * n_ + s]) continue;
      cur.push_back(s);
      grow(cur, len, out);
      cur.pop_back();
    }
  }

  std::vector<std::uint8_t> bool_product(const std::vector<std::uint8_t>& a,
                                         const std::vector<std::uint8_t>& b) const {
    std::vector<std::uint8_t> c(static_cast<std::size_t>(n_) * n_, 0);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        if (!a[static_cast<std::size_t>(i) * n_ + k]) continue;
        for (int j = 0; j < n_; ++j)
          if (b[static_cast<std::size_t>(k) * n_ + j])
            c[static_cast<std::size_t>(i) * n_ + j] = 1;
      }
    return c;
  }

  // T^p with exact 64-bit integer entries; callers keep p small enough
  // that entries stay far below 2^63.
  std::vector<std::uint64_t> int_power(int p) const {
    std::vector<std::uint64_t> r(adj_.begin(), adj_.end());
    for (int step = 1; step < p; ++step) {
      std::vector<std::uint64_t> c(static_cast<std::size_t>(n_) * n_, 0);
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < n_; ++k) {
          std::uint64_t aik = r[static_cast<std::size_t>(i) * n_ + k];
          if (!aik) continue;
          for (int j = 0; j < n_; ++j)
            c[static_cast<std::size_t>(i) * n_ + j] +=
                aik * adj_[static_cast<std::size_t>(k) * n_ + j];
        }
      r = std::move(c);
    }
    return r;
  }

  int n_;
  std::vector<std::uint8_t> adj_;
};

// Coordinate set for depth-limited data: the admissible words of length
// depth+1, in lexicographic order. A function of the first depth+1 symbols is
// a vector over this basis.
class WordSpace {
 public:
  WordSpace(Shift shift, int depth) : shift_(std::move(shift)), depth_(depth) {
    if (depth_ < 0) throw OutsideDomain("negative depth");
    words_ = shift_.words(depth_ + 1);
    for (int i = 0; i < dim(); ++i) index_[words_[i]] = i;
    pre_.resize(words_.size());
    for (int i = 0; i < dim(); ++i) {
      Word u(static_cast<std::size_t>(depth_) + 2);
      std::copy(words_[i].begin(), words_[i].end(), u.begin() + 1);
      for (int a = 0; a < shift_.symbols(); ++a) {
        u[0] = a;
        if (!shift_.admissible(u)) continue;
        pre_[i].push_back(index_.at(Word(u.begin(), u.end() - 1)));
      }
    }
  }

  const Shift& shift() const { return shift_; }
  int depth() const { return depth_; }
  int dim() const { return static_cast<int>(words_.size()); }
  const Word& word(int i) const { return words_[static_cast<std::size_t>(i)]; }

  int index(const Word& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) throw OutsideDomain("word is not in this basis");
    return it->second;
  }

  // Columns feeding row i under the pullback stencil: j is a preimage of i
  // iff word(j) = a . word(i)[0..depth-1] and the joined word is admissible.
  const std::vector<int>& preimages(int i) const {
    return pre_[static_cast<std::size_t>(i)];
  }

 private:
  Shift shift_;
  int depth_;
  std::vector<Word> words_;
  std::map<Word, int> index_;
  std::vector<std::vector<int>> pre_;
};

// beta0 ^ (first index where a and b disagree); 0 for equal finite words.
// When one word extends the other, disagreement is charged at the shorter length.
inline double word_metric(const Word& a, const Word& b, double beta0) {
  if (!(beta0 > 0.0 && beta0 < 1.0)) throw OutsideDomain("metric base must lie in (0,1)");
  const std::size_t m = std::min(a.size(), b.size());
  for (std::size_t j = 0; j < m; ++j)
    if (a[j] != b[j]) return std::pow(beta0, static_cast<double>(j));
  if (a.size() == b.size()) return 0.0;
  return std::pow(beta0, static_cast<double>(m));
}

// Cylinder membership: x begins with the defining word.
inline bool in_cylinder(const Word& cyl, const Word& x) {
  if (x.size() < cyl.size()) return false;
  return std::equal(cyl.begin(), cyl.end(), x.begin());
}

}  // namespace lomix
