#pragma once

#include <complex>
#include <numeric>
#include <vector>

#include "lomix/common.hpp"

namespace lomix {

// Finite abelian group presented as Z_{d1} x ... x Z_{dm}. Elements are
// residue vectors. The empty product (m = 0) is the trivial group.
struct AbelianGroup {
  using Elem = std::vector<int>;

  std::vector<int> orders;

  AbelianGroup() = default;
  explicit AbelianGroup(std::vector<int> ds) : orders(std::move(ds)) {
    for (int d : orders)
      if (d < 1) throw OutsideDomain("cyclic orders must be positive");
  }

  int arity() const { return static_cast<int>(orders.size()); }

  int size() const {
    int s = 1;
    for (int d : orders) s *= d;
    return s;
  }

  void check(const Elem& a) const {
    if (static_cast<int>(a.size()) != arity())
      throw DimensionMismatch("element arity does not match the group");
    for (int j = 0; j < arity(); ++j)
      if (a[j] < 0 || a[j] >= orders[j]) throw OutsideDomain("residue out of range");
  }

  Elem identity() const { return Elem(orders.size(), 0); }

  Elem compose(const Elem& a, const Elem& b) const {
    check(a);
    check(b);
    Elem c(orders.size());
    for (int j = 0; j < arity(); ++j) c[j] = (a[j] + b[j]) % orders[j];
    return c;
  }

  Elem inverse(const Elem& a) const {
    check(a);
    Elem c(orders.size());
    for (int j = 0; j < arity(); ++j) c[j] = (orders[j] - a[j]) % orders[j];
    return c;
  }

  Elem power(const Elem& a, long long n) const {
    check(a);
    Elem c(orders.size());
    for (int j = 0; j < arity(); ++j) {
      long long r = (static_cast<long long>(a[j]) * n) % orders[j];
      if (r < 0) r += orders[j];
      c[j] = static_cast<int>(r);
    }
    return c;
  }

  // Mixed-radix enumeration, first coordinate fastest.
  int flat_index(const Elem& a) const {
    check(a);
    int idx = 0, stride = 1;
    for (int j = 0; j < arity(); ++j) {
      idx += a[j] * stride;
      stride *= orders[j];
    }
    return idx;
  }

  Elem from_flat(int idx) const {
    if (idx < 0 || idx >= size()) throw OutsideDomain("flat index out of range");
    Elem a(orders.size());
    for (int j = 0; j < arity(); ++j) {
      a[j] = idx % orders[j];
      idx /= orders[j];
    }
    return a;
  }
};

// Character chi(a) = exp(2 pi i sum_j c_j a_j / d_j). Values that are exact
// machine numbers (phases 0, pi, pi/2) are returned exactly so that sign
// characters multiply without rounding dirt.
class Character {
 public:
  Character(const AbelianGroup& g, std::vector<int> coeffs)
      : orders_(g.orders), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != orders_.size())
      throw DimensionMismatch("character coefficient arity mismatch");
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      coeffs_[j] %= orders_[j];
      if (coeffs_[j] < 0) coeffs_[j] += orders_[j];
    }
  }

  std::complex<double> operator()(const AbelianGroup::Elem& a) const {
    if (a.size() != orders_.size())
      throw DimensionMismatch("element arity does not match the character");
    long long q = 1;
    for (int d : orders_) q = std::lcm(q, static_cast<long long>(d));
    long long m = 0;
    for (std::size_t j = 0; j < orders_.size(); ++j) {
      m += static_cast<long long>(coeffs_[j]) * a[j] * (q / orders_[j]);
      m %= q;
    }
    const long long g = std::gcd(m, q);
    const long long den = q / (g == 0 ? q : g);
    const long long num = (g == 0) ? 0 : m / g;
    if (den == 1) return {1.0, 0.0};
    if (den == 2) return {-1.0, 0.0};
    if (den == 4) return num == 1 ? std::complex<double>{0.0, 1.0}
                                  : std::complex<double>{0.0, -1.0};
    const double phase = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(q);
    return {std::cos(phase), std::sin(phase)};
  }

  bool trivial() const {
    for (int c : coeffs_)
      if (c != 0) return false;
    return true;
  }

  Character conjugate() const {
    std::vector<int> c(coeffs_.size());
    for (std::size_t j = 0; j < coeffs_.size(); ++j)
      c[j] = (orders_[j] - coeffs_[j]) % orders_[j];
    Character out = *this;
    out.coeffs_ = std::move(c);
    return out;
  }

  const std::vector<int>& coeffs() const { return coeffs_; }

  friend bool operator==(const Character& x, const Character& y) {
    return x.orders_ == y.orders_ && x.coeffs_ == y.coeffs_;
  }

 private:
  std::vector<int> orders_;
  std::vector<int> coeffs_;
};

// All |G| characters, trivial one first, then mixed-radix coefficient order.
inline std::vector<Character> dual_group(const AbelianGroup& g) {
  std::vector<Character> out;
  out.reserve(g.size());
  for (int idx = 0; idx < g.size(); ++idx) out.emplace_back(g, g.from_flat(idx));
  return out;
}

}  // namespace lomix
