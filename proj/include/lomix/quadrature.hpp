#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "lomix/common.hpp"

namespace lomix {

namespace detail {

// Gauss-Kronrod 15/7 pair on [-1,1], positive half of the node set.
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr std::array<double, 8> kGk15Weights = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
// Gauss-7 weights, attached to the odd-index Kronrod nodes.
inline constexpr std::array<double, 4> kG7Weights = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class T>
double magnitude(const T& x) {
  return std::abs(x);
}

}  // namespace detail

// One Gauss-Kronrod panel. Returns the 15-point value and writes the
// difference against the embedded 7-point rule into err. The embedded
// Gauss nodes are the odd-index Kronrod nodes; index 7 is the center.
template <class F>
auto gk15_panel(F&& f, double a, double b, double* err)
    -> decltype(f(0.0)) {
  using T = decltype(f(0.0));
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T k{};
  T g{};
  for (int i = 0; i < 8; ++i) {
    const double u = detail::kGk15Nodes[i];
    T pair = f(c + h * u);
    if (i < 7) pair = pair + f(c - h * u);
    k = k + detail::kGk15Weights[i] * pair;
    if (i % 2 == 1) g = g + detail::kG7Weights[i / 2] * pair;
  }
  if (err) *err = detail::magnitude(k - g) * h;
  return k * h;
}

// Adaptive bisection driven by the Kronrod-Gauss discrepancy, always
// splitting the panel with the worst error estimate, until the summed
// estimates drop below max(abs_tol, rel_tol * |integral|). Throws
// QuadratureUnconverged when the panel budget runs out or the worst
// interval shrinks to machine resolution without converging.
template <class F>
auto gk15_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                   double abs_tol = 0.0, int max_panels = 40000)
    -> decltype(f(0.0)) {
  using T = decltype(f(0.0));
  struct Panel {
    double a, b, err;
    int depth;
    T value;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  // a non-finite estimate (singular node hit) must force a split, not
  // slip through the convergence comparison as "not greater"
  auto sane = [](double e) {
    return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  };
  double err0 = 0;
  const T first = gk15_panel(f, a, b, &err0);
  err0 = sane(err0);
  T estimate = first;
  double total_err = err0;
  std::vector<Panel> heap = {{a, b, err0, 0, first}};
  int used = 1;
  while (!std::isfinite(detail::magnitude(estimate)) ||
         total_err > std::max(abs_tol, rel_tol * detail::magnitude(estimate))) {
    std::pop_heap(heap.begin(), heap.end());
    const Panel p = heap.back();
    heap.pop_back();
    if (p.depth >= 60)
      throw QuadratureUnconverged("interval shrank to machine resolution");
    if (used + 2 > max_panels)
      throw QuadratureUnconverged("panel budget exhausted");
    const double m = 0.5 * (p.a + p.b);
    double e1 = 0, e2 = 0;
    const T v1 = gk15_panel(f, p.a, m, &e1);
    const T v2 = gk15_panel(f, m, p.b, &e2);
    e1 = sane(e1);
    e2 = sane(e2);
    estimate = estimate + (v1 + v2 - p.value);
    heap.push_back({p.a, m, e1, p.depth + 1, v1});
    std::push_heap(heap.begin(), heap.end());
    heap.push_back({m, p.b, e2, p.depth + 1, v2});
    std::push_heap(heap.begin(), heap.end());
    used += 2;
    total_err += e1 + e2 - p.err;
    if (!std::isfinite(total_err)) {
      total_err = 0;
      for (const Panel& q : heap) total_err += q.err;
    }
    if (!std::isfinite(detail::magnitude(estimate))) {
      estimate = T{};
      for (const Panel& q : heap) estimate = estimate + q.value;
    }
  }
  KahanSum<T> done;
  for (const Panel& q : heap) done.add(q.value);
  return done.value();
}

// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration on the
// three-term recurrence.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(
    int n) {
  if (n < 1) throw OutsideDomain("node count must be positive");
  std::vector<double> x(static_cast<std::size_t>(n)),
      w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[static_cast<std::size_t>(n - 1 - i)] = -t;
    w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

// Legendre values P_0..P_deg at the given points, row per degree.
inline std::vector<std::vector<double>> legendre_table(
    const std::vector<double>& pts, int deg) {
  std::vector<std::vector<double>> P(static_cast<std::size_t>(deg) + 1,
                                     std::vector<double>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double u = pts[j];
    P[0][j] = 1.0;
    if (deg >= 1) P[1][j] = u;
    for (int k = 2; k <= deg; ++k)
      P[static_cast<std::size_t>(k)][j] =
          ((2 * k - 1) * u * P[static_cast<std::size_t>(k - 1)][j] -
           (k - 1) * P[static_cast<std::size_t>(k - 2)][j]) /
          k;
  }
  return P;
}

// Oscillatory Legendre moments: M_k(w) = \int_{-1}^{1} P_k(u) e^{iwu} du
//                                      = 2 i^k j_k(w).
inline std::vector<std::complex<double>> legendre_moments(double omega,
                                                          int deg) {
  std::vector<std::complex<double>> M(static_cast<std::size_t>(deg) + 1);
  const double aw = std::abs(omega);
  const std::complex<double> i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int k = 0; k <= deg; ++k) {
    const double jk = std::sph_bessel(static_cast<unsigned>(k), aw);
    std::complex<double> m = 2.0 * i_pow[k % 4] * jk;
    if (omega < 0) m = std::conj(m);
    M[static_cast<std::size_t>(k)] = m;
  }
  return M;
}

// Filon-Legendre panel: \int_a^b f(x) e^{iwx} dx with f smooth and w
// arbitrary. Projects f onto Legendre polynomials on the panel and pairs
// the coefficients with exact oscillatory moments, so accuracy does not
// degrade as |w| grows.
template <class F>
std::complex<double> filon_panel(F&& f, double a, double b, double omega,
                                 int deg = 12) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const int n = deg + 2;
  const auto [x, w] = gauss_legendre(n);
  const auto P = legendre_table(x, deg);
  const auto M = legendre_moments(omega * h, deg);
  std::vector<std::complex<double>> fv(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) fv[j] = f(c + h * x[j]);
  std::complex<double> total{};
  for (int k = 0; k <= deg; ++k) {
    std::complex<double> ck{};
    for (std::size_t j = 0; j < x.size(); ++j)
      ck += w[j] * P[static_cast<std::size_t>(k)][j] * fv[j];
    ck *= 0.5 * (2 * k + 1);
    total += ck * M[static_cast<std::size_t>(k)];
  }
  return h * std::exp(std::complex<double>(0, omega * c)) * total;
}

// Tensor-product Filon panel over a rectangle:
//   \int_ax^bx \int_ay^by f(x,y) e^{i(w1 x + w2 y)} dy dx.
template <class F>
std::complex<double> filon_box(F&& f, double ax, double bx, double ay,
                               double by, double w1, double w2,
                               int deg = 12) {
  const double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
  const double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
  const int n = deg + 2;
  const auto [x, w] = gauss_legendre(n);
  const auto P = legendre_table(x, deg);
  const auto Mx = legendre_moments(w1 * hx, deg);
  const auto My = legendre_moments(w2 * hy, deg);
  // coefficient matrix c_{kl} via the tensor Gauss grid
  std::vector<std::vector<std::complex<double>>> fv(
      x.size(), std::vector<std::complex<double>>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      fv[i][j] = f(cx + hx * x[i], cy + hy * x[j]);
  std::complex<double> total{};
  for (int k = 0; k <= deg; ++k)
    for (int l = 0; l <= deg; ++l) {
      std::complex<double> ckl{};
      for (std::size_t i = 0; i < x.size(); ++i) {
        std::complex<double> row{};
        for (std::size_t j = 0; j < x.size(); ++j)
          row += w[j] * P[static_cast<std::size_t>(l)][j] * fv[i][j];
        ckl += w[i] * P[static_cast<std::size_t>(k)][i] * row;
      }
      ckl *= 0.25 * (2 * k + 1) * (2 * l + 1);
      total += ckl * Mx[static_cast<std::size_t>(k)] *
               My[static_cast<std::size_t>(l)];
    }
  return hx * hy *
         std::exp(std::complex<double>(0, w1 * cx + w2 * cy)) * total;
}

// Radial piece of a planar Fourier transform of a radially symmetric
// function supported on [0, R]:  \int_0^R fhat(r) J_0(r s) r dr.
// Constants of the transform convention are the caller's business.
template <class F>
double hankel_radial(F&& fhat, double R, double s, double rel_tol = 1e-11,
                     double abs_tol = 1e-300) {
  auto g = [&](double r) {
    return fhat(r) * std::cyl_bessel_j(0.0, r * std::abs(s)) * r;
  };
  return gk15_adaptive(g, 0.0, R, rel_tol, abs_tol);
}

}  // namespace lomix
