#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 5000;
  double omega_max_factor = 50.0;

  void validate() const;
};

struct QuadResult {
  double value = 0;
  double error = 0;
  int subdivisions = 0;
};

namespace detail {

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk_panel(F& f, double a, double b) {
  double err = 0, l1 = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &err, &l1);
  // the non-adaptive error estimate is reported on the reference interval [-1, 1]
  return {a, b, v, err * 0.5 * std::abs(b - a), l1};
}

boost::math::quadrature::ooura_fourier_cos<double>& ooura_cos(double rel_tol);
boost::math::quadrature::ooura_fourier_sin<double>& ooura_sin(double rel_tol);

}  // namespace detail

// Globally adaptive Gauss-Kronrod on [a, b]; `breaks` are extra panel edges
// (those outside (a, b) are ignored). Bisections beyond the initial panels are
// limited by qc.max_subdivisions.
template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadratureConfig& qc,
                     std::span<const double> breaks = {}) {
  QuadResult r;
  if (a == b) return r;
  std::vector<double> edges{a};
  for (double x : breaks)
    if (x > a && x < b) edges.push_back(x);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<detail::Panel> heap;
  double total = 0, err = 0, l1 = 0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto p = detail::gk_panel(f, edges[i], edges[i + 1]);
    total += p.value;
    err += p.error;
    l1 += p.l1;
    heap.push(p);
  }
  auto target = [&] {
    return std::max({qc.abs_tol, qc.rel_tol * std::abs(total),
                     64 * std::numeric_limits<double>::epsilon() * l1});
  };
  int splits = 0;
  while (err > target()) {
    if (splits >= qc.max_subdivisions)
      throw Error(ErrorCode::QuadratureFailure,
                  "tolerance not met after " + std::to_string(splits) + " subdivisions");
    auto p = heap.top();
    heap.pop();
    double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      // interval exhausted at machine resolution
      err -= p.error;
      continue;
    }
    auto lo = detail::gk_panel(f, p.a, mid);
    auto hi = detail::gk_panel(f, mid, p.b);
    total += lo.value + hi.value - p.value;
    err += lo.error + hi.error - p.error;
    l1 += lo.l1 + hi.l1 - p.l1;
    heap.push(lo);
    heap.push(hi);
    ++splits;
  }
  if (!std::isfinite(total)) throw Error(ErrorCode::QuadratureFailure, "non-finite integral");
  r.value = total;
  r.error = std::max(err, 0.0);
  r.subdivisions = splits;
  return r;
}

// ∫_a^∞ f via ω = a + s/(1 - s).
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, const QuadratureConfig& qc) {
  auto g = [&](double s) {
    double one = 1.0 - s;
    double w = a + s / one;
    return f(w) / (one * one);
  };
  static constexpr double kBreaks[] = {0.5, 0.9, 0.99};
  return integrate(g, 0.0, 1.0, qc, kBreaks);
}

// ∫_0^∞ f(u) cos(ω u) du and ∫_0^∞ f(u) sin(ω u) du for ω > 0.
template <class F>
QuadResult fourier_cos(F&& f, double omega, const QuadratureConfig& qc) {
  auto [v, rel] = detail::ooura_cos(qc.rel_tol).integrate(f, omega);
  QuadResult r{v, std::abs(v) * rel, 0};
  if (!std::isfinite(v) || r.error > std::max(qc.abs_tol, 10 * qc.rel_tol * std::abs(v)))
    throw Error(ErrorCode::QuadratureFailure, "Fourier cosine transform did not converge");
  return r;
}

template <class F>
QuadResult fourier_sin(F&& f, double omega, const QuadratureConfig& qc) {
  auto [v, rel] = detail::ooura_sin(qc.rel_tol).integrate(f, omega);
  QuadResult r{v, std::abs(v) * rel, 0};
  if (!std::isfinite(v) || r.error > std::max(qc.abs_tol, 10 * qc.rel_tol * std::abs(v)))
    throw Error(ErrorCode::QuadratureFailure, "Fourier sine transform did not converge");
  return r;
}

}  // namespace qbm
