#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <vector>

#include "common.hpp"

namespace cma::num {

double log_gamma(double x);
double digamma(double x);
// lnΓ(x+a) − lnΓ(x), without forming either term.
double log_gamma_ratio(double x, double a);
// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);  // 1 − P(a, x) without cancellation

cplx expm1(cplx z);
cplx log1p(cplx z);

template <class T>
struct Quad {
  T value{};
  double error = 0.0;
  double l1 = 0.0;
};

// Adaptive Gauss-Kronrod (21 point) on [a, b]; b may be +inf. A positive abs_tol stops
// refinement once the error estimate is below it, so integrands at rounding level terminate.
template <class F>
auto integrate(F f, double a, double b, double rel_tol = 1e-13, unsigned depth = 18,
               double abs_tol = 0) {
  using R = decltype(f(a));
  Quad<R> q;
  if (!(b > a)) return q;
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  auto run = [&](auto g, double lo, double hi) {
    double tol = rel_tol;
    if (abs_tol > 0) {
      q.value = GK::integrate(g, lo, hi, 0, rel_tol, &q.error, &q.l1);
      if (q.error <= abs_tol) return;
      if (q.l1 > 0) tol = std::max(rel_tol, abs_tol / q.l1);
    }
    q.value = GK::integrate(g, lo, hi, depth, tol, &q.error, &q.l1);
  };
  if (std::isinf(b)) {
    run(f, a, b);
    return q;
  }
  // Boost's error estimate does not scale with short intervals; integrate over [0, 1].
  const double h = b - a;
  run([&](double u) { return f(a + h * u) * h; }, 0.0, 1.0);
  return q;
}

// Double-exponential rule for integrands with algebraic endpoint behavior on finite [a, b].
template <class F>
Quad<double> integrate_endpoint(F f, double a, double b, double rel_tol = 1e-13) {
  Quad<double> q;
  if (!(b > a)) return q;
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  size_t levels = 0;
  q.value = rule.integrate(f, a, b, rel_tol, &q.error, &q.l1, &levels);
  return q;
}

// Sum of adaptive integrals over consecutive breakpoints.
template <class F>
auto integrate_pieces(F f, const std::vector<double>& breaks, double rel_tol = 1e-13,
                      double abs_tol = 0) {
  using R = decltype(f(breaks.front()));
  Quad<R> total;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto q = integrate(f, breaks[i], breaks[i + 1], rel_tol, 18, abs_tol);
    total.value += q.value;
    total.error += q.error;
    total.l1 += q.l1;
  }
  return total;
}

// Fixed-order Gauss-Legendre on `panels` equal panels of [a, b].
template <unsigned N, class F>
auto gauss_panels(F f, double a, double b, int panels) {
  using R = decltype(f(a));
  R sum{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    sum += boost::math::quadrature::gauss<double, N>::integrate(f, lo, lo + h);
  }
  return sum;
}

struct LinearFit {
  double slope = kNaN;
  double intercept = kNaN;
  double r2 = kNaN;
  int points = 0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Brent minimization of f on [a, b].
struct Minimum {
  double x;
  double value;
};
template <class F>
Minimum minimize(F f, double a, double b) {
  auto r = boost::math::tools::brent_find_minima(f, a, b, 52);
  return {r.first, r.second};
}

inline std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) v[i] = std::exp(a + (b - a) * i / (count - 1));
  return v;
}

}  // namespace cma::num
