#include "numerics.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace cma {

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::invalid_argument: return "invalid-argument";
    case Status::out_of_range: return "out-of-range";
    case Status::divergent: return "divergent";
    case Status::requires_measure: return "requires-measure";
    case Status::requires_class: return "requires-class";
    case Status::unsupported: return "unsupported";
    case Status::limit_undefined: return "limit-undefined";
    case Status::numeric_failure: return "numeric-failure";
    case Status::io: return "io";
    case Status::parse: return "parse";
    case Status::internal: return "internal";
  }
  return "unknown";
}

namespace num {

double log_gamma(double x) {
  if (!(x > 0)) fail(Status::invalid_argument, "log_gamma: x must be positive");
  return boost::math::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0)) fail(Status::invalid_argument, "digamma: x must be positive");
  return boost::math::digamma(x);
}

double log_gamma_ratio(double x, double a) {
  if (!(x > 0) || !(x + a > 0)) fail(Status::invalid_argument, "log_gamma_ratio: bad arguments");
  if (a == 0) return 0.0;
  return -std::log(boost::math::tgamma_delta_ratio(x, a));
}

double gamma_p(double a, double x) {
  if (x <= 0) return 0.0;
  return boost::math::gamma_p(a, x);
}

double gamma_q(double a, double x) {
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(a, x);
}

cplx expm1(cplx z) {
  const double x = z.real(), y = z.imag();
  if (y == 0) return {std::expm1(x), 0.0};
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

cplx log1p(cplx z) {
  if (z.imag() == 0 && z.real() > -1) return {std::log1p(z.real()), 0.0};
  const double r = std::abs(z);
  if (r < 1e-4) {
    // Alternating series; five terms are below rounding at this radius.
    cplx term = z, sum = 0;
    for (int k = 1; k <= 5; ++k) {
      sum += term / double(k);
      term *= -z;
    }
    return sum;
  }
  if (r < 0.5) {
    // log|1+z|² = log1p(2x + |z|²) keeps the real part accurate.
    const double x = z.real(), y = z.imag();
    const double re = 0.5 * std::log1p(2.0 * x + x * x + y * y);
    return {re, std::atan2(y, 1.0 + x)};
  }
  return std::log(1.0 + z);
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  const size_t n = x.size();
  fit.points = int(n);
  if (n < 2) return fit;
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace num
}  // namespace cma
