#include "functionals.hpp"

#include <algorithm>
#include <cmath>

#include "numerics.hpp"

namespace cma {

namespace {

constexpr double kQuadTol = 1e-13;

const PositiveMeasure& need_measure(const CMPtr& g) {
  if (!g->measure()) fail(Status::requires_measure, g->name() + ": needs an explicit measure");
  if (!g->has(kB1)) fail(Status::requires_class, g->name() + ": needs class B1");
  return *g->measure();
}

void need_class(const CMFunction& g, ClassTag tag, const char* what) {
  if (!g.has(tag)) fail(Status::requires_class, g.name() + ": " + what);
}

}  // namespace

// ---------------------------------------------------------------- G, G₀

GDensity::GDensity(CMPtr g, Kind kind) : g_(std::move(g)), kind_(kind) {
  nu_ = &need_measure(g_);
  breaks_ = nu_->breakpoints();
  unbounded_ = false;
  for (const auto& s : nu_->segments()) unbounded_ = unbounded_ || std::isinf(s.b);
  unbounded_ = unbounded_ || !nu_->tails().empty();
}

double GDensity::operator()(double s) const {
  if (s <= 0) return 0.0;
  if (kind_ == Kind::g) {
    if (s <= 1) return nu_->kernel_integral({s, -1.0}, 0.0, s);
    return nu_->kernel_integral({-s, 1.0}, s, kInf);
  }
  if (s <= 1) return nu_->kernel_integral({1.0, -1.0}, 0.0, s);
  return nu_->kernel_integral({-1.0, 1.0}, s, kInf);
}

double GDensity::integrate(const std::function<double(double)>& weight) const {
  auto f = [&](double s) { return weight(s) * (*this)(s); };
  std::vector<double> b = breaks_;
  double total = num::integrate_pieces(f, b, kQuadTol).value;
  if (unbounded_) {
    const double last = b.back();
    total += num::integrate(f, last, last + 1.0, kQuadTol).value;
    total += num::integrate(f, last + 1.0, kInf, kQuadTol).value;
  }
  return total;
}

GDensity g_density(const CMPtr& g) { return GDensity(g, GDensity::Kind::g); }
GDensity g0_density(const CMPtr& g) { return GDensity(g, GDensity::Kind::g0); }

// ---------------------------------------------------------------- Δ_α, L

double delta(const CMFunction& g, double alpha, double z) {
  if (alpha < 0 || alpha > 2) fail(Status::out_of_range, "delta: alpha must lie in [0, 2]");
  if (z < 0) fail(Status::out_of_range, "delta: z must be nonnegative");
  if (z == 0) {
    if (alpha == 2 && g.has(kB2)) return a_of(g);
    if (alpha == 0) return g.eval(0.0) - 1.0;
    fail(Status::limit_undefined, "delta: no limit at z = 0 for this alpha");
  }
  return g.excess(z) / std::pow(z, alpha);
}

double delta1_norm_fourier(const CMFunction& g) {
  need_class(g, kB1, "needs class B1");
  // (1 − Re[g(iω) e^{iω}]) / ω², with g(iω)e^{iω} = exp(log g(iω) + iω).
  auto f = [&](double w) {
    // Below 1e-30 the integrand is flat (𝓑₂) or O(ω^{γ−1}) with a negligible integral.
    w = std::max(w, 1e-30);
    const cplx e = g.log_g_plus_z(cplx(0.0, w));
    return -num::expm1(e).real() / (w * w);
  };
  const double top = 1e4;
  // Without 𝓑₂ the integrand blows up like a fractional power at 0.
  double v = num::integrate_endpoint(f, 0.0, 1e-2, 1e-9).value;
  v += num::integrate_pieces(f, {1e-2, 1.0, 10.0}, 1e-9).value;
  // Above ω = 10 the integrand is O(ω⁻²) and oscillates; shallow panels suffice.
  for (double w = 10; w < top; w *= 10) v += num::integrate(f, w, 10 * w, 1e-7, 6).value;
  // Tail ∫_top^∞ (1 − Re φ)/ω²: Re φ is replaced by its average over the last decade,
  // which keeps atoms sitting exactly at 1 (Re φ ≡ their weight) from being overcounted.
  double mean = 0;
  const int samples = 400;
  for (int i = 0; i < samples; ++i) {
    const double w = top * (0.1 + 0.9 * (i + 0.5) / samples);
    mean += std::exp(g.log_g_plus_z(cplx(0.0, w))).real();
  }
  mean /= samples;
  v += (1.0 - mean) / top;
  return 2.0 / M_PI * v;
}

LValue functional_L(const CMFunction& g) {
  LValue r;
  if (const PositiveMeasure* nu = g.measure()) {
    r.L = nu->kernel_integral({1.0, -1.0}, 0.0, 1.0);
    r.delta1_norm = r.L + nu->kernel_integral({-1.0, 1.0}, 1.0, kInf);
    r.exact = true;
    return r;
  }
  r.delta1_norm = delta1_norm_fourier(g);
  r.L = 0.5 * r.delta1_norm;
  return r;
}

BoundValue L_upper_bound(const CMFunction& g) {
  need_class(g, kB1, "needs class B1");
  BoundValue r;
  const double gamma = -g.gm1(1.0);
  if (!(gamma > 0)) {
    r.value = kInf;
    r.degenerate = true;
    return r;
  }
  // g + g' may behave like a fractional power at 0 (g ∉ 𝓑₂), hence the endpoint rule.
  const double beta = num::integrate_endpoint([&](double s) { return g.eval(s); }, 0.0, 1.0, 1e-10).value;
  const double slope = 1.0 + g.deriv(1.0, 1);
  double rad = slope * beta / (gamma * gamma) - 1.0;
  // The radicand is g̃''(0) − 1 ≥ 0 for an auxiliary g̃ ∈ 𝓑₂; clamp rounding.
  if (rad < 0) rad = 0;
  auto h = [&](double s) {
    s = std::max(s, 1e-15);
    return g.eval(s) + g.deriv(s, 1);
  };
  const double sum = num::integrate_endpoint(h, 0.0, 1.0, 1e-10).value;
  r.value = std::sqrt(rad) + 2.0 * M_E * sum;
  return r;
}

BoundValue L_scaled_bound(const CMFunction& g, unsigned n) {
  need_class(g, kB1, "needs class B1");
  if (n == 0) fail(Status::invalid_argument, "n must be positive");
  BoundValue r;
  const double d = g.deriv(1.0 / n, 1);
  if (d == 0) {
    r.value = kInf;
    r.degenerate = true;
    return r;
  }
  r.value = 2.0 * M_E * (1.0 + 1.0 / std::abs(d)) * std::sqrt(std::max(0.0, 1.0 + d));
  return r;
}

// ---------------------------------------------------------------- c_α

bool c_alpha_finite(const CMFunction& g, double alpha) {
  if (!g.has(kB2)) return false;
  // ∫₁^∞ g(s)/s ds < ∞ iff g vanishes at infinity (g is monotone); needed only at α = 0.
  return alpha > 0 || g.mass_at_infinity() == 0;
}

double c_alpha_quadrature(const CMFunction& g, double alpha) {
  if (alpha < 0 || alpha > 1) fail(Status::out_of_range, "c_alpha: alpha must lie in [0, 1]");
  need_class(g, kB2, "c_alpha needs class B2");
  if (!c_alpha_finite(g, alpha)) fail(Status::divergent, g.name() + ": c_0 diverges (g does not vanish at infinity)");
  // g''(0) = 1 forces ν = δ₁, i.e. g = e^{-z}.
  const double spread = g.moment(2) - 1;
  if (spread <= 0) return 0.0;
  const double w = g.mass_at_infinity();
  // Clamping keeps z^{1+α} normal; below 1e-100 the integrand is O(z^{1−α}).
  auto f = [&](double z) {
    z = std::max(z, 1e-100);
    return g.excess(z) / std::pow(z, 1.0 + alpha);
  };
  auto f_tail = [&](double z) { return (g.excess(z) - w) / std::pow(z, 1.0 + alpha); };
  // c_α is of order g''(0) − 1; errors far below that are rounding noise.
  const double floor = 1e-15 * spread;
  double v = num::integrate_endpoint(f, 0.0, 1e-3, kQuadTol).value;
  v += num::integrate_pieces(f, {1e-3, 1e-1, 1.0, 10.0, 100.0}, kQuadTol, floor).value;
  v += num::integrate(f_tail, 100.0, kInf, kQuadTol, 18, floor).value;
  if (w > 0) v += w * std::pow(100.0, -alpha) / alpha;
  return v / std::tgamma(2.0 - alpha);
}

double c_alpha_density(const CMPtr& g, double alpha) {
  if (alpha < 0 || alpha > 1) fail(Status::out_of_range, "c_alpha: alpha must lie in [0, 1]");
  need_class(*g, kB2, "c_alpha needs class B2");
  if (!c_alpha_finite(*g, alpha)) fail(Status::divergent, g->name() + ": c_0 diverges (atom at 0)");
  const GDensity G = g_density(g);
  const double w0 = g->measure()->atom_at_zero();
  double eps = 1.0;
  for (double b : G.breaks())
    if (b > 0) {
      eps = std::min(eps, b);
      break;
    }
  // Near 0, G(s) = w0·s + O(s²); the linear part integrates in closed form.
  auto near = [&](double s) {
    s = std::max(s, 1e-100);
    return (G(s) - w0 * s) * std::pow(s, alpha - 2.0);
  };
  double v = num::integrate_endpoint(near, 0.0, eps, 1e-12).value;
  if (w0 > 0) v += w0 * std::pow(eps, alpha) / alpha;
  auto far = [&](double s) { return s < eps ? 0.0 : std::pow(s, alpha - 2.0); };
  v += G.integrate(far);
  return v;
}

double euler_c_alpha_exact(unsigned n, double alpha) {
  if (n == 0) fail(Status::invalid_argument, "n must be positive");
  if (alpha < 0 || alpha > 1) fail(Status::out_of_range, "alpha must lie in [0, 1]");
  const double nn = n;
  if (alpha == 0) return std::log(nn) - num::digamma(nn);
  if (alpha == 1) return num::digamma(nn + 1) - std::log(nn);
  const double e = num::log_gamma_ratio(nn, alpha) - alpha * std::log(nn);
  return -std::expm1(e) / (alpha * (1.0 - alpha));
}

// ---------------------------------------------------------------- a, b, d₀, d₁

double a_of(const CMFunction& g) {
  need_class(g, kB2, "a needs class B2");
  return 0.5 * (g.moment(2) - 1.0);
}

double b_of(const CMFunction& g) {
  need_class(g, kB3, "b needs class B3");
  return (3.0 * g.moment(2) - g.moment(3) - 2.0) / 6.0;
}

double d0_of(const CMFunction& g) {
  need_class(g, kB4, "d0 needs class B4");
  return (-3.0 + 6.0 * g.moment(2) - 4.0 * g.moment(3) + g.moment(4)) / 12.0;
}

double b_density(const CMPtr& g) {
  need_class(*g, kB3, "b needs class B3");
  return g_density(g).integrate([](double s) { return 1.0 - s; });
}

double d0_density(const CMPtr& g) {
  need_class(*g, kB4, "d0 needs class B4");
  return g_density(g).integrate([](double s) { return (1.0 - s) * (1.0 - s); });
}

double d1_of(const CMFunction& g) {
  need_class(g, kB4, "d1 needs class B4");
  return c_alpha_quadrature(g, 0.0) - c_alpha_quadrature(g, 1.0) - b_of(g);
}

double d1_density(const CMPtr& g) {
  need_class(*g, kB4, "d1 needs class B4");
  if (!c_alpha_finite(*g, 0.0)) fail(Status::divergent, g->name() + ": d1 diverges (atom at 0)");
  const GDensity G = g_density(g);
  auto k = [](double s) { return (1.0 - s) * (1.0 - s) * (1.0 + s) / (s * s); };
  double eps = 1.0;
  for (double b : G.breaks())
    if (b > 0) {
      eps = std::min(eps, b);
      break;
    }
  double v = num::integrate_endpoint([&](double s) { return k(std::max(s, 1e-100)) * G(std::max(s, 1e-100)); },
                                     0.0, eps, 1e-12).value;
  v += G.integrate([&](double s) { return s < eps ? 0.0 : k(s); });
  return v;
}

// ---------------------------------------------------------------- s_g

double s_g(const CMFunction& g, double z) {
  need_class(g, kB1, "s_g needs class B1");
  if (z < 1e-4 && g.has(kB4)) {
    const double m2 = g.moment(2), m3 = g.moment(3), m4 = g.moment(4);
    return (m2 - 1.0) - (m3 - m2) * z / 2.0 + (m4 - m3) * z * z / 6.0;
  }
  return (g.eval(z) + g.deriv(z, 1)) / z;
}

double s_g_integral(const CMFunction& g) {
  need_class(g, kB2, "s_g integral needs class B2");
  if (g.mass_at_infinity() > 0) fail(Status::divergent, g.name() + ": s_g is not integrable");
  auto f = [&](double z) { return s_g(g, z); };
  return num::integrate_pieces(f, {0.0, 1e-3, 1e-1, 1.0, 10.0, 100.0}, kQuadTol).value +
         num::integrate(f, 100.0, kInf, kQuadTol).value;
}

// ---------------------------------------------------------------- reports

AsymptoticReport asymptotic_c_check(const CMPtr& g, const std::vector<unsigned>& n_grid,
                                    const std::vector<double>& alphas) {
  need_class(*g, kB2, "asymptotic check needs class B2");
  AsymptoticReport rep;
  rep.constant = 0;
  rep.bounded = true;
  const double a2 = g->moment(2) - 1.0;
  for (double alpha : alphas) {
    std::vector<double> ln, lr;
    for (unsigned n : n_grid) {
      AsymptoticRow row{n, alpha};
      const CMPtr gn = power_scale(g, n);
      if (!c_alpha_finite(*gn, alpha)) {
        row.divergent = true;
        rep.bounded = false;
        rep.rows.push_back(row);
        continue;
      }
      row.c_alpha = c_alpha_quadrature(*gn, alpha);
      row.scaled_residual = double(n) * n * std::abs(row.c_alpha - a2 / (2.0 * n));
      rep.constant = std::max(rep.constant, row.scaled_residual);
      if (row.scaled_residual > 0) {
        ln.push_back(std::log(double(n)));
        lr.push_back(std::log(row.scaled_residual));
      }
      rep.rows.push_back(row);
    }
    // Bounded means no power-law growth of the scaled residual along the grid.
    if (ln.size() >= 3 && num::least_squares(ln, lr).slope > 0.25) rep.bounded = false;
  }
  if (!std::isfinite(rep.constant)) rep.bounded = false;
  return rep;
}

PolynomialRateReport check_polynomial_rate(const CMPtr& g, double gamma,
                                           const std::vector<double>& tau_grid,
                                           const std::vector<double>& s_grid,
                                           const std::vector<unsigned>& n_grid) {
  const PositiveMeasure& nu = need_measure(g);
  if (!(gamma > 0 && gamma < 1)) fail(Status::out_of_range, "gamma must lie in (0, 1)");
  PolynomialRateReport r;
  r.c1 = r.c2 = r.c3 = 0;
  for (double tau : tau_grid) r.c1 = std::max(r.c1, g->deriv(tau, 2) * std::pow(tau, 1.0 - gamma));
  for (double s : s_grid)
    r.c2 = std::max(r.c2, nu.kernel_integral({0.0, 0.0, 1.0}, 0.0, s) / std::pow(s, 1.0 - gamma));
  for (unsigned n : n_grid)
    r.c3 = std::max(r.c3, (1.0 + g->deriv(1.0 / n, 1)) * std::pow(double(n), gamma));
  r.consistent = std::isfinite(r.c1) && std::isfinite(r.c2) && std::isfinite(r.c3);
  return r;
}

}  // namespace cma
