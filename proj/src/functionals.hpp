#pragma once

#include <functional>
#include <vector>

#include "cmfunction.hpp"

namespace cma {

// G (kind = g) or G₀ (kind = g0) for g with an explicit measure, evaluated exactly
// from the segment/atom integrals at every point.
class GDensity {
 public:
  enum class Kind { g, g0 };
  GDensity(CMPtr g, Kind kind);

  double operator()(double s) const;
  // Points where G may have a kink; sorted, starting at 0.
  const std::vector<double>& breaks() const { return breaks_; }
  bool unbounded_support() const { return unbounded_; }
  // ∫₀^∞ q(s) G(s) ds by adaptive quadrature over the breaks.
  double integrate(const std::function<double(double)>& weight) const;

 private:
  CMPtr g_;
  const PositiveMeasure* nu_;
  Kind kind_;
  std::vector<double> breaks_;
  bool unbounded_;
};

GDensity g_density(const CMPtr& g);
GDensity g0_density(const CMPtr& g);

// Δ_α(z) = (g(z) − e^{-z}) / z^α.
double delta(const CMFunction& g, double alpha, double z);

struct LValue {
  double L = kNaN;
  double delta1_norm = kNaN;  // ∫|1−τ| ν(dτ)
  bool exact = false;         // measure path; otherwise Fourier quadrature
};
LValue functional_L(const CMFunction& g);
// ∫|1−τ|ν(dτ) from boundary values of g via |x| = (2/π)∫(1−cos ωx)/ω² dω.
double delta1_norm_fourier(const CMFunction& g);

struct BoundValue {
  double value = kNaN;
  bool degenerate = false;
};
BoundValue L_upper_bound(const CMFunction& g);
BoundValue L_scaled_bound(const CMFunction& g, unsigned n);

// c_α by z-quadrature of Δ_{1+α}; throws Status::divergent outside 𝓑_{2,∞}.
double c_alpha_quadrature(const CMFunction& g, double alpha);
// c_α = ∫ G(s) s^{α−2} ds.
double c_alpha_density(const CMPtr& g, double alpha);
double euler_c_alpha_exact(unsigned n, double alpha);
bool c_alpha_finite(const CMFunction& g, double alpha);

double a_of(const CMFunction& g);
double b_of(const CMFunction& g);   // from derivatives at 0
double d0_of(const CMFunction& g);  // from derivatives at 0
double b_density(const CMPtr& g);
double d0_density(const CMPtr& g);
double d1_of(const CMFunction& g);  // c₀ − c₁ − b
double d1_density(const CMPtr& g);

// s_g(z) = (g(z) + g'(z)) / z and ∫₀^∞ s_g.
double s_g(const CMFunction& g, double z);
double s_g_integral(const CMFunction& g);

struct AsymptoticRow {
  unsigned n;
  double alpha;
  double c_alpha = kNaN;
  double scaled_residual = kNaN;  // n²|c_α[gₙ] − (g''(0)−1)/(2n)|
  bool divergent = false;
};
struct AsymptoticReport {
  std::vector<AsymptoticRow> rows;
  double constant = kNaN;  // max scaled residual over finite rows
  bool bounded = false;
};
AsymptoticReport asymptotic_c_check(const CMPtr& g, const std::vector<unsigned>& n_grid,
                                    const std::vector<double>& alphas);

struct PolynomialRateReport {
  double c1 = kNaN;  // sup g''(τ) τ^{1−γ}
  double c2 = kNaN;  // sup ∫₀^s τ²ν(dτ) / s^{1−γ}
  double c3 = kNaN;  // sup (1 + g'(1/n)) n^γ
  bool consistent = false;
};
PolynomialRateReport check_polynomial_rate(const CMPtr& g, double gamma,
                                           const std::vector<double>& tau_grid,
                                           const std::vector<double>& s_grid,
                                           const std::vector<unsigned>& n_grid);

}  // namespace cma
