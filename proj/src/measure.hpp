#pragma once

#include <string>
#include <vector>

#include "common.hpp"

namespace cma {

// Ascending coefficients.
using Poly = std::vector<double>;

double poly_eval(const Poly& p, double x);
Poly poly_mul(const Poly& p, const Poly& q);
Poly poly_monomial(int k);

struct Atom {
  double s;
  double w;
};

// Density poly(s)·e^{-rate·s} on [a, b]; b may be +inf (then rate > 0).
struct PolyExpSegment {
  double a;
  double b;
  Poly poly;
  double rate;
};

// Density weight·(s + shift)^{-power} on [a, inf), power > 1.
struct PowerTailSegment {
  double a;
  double weight;
  double shift;
  double power;
};

// ∫_a^b q(s) e^{-κs} ds, κ real or complex; b may be +inf when Re κ > 0.
double poly_exp_integral(const Poly& q, double kappa, double a, double b);
cplx poly_exp_integral(const Poly& q, cplx kappa, double a, double b);

class PositiveMeasure {
 public:
  PositiveMeasure() = default;
  PositiveMeasure(std::vector<Atom> atoms, std::vector<PolyExpSegment> segments,
                  std::vector<PowerTailSegment> tails = {});

  // {"atoms": [[s, w], ...], "segments": [{"a", "b", "poly", "exp_rate"}, ...]}
  static PositiveMeasure from_json_text(const std::string& text);
  static PositiveMeasure from_file(const std::string& path);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<PolyExpSegment>& segments() const { return segments_; }
  const std::vector<PowerTailSegment>& tails() const { return tails_; }

  double mass() const { return moment(0); }
  // ∫ s^k ν(ds); +inf when the integral diverges.
  double moment(int k) const;

  // ∫ q(τ) ν(dτ) over [lo, hi]; atoms at lo (hi) count iff lo_closed (hi_closed).
  double kernel_integral(const Poly& q, double lo, double hi, bool lo_closed = true,
                         bool hi_closed = true) const;

  // ∫ s^k e^{-zs} ν(ds) for Re z ≥ 0.
  cplx laplace(cplx z, int k = 0) const;
  double laplace(double z, int k = 0) const;
  // ∫ (e^{-zs} − 1) ν(ds), accurate for small |z|.
  double laplace_m1(double z) const;
  cplx laplace_m1(cplx z) const;

  double atom_at_zero() const;
  // Points where the measure changes character, sorted, always containing 0 and 1.
  std::vector<double> breakpoints() const;
  bool has_tail_beyond(double s) const;

 private:
  void validate() const;

  std::vector<Atom> atoms_;
  std::vector<PolyExpSegment> segments_;
  std::vector<PowerTailSegment> tails_;
};

}  // namespace cma
