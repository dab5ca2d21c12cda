#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "measure.hpp"

namespace cma {

enum ClassTag : unsigned { kBM = 1u, kB1 = 2u, kB2 = 4u, kB3 = 8u, kB4 = 16u };

std::string tags_to_string(unsigned tags);

// g(z) = (Σ_k a_k (t / (t + z/power))^k)^power: a polynomial in a resolvent.
struct ResolventForm {
  double t = 1;
  std::vector<double> a;
  unsigned power = 1;
};

// A bounded completely monotone function g = Lν. Moments are kept up to order 6
// (orders 5 and 6 only feed the small-argument cumulant series; NaN = unknown).
class CMFunction {
 public:
  virtual ~CMFunction() = default;

  const std::string& name() const { return name_; }

  // g(z) for z ≥ 0; closed forms also continue analytically to |z| < analytic_radius().
  virtual double eval(double z) const;
  virtual cplx eval(cplx z) const;
  cplx eval_imag(double s) const { return eval(cplx(0.0, s)); }

  // g(z) − 1 without cancellation near 0.
  virtual double gm1(double z) const;
  virtual cplx gm1(cplx z) const;
  // log g(u) + u; the quantity whose smallness drives every rate.
  virtual cplx log_g_plus_z(cplx u) const;
  double log_g_plus_z(double u) const { return log_g_plus_z(cplx(u)).real(); }

  // g(z) − e^{-z}.
  double excess(double z) const;
  cplx excess(cplx z) const;

  // g^{(k)}(z), k = 0..4, z > 0.
  virtual double deriv(double z, int k) const;

  double moment(int k) const;
  double deriv0(int k) const;  // g^{(k)}(0) = (−1)^k m_k
  unsigned tags() const { return tags_; }
  bool has(ClassTag t) const { return (tags_ & t) != 0; }
  int lk_exponent() const { return lk_; }  // 0 = none known
  const PositiveMeasure* measure() const { return measure_ ? &*measure_ : nullptr; }
  double mass_at_infinity() const { return at_inf_; }
  double analytic_radius() const { return radius_; }
  virtual std::optional<ResolventForm> resolvent_form() const { return std::nullopt; }

 protected:
  CMFunction() = default;
  // Derives tags and the cumulant series from moments; call at the end of construction.
  void finalize();
  cplx cumulant_series(cplx u) const;
  bool cumulant_ok(cplx u) const;

  std::string name_;
  std::array<double, 7> m_{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  std::optional<PositiveMeasure> measure_;
  unsigned tags_ = 0;
  int lk_ = 0;
  double at_inf_ = 0;
  double radius_ = 0;

 private:
  std::array<double, 7> kappa_{};
  int cum_order_ = 0;
  double cum_scale_ = 1;
};

using CMPtr = std::shared_ptr<const CMFunction>;

CMPtr make_exp();
CMPtr make_euler();
CMPtr make_spline();
CMPtr make_kendall(double t);
CMPtr make_yosida(double t);
CMPtr make_hille();
CMPtr make_chung(std::vector<double> a);
CMPtr make_frac_tail(double gamma);
CMPtr make_from_measure(PositiveMeasure nu, std::string name = "measure");
// γ when g is a fractional-tail function.
std::optional<double> frac_tail_gamma(const CMFunction& g);

// g_n(z) = g(z/n)^n.
CMPtr power_scale(const CMPtr& g, unsigned n);

bool check_b1(const CMFunction& g, double tol = 1e-12);
bool check_bk(const CMFunction& g, int k, double tol = 1e-12);

// t ↦ g_t.
class ScaledFamily {
 public:
  virtual ~ScaledFamily() = default;
  virtual CMPtr at(double t) const = 0;
  virtual bool valid(double t) const { return t > 0; }
  const std::string& name() const { return name_; }

 protected:
  std::string name_;
};

using FamilyPtr = std::shared_ptr<const ScaledFamily>;

FamilyPtr constant_family(CMPtr g);
FamilyPtr kendall_family();
FamilyPtr yosida_family();

// "euler", "spline", "hille", "exp", "kendall:t=0.5", "yosida:t=1",
// "chung:a=0.25,0.5,0.25", "frac_tail:gamma=0.5", "measure:<file>".
CMPtr parse_function(const std::string& spec);
// As above; bare "kendall" and "yosida" give the t-indexed families.
FamilyPtr parse_family(const std::string& spec);
std::vector<std::string> function_names();

}  // namespace cma
