#include "cmfunction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "numerics.hpp"
#include "params.hpp"

namespace cma {

std::string tags_to_string(unsigned tags) {
  std::string s;
  const char* names[] = {"BM", "B1", "B2", "B3", "B4"};
  for (int i = 0; i < 5; ++i)
    if (tags & (1u << i)) {
      if (!s.empty()) s += '|';
      s += names[i];
    }
  return s;
}

namespace {

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// j (j+1) ... (j+k-1)
double rising(double j, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r *= j + i;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- base class

void CMFunction::finalize() {
  for (int k = 0; k < 7; ++k)
    if (!std::isnan(m_[k]) && m_[k] < 0) fail(Status::internal, name_ + ": negative moment");
  tags_ = 0;
  if (std::isfinite(m_[0])) tags_ |= kBM;
  const double tol = 1e-12;
  if ((tags_ & kBM) && std::abs(m_[0] - 1) <= tol && std::isfinite(m_[1]) &&
      std::abs(m_[1] - 1) <= tol) {
    tags_ |= kB1;
    if (std::isfinite(m_[2])) {
      tags_ |= kB2;
      if (std::isfinite(m_[3])) {
        tags_ |= kB3;
        if (std::isfinite(m_[4])) tags_ |= kB4;
      }
    }
  }

  // Cumulants of ν (a probability measure when B1) for the series of log g(u) + u.
  cum_order_ = 0;
  if (!(tags_ & kB4)) return;
  int top = 4;
  if (std::isfinite(m_[5]) && std::isfinite(m_[6])) top = 6;
  const auto& m = m_;
  kappa_.fill(0);
  kappa_[1] = m[1];
  kappa_[2] = m[2] - m[1] * m[1];
  kappa_[3] = m[3] - 3 * m[2] * m[1] + 2 * std::pow(m[1], 3);
  kappa_[4] = m[4] - 4 * m[3] * m[1] - 3 * m[2] * m[2] + 12 * m[2] * m[1] * m[1] -
              6 * std::pow(m[1], 4);
  if (top == 6) {
    kappa_[5] = m[5] - 5 * m[4] * m[1] - 10 * m[3] * m[2] + 20 * m[3] * m[1] * m[1] +
                30 * m[2] * m[2] * m[1] - 60 * m[2] * std::pow(m[1], 3) + 24 * std::pow(m[1], 5);
    kappa_[6] = m[6] - 6 * m[5] * m[1] - 15 * m[4] * m[2] + 30 * m[4] * m[1] * m[1] -
                10 * m[3] * m[3] + 120 * m[3] * m[2] * m[1] - 120 * m[3] * std::pow(m[1], 3) +
                30 * std::pow(m[2], 3) - 270 * m[2] * m[2] * m[1] * m[1] +
                360 * m[2] * std::pow(m[1], 4) - 120 * std::pow(m[1], 6);
  }
  cum_order_ = top;
  cum_scale_ = 1;
  for (int k = 2; k <= top; ++k)
    cum_scale_ = std::max(cum_scale_, std::pow(std::abs(kappa_[k]) / factorial(k), 1.0 / k));
}

bool CMFunction::cumulant_ok(cplx u) const {
  if (cum_order_ == 0) return false;
  const double thr = cum_order_ == 6 ? 1e-3 : 1e-4;
  return std::abs(u) * cum_scale_ < thr;
}

cplx CMFunction::cumulant_series(cplx u) const {
  cplx sum = 0, p = -u;
  cplx pw = p;
  for (int k = 2; k <= cum_order_; ++k) {
    pw *= p;
    sum += kappa_[k] / factorial(k) * pw;
  }
  return sum;
}

double CMFunction::eval(double z) const {
  if (!measure_) fail(Status::unsupported, name_ + ": no evaluation rule");
  return measure_->laplace(z);
}

cplx CMFunction::eval(cplx z) const {
  if (!measure_) fail(Status::unsupported, name_ + ": no analytic continuation available");
  return measure_->laplace(z);
}

double CMFunction::gm1(double z) const {
  if (!measure_) return eval(z) - 1.0;
  return measure_->laplace_m1(z) + (m_[0] - 1.0);
}

cplx CMFunction::gm1(cplx z) const {
  if (!measure_) return eval(z) - 1.0;
  return measure_->laplace_m1(z) + (m_[0] - 1.0);
}

cplx CMFunction::log_g_plus_z(cplx u) const {
  if (cumulant_ok(u)) return cumulant_series(u);
  return num::log1p(gm1(u)) + u;
}

double CMFunction::excess(double z) const {
  if (z < 1e-4 && has(kB4)) {
    return 0.5 * (m_[2] - 1) * z * z - (m_[3] - 1) / 6 * z * z * z +
           (m_[4] - 1) / 24 * z * z * z * z;
  }
  const double e = log_g_plus_z(z);
  if (e > 1) return eval(z) - std::exp(-z);
  return std::exp(-z) * std::expm1(e);
}

cplx CMFunction::excess(cplx z) const {
  const cplx e = log_g_plus_z(z);
  if (e.real() > 1) return eval(z) - std::exp(-z);
  return std::exp(-z) * num::expm1(e);
}

double CMFunction::deriv(double z, int k) const {
  if (k < 0 || k > 4) fail(Status::invalid_argument, "derivative order must be 0..4");
  if (k == 0) return eval(z);
  if (!measure_) fail(Status::unsupported, name_ + ": derivatives need a measure");
  const double v = measure_->laplace(z, k);
  return (k % 2) ? -v : v;
}

double CMFunction::moment(int k) const {
  if (k < 0 || k > 6) fail(Status::invalid_argument, "moment order must be 0..6");
  return m_[k];
}

double CMFunction::deriv0(int k) const {
  const double m = moment(k);
  return (k % 2) ? -m : m;
}

// ---------------------------------------------------------------- built-ins

namespace {

class MeasureFunction final : public CMFunction {
 public:
  MeasureFunction(PositiveMeasure nu, std::string name) {
    name_ = std::move(name);
    for (int k = 0; k < 7; ++k) m_[k] = nu.moment(k);
    at_inf_ = nu.atom_at_zero();
    radius_ = kInf;
    bool density_at_zero = false;
    for (const auto& s : nu.segments()) {
      if (std::isinf(s.b)) radius_ = std::min(radius_, s.rate);
      if (s.a == 0 && !s.poly.empty() && s.poly[0] != 0) density_at_zero = true;
    }
    for (const auto& t : nu.tails()) {
      radius_ = 0;
      if (t.a == 0) density_at_zero = true;
    }
    if (at_inf_ > 0)
      lk_ = 0;
    else
      lk_ = density_at_zero ? 2 : 1;
    measure_ = std::move(nu);
    finalize();
  }
};

class ExpFunction final : public CMFunction {
 public:
  ExpFunction() {
    name_ = "exp";
    m_.fill(1.0);
    measure_ = PositiveMeasure({{1.0, 1.0}}, {});
    lk_ = 1;
    radius_ = kInf;
    finalize();
  }
  double eval(double z) const override { return std::exp(-z); }
  cplx eval(cplx z) const override { return std::exp(-z); }
  double gm1(double z) const override { return std::expm1(-z); }
  cplx gm1(cplx z) const override { return num::expm1(-z); }
  cplx log_g_plus_z(cplx) const override { return 0.0; }
  double deriv(double z, int k) const override {
    if (k < 0 || k > 4) fail(Status::invalid_argument, "derivative order must be 0..4");
    return (k % 2 ? -1.0 : 1.0) * std::exp(-z);
  }
};

class EulerFunction final : public CMFunction {
 public:
  EulerFunction() {
    name_ = "euler";
    for (int k = 0; k < 7; ++k) m_[k] = factorial(k);
    measure_ = PositiveMeasure({}, {{0.0, kInf, {1.0}, 1.0}});
    lk_ = 2;
    radius_ = 1;
    finalize();
  }
  double eval(double z) const override { return 1.0 / (1.0 + z); }
  cplx eval(cplx z) const override { return 1.0 / (1.0 + z); }
  double gm1(double z) const override { return -z / (1.0 + z); }
  cplx gm1(cplx z) const override { return -z / (1.0 + z); }
  cplx log_g_plus_z(cplx u) const override {
    if (std::abs(u) < 0.1) {
      // u − log(1+u) = Σ_{k≥2} (−1)^k u^k / k
      cplx sum = 0, p = u;
      for (int k = 2; k <= 18; ++k) {
        p *= u;
        sum += (k % 2 ? -p : p) / double(k);
      }
      return sum;
    }
    return u - num::log1p(u);
  }
  double deriv(double z, int k) const override {
    if (k < 0 || k > 4) fail(Status::invalid_argument, "derivative order must be 0..4");
    return (k % 2 ? -1.0 : 1.0) * factorial(k) / std::pow(1.0 + z, k + 1);
  }
  std::optional<ResolventForm> resolvent_form() const override { return ResolventForm{1.0, {0.0, 1.0}, 1}; }
};

class SplineFunction final : public CMFunction {
 public:
  SplineFunction() {
    name_ = "spline";
    for (int k = 0; k < 7; ++k) m_[k] = std::pow(2.0, k) / (k + 1);
    measure_ = PositiveMeasure({}, {{0.0, 2.0, {0.5}, 0.0}});
    lk_ = 2;
    radius_ = kInf;
    finalize();
  }
  template <class T>
  static T g(T z, bool minus_one) {
    if (std::abs(z) < 0.5) {
      // Σ_k (−2z)^k / (k+1)!
      T sum = minus_one ? T(0) : T(1), p = 1;
      double f = 1;
      for (int k = 1; k <= 24; ++k) {
        p *= -2.0 * z;
        f *= (k + 1);
        sum += p / f;
      }
      return sum;
    }
    T v;
    if constexpr (std::is_same_v<T, double>)
      v = -std::expm1(-2.0 * z) / (2.0 * z);
    else
      v = -num::expm1(-2.0 * z) / (2.0 * z);
    return minus_one ? v - 1.0 : v;
  }
  double eval(double z) const override { return g(z, false); }
  cplx eval(cplx z) const override { return g(z, false); }
  double gm1(double z) const override { return g(z, true); }
  cplx gm1(cplx z) const override { return g(z, true); }
  // log g(u) + u = log(sinh u / u)
  cplx log_g_plus_z(cplx u) const override {
    if (std::abs(u) < 1.0) {
      cplx sum = 0, p = 1, u2 = u * u;
      double f = 1;
      for (int k = 1; k <= 14; ++k) {
        p *= u2;
        f *= (2 * k) * (2 * k + 1);
        sum += p / f;
      }
      return num::log1p(sum);
    }
    return u + std::log(-num::expm1(-2.0 * u)) - std::log(2.0) - std::log(u);
  }
};

class KendallFunction final : public CMFunction {
 public:
  explicit KendallFunction(double t) : t_(t) {
    if (!(t > 0 && t <= 1)) fail(Status::out_of_range, "kendall: t must lie in (0, 1]");
    std::ostringstream os;
    os << "kendall:t=" << t;
    name_ = os.str();
    m_[0] = 1;
    for (int k = 1; k < 7; ++k) m_[k] = std::pow(t, 1 - k);
    std::vector<Atom> atoms;
    if (t < 1) atoms.push_back({0.0, 1.0 - t});
    atoms.push_back({1.0 / t, t});
    measure_ = PositiveMeasure(atoms, {});
    at_inf_ = 1 - t;
    lk_ = t == 1 ? 1 : 0;
    radius_ = kInf;
    finalize();
  }
  double eval(double z) const override { return 1 - t_ + t_ * std::exp(-z / t_); }
  cplx eval(cplx z) const override { return 1 - t_ + t_ * std::exp(-z / t_); }
  double gm1(double z) const override { return t_ * std::expm1(-z / t_); }
  cplx gm1(cplx z) const override { return t_ * num::expm1(-z / t_); }
  double deriv(double z, int k) const override {
    if (k < 0 || k > 4) fail(Status::invalid_argument, "derivative order must be 0..4");
    if (k == 0) return eval(z);
    return (k % 2 ? -1.0 : 1.0) * std::pow(t_, 1 - k) * std::exp(-z / t_);
  }

 private:
  double t_;
};

class HilleFunction final : public CMFunction {
 public:
  HilleFunction() {
    name_ = "hille";
    const double bell[7] = {1, 1, 2, 5, 15, 52, 203};
    for (int k = 0; k < 7; ++k) m_[k] = bell[k];
    std::vector<Atom> atoms;
    // Poisson(1) weights; beyond k = 30 they are below 1e-33.
    for (int k = 0; k <= 30; ++k) atoms.push_back({double(k), std::exp(-1.0) / factorial(k)});
    measure_ = PositiveMeasure(atoms, {});
    at_inf_ = std::exp(-1.0);
    lk_ = 0;
    radius_ = kInf;
    finalize();
  }
  double eval(double z) const override { return std::exp(std::expm1(-z)); }
  cplx eval(cplx z) const override { return std::exp(num::expm1(-z)); }
  double gm1(double z) const override { return std::expm1(std::expm1(-z)); }
  cplx gm1(cplx z) const override { return num::expm1(num::expm1(-z)); }
  cplx log_g_plus_z(cplx u) const override {
    if (std::abs(u) < 0.5) {
      cplx sum = 0, p = -u;
      double f = 1;
      for (int k = 2; k <= 24; ++k) {
        p *= -u;
        f *= k;
        sum += p / f;
      }
      return sum;
    }
    return u + num::expm1(-u);
  }
};

class YosidaFunction final : public CMFunction {
 public:
  explicit YosidaFunction(double t) : t_(t) {
    if (!(t > 0) || !std::isfinite(t)) fail(Status::out_of_range, "yosida: t must be positive");
    std::ostringstream os;
    os << "yosida:t=" << t;
    name_ = os.str();
    // exp(−tz/(t+z)) = e^{−t} Σ_k t^k/k! (t/(t+z))^k: Poisson mixture of Gamma(k, t) laws.
    const int kmax = int(std::ceil(t + 40 + 12 * std::sqrt(t)));
    std::vector<double> pois(kmax + 1);
    for (int k = 0; k <= kmax; ++k)
      pois[k] = std::exp(-t + k * std::log(t) - num::log_gamma(k + 1.0));
    for (int j = 0; j < 7; ++j) {
      double s = 0;
      for (int k = 1; k <= kmax; ++k) s += pois[k] * rising(k, j);
      m_[j] = (j == 0 ? s + pois[0] : s) / std::pow(t, j);
    }
    m_[0] = 1;
    m_[1] = 1;
    Poly dens(kmax);
    for (int k = 1; k <= kmax; ++k)
      dens[k - 1] = std::exp(-t + 2 * k * std::log(t) - num::log_gamma(k + 1.0) -
                             num::log_gamma(double(k)));
    measure_ = PositiveMeasure({{0.0, pois[0]}}, {{0.0, kInf, dens, t}});
    at_inf_ = std::exp(-t);
    lk_ = 0;
    radius_ = t;
    finalize();
  }
  double eval(double z) const override { return std::exp(-t_ * z / (t_ + z)); }
  cplx eval(cplx z) const override { return std::exp(-t_ * z / (t_ + z)); }
  double gm1(double z) const override { return std::expm1(-t_ * z / (t_ + z)); }
  cplx gm1(cplx z) const override { return num::expm1(-t_ * z / (t_ + z)); }
  cplx log_g_plus_z(cplx u) const override { return u * u / (t_ + u); }

 private:
  double t_;
};

class ChungFunction final : public CMFunction {
 public:
  explicit ChungFunction(std::vector<double> a) : a_(std::move(a)) {
    if (a_.empty()) fail(Status::invalid_argument, "chung: empty coefficient sequence");
    double sum = 0, t = 0;
    for (size_t k = 0; k < a_.size(); ++k) {
      if (!(a_[k] >= 0)) fail(Status::out_of_range, "chung: coefficients must be nonnegative");
      sum += a_[k];
      t += k * a_[k];
    }
    if (std::abs(sum - 1) > 1e-12) fail(Status::out_of_range, "chung: coefficients must sum to 1");
    if (!(t > 0 && t <= 1 + 1e-12)) fail(Status::out_of_range, "chung: Σ k a_k must lie in (0, 1]");
    t_ = std::min(t, 1.0);
    std::ostringstream os;
    os << "chung:a=";
    for (size_t k = 0; k < a_.size(); ++k) os << (k ? "," : "") << a_[k];
    name_ = os.str();
    for (int j = 0; j < 7; ++j) {
      double s = 0;
      for (size_t k = 1; k < a_.size(); ++k) s += a_[k] * rising(double(k), j);
      m_[j] = (j == 0 ? s + a_[0] : s) / std::pow(t_, j);
    }
    m_[0] = 1;
    m_[1] = 1;
    Poly dens(a_.size() > 1 ? a_.size() - 1 : 1, 0.0);
    for (size_t k = 1; k < a_.size(); ++k)
      dens[k - 1] = a_[k] * std::pow(t_, double(k)) / factorial(int(k) - 1);
    std::vector<Atom> atoms;
    if (a_[0] > 0) atoms.push_back({0.0, a_[0]});
    std::vector<PolyExpSegment> segs;
    if (a_.size() > 1) segs.push_back({0.0, kInf, dens, t_});
    measure_ = PositiveMeasure(atoms, segs);
    at_inf_ = a_[0];
    if (a_[0] > 0)
      lk_ = 0;
    else
      lk_ = (a_.size() > 1 && a_[1] > 0) ? 2 : 1;
    radius_ = t_;
    finalize();
  }
  template <class T>
  T value(T z) const {
    const T w = t_ / (t_ + z);
    T s = 0;
    for (size_t k = a_.size(); k-- > 0;) s = s * w + a_[k];
    return s;
  }
  template <class T>
  T minus_one(T z) const {
    T s = 0;
    T lw;
    if constexpr (std::is_same_v<T, double>)
      lw = std::log1p(z / t_);
    else
      lw = num::log1p(z / t_);
    for (size_t k = 1; k < a_.size(); ++k) {
      if constexpr (std::is_same_v<T, double>)
        s += a_[k] * std::expm1(-double(k) * lw);
      else
        s += a_[k] * num::expm1(-double(k) * lw);
    }
    return s;
  }
  double eval(double z) const override { return value(z); }
  cplx eval(cplx z) const override { return value(z); }
  std::optional<ResolventForm> resolvent_form() const override { return ResolventForm{t_, a_, 1}; }
  double gm1(double z) const override { return minus_one(z); }
  cplx gm1(cplx z) const override { return minus_one(z); }

 private:
  std::vector<double> a_;
  double t_ = 1;
};

class FracTailFunction final : public CMFunction {
 public:
  explicit FracTailFunction(double gamma) : gamma_(gamma) {
    if (!(gamma > 0 && gamma < 1)) fail(Status::out_of_range, "frac_tail: gamma must lie in (0, 1)");
    std::ostringstream os;
    os << "frac_tail:gamma=" << gamma;
    name_ = os.str();
    m_[0] = 1;
    m_[1] = 1;
    for (int k = 2; k < 7; ++k) m_[k] = kInf;
    measure_ = PositiveMeasure({{0.0, 1.0 - gamma}}, {}, {{0.0, gamma * (gamma + 1), 1.0, 2.0 + gamma}});
    at_inf_ = 1 - gamma;
    lk_ = 0;
    radius_ = 0;
    finalize();
  }
  double gamma() const { return gamma_; }

 private:
  double gamma_;
};

// g_n(z) = g(z/n)^n via log g + z, which stays O(z²/n) near 0.
class PowerScaled final : public CMFunction {
 public:
  PowerScaled(CMPtr base, unsigned n) : base_(std::move(base)), n_(n) {
    name_ = base_->name() + "^" + std::to_string(n);
    const double nn = n;
    const double d2 = base_->deriv0(2), d3 = base_->deriv0(3), d4 = base_->deriv0(4);
    m_[0] = 1;
    m_[1] = 1;
    m_[2] = 1 + (d2 - 1) / nn;
    m_[3] = -(-(nn - 1) * (nn - 2) - 3 * (nn - 1) * d2 + d3) / (nn * nn);
    m_[4] = ((nn - 1) * (nn - 2) * (nn - 3) + 6 * (nn - 1) * (nn - 2) * d2 + 3 * (nn - 1) * d2 * d2 -
             4 * (nn - 1) * d3 + d4) /
            (nn * nn * nn);
    for (int k = 2; k <= 4; ++k)
      if (std::isnan(m_[k])) m_[k] = kNaN;
    m_[5] = m_[6] = kNaN;
    at_inf_ = std::pow(base_->mass_at_infinity(), nn);
    radius_ = nn * base_->analytic_radius();
    lk_ = base_->lk_exponent() == 0 ? 0 : std::max(1, int(std::ceil(base_->lk_exponent() / nn)));
    finalize();
  }
  double eval(double z) const override {
    return std::exp(n_ * base_->log_g_plus_z(z / n_) - z);
  }
  cplx eval(cplx z) const override {
    return std::exp(double(n_) * base_->log_g_plus_z(z / double(n_)) - z);
  }
  double gm1(double z) const override {
    return std::expm1(n_ * base_->log_g_plus_z(z / n_) - z);
  }
  cplx gm1(cplx z) const override {
    return num::expm1(double(n_) * base_->log_g_plus_z(z / double(n_)) - z);
  }
  cplx log_g_plus_z(cplx u) const override {
    return double(n_) * base_->log_g_plus_z(u / double(n_));
  }
  std::optional<ResolventForm> resolvent_form() const override {
    auto f = base_->resolvent_form();
    if (f) f->power *= n_;
    return f;
  }
  double deriv(double z, int k) const override {
    if (k < 0 || k > 4) fail(Status::invalid_argument, "derivative order must be 0..4");
    if (k == 0) return eval(z);
    const double n = n_, v = z / n;
    const double g = base_->eval(v);
    const double g1 = base_->deriv(v, 1);
    auto gp = [&](int j) { return std::pow(g, n - j); };
    if (k == 1) return gp(1) * g1;
    const double g2 = base_->deriv(v, 2);
    if (k == 2) return (n - 1) / n * gp(2) * g1 * g1 + gp(1) * g2 / n;
    const double g3 = base_->deriv(v, 3);
    if (k == 3)
      return ((n - 1) * (n - 2) * gp(3) * g1 * g1 * g1 + 3 * (n - 1) * gp(2) * g1 * g2 +
              gp(1) * g3) /
             (n * n);
    const double g4 = base_->deriv(v, 4);
    return ((n - 1) * (n - 2) * (n - 3) * gp(4) * std::pow(g1, 4) +
            6 * (n - 1) * (n - 2) * gp(3) * g1 * g1 * g2 + 3 * (n - 1) * gp(2) * g2 * g2 +
            4 * (n - 1) * gp(2) * g1 * g3 + gp(1) * g4) /
           (n * n * n);
  }

 private:
  CMPtr base_;
  unsigned n_;
};

}  // namespace

CMPtr make_exp() { return std::make_shared<ExpFunction>(); }
CMPtr make_euler() { return std::make_shared<EulerFunction>(); }
CMPtr make_spline() { return std::make_shared<SplineFunction>(); }
CMPtr make_kendall(double t) { return std::make_shared<KendallFunction>(t); }
CMPtr make_yosida(double t) { return std::make_shared<YosidaFunction>(t); }
CMPtr make_hille() { return std::make_shared<HilleFunction>(); }
CMPtr make_chung(std::vector<double> a) { return std::make_shared<ChungFunction>(std::move(a)); }
CMPtr make_frac_tail(double gamma) { return std::make_shared<FracTailFunction>(gamma); }
std::optional<double> frac_tail_gamma(const CMFunction& g) {
  if (auto* f = dynamic_cast<const FracTailFunction*>(&g)) return f->gamma();
  return std::nullopt;
}

CMPtr make_from_measure(PositiveMeasure nu, std::string name) {
  return std::make_shared<MeasureFunction>(std::move(nu), std::move(name));
}

CMPtr power_scale(const CMPtr& g, unsigned n) {
  if (n == 0) fail(Status::invalid_argument, "power_scale: n must be positive");
  if (!g->has(kB1)) fail(Status::requires_class, "power_scale: g must be in B1");
  if (n == 1) return g;
  if (g->name() == "exp") return g;
  return std::make_shared<PowerScaled>(g, n);
}

bool check_b1(const CMFunction& g, double tol) {
  return std::abs(g.moment(0) - 1) <= tol && std::abs(g.moment(1) - 1) <= tol;
}

bool check_bk(const CMFunction& g, int k, double tol) {
  if (k < 1 || k > 4) fail(Status::invalid_argument, "check_bk: k must be 1..4");
  if (!check_b1(g, tol)) return false;
  for (int j = 2; j <= k; ++j)
    if (!std::isfinite(g.moment(j))) return false;
  if (k >= 2 && g.moment(2) < 1 - tol) return false;
  return true;
}

// ---------------------------------------------------------------- families

namespace {

class ConstantFamily final : public ScaledFamily {
 public:
  explicit ConstantFamily(CMPtr g) : g_(std::move(g)) { name_ = g_->name(); }
  CMPtr at(double) const override { return g_; }

 private:
  CMPtr g_;
};

class KendallFamily final : public ScaledFamily {
 public:
  KendallFamily() { name_ = "kendall"; }
  CMPtr at(double t) const override { return make_kendall(t); }
  bool valid(double t) const override { return t > 0 && t <= 1; }
};

class YosidaFamily final : public ScaledFamily {
 public:
  YosidaFamily() { name_ = "yosida"; }
  CMPtr at(double t) const override { return make_yosida(t); }
};

}  // namespace

ParamMap parse_params(const std::string& text, const std::string& spec) {
  ParamMap out;
  std::string key;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto eq = tok.find('=');
    std::string val = tok;
    if (eq != std::string::npos) {
      key = tok.substr(0, eq);
      val = tok.substr(eq + 1);
    }
    if (key.empty()) fail(Status::parse, "bad parameter list in '" + spec + "'");
    try {
      size_t used = 0;
      double v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      out[key].push_back(v);
    } catch (const std::exception&) {
      fail(Status::parse, "bad number '" + val + "' in '" + spec + "'");
    }
  }
  return out;
}

double scalar_param(const ParamMap& p, const std::string& key,
                    double fallback, const std::string& spec) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) fail(Status::parse, "parameter '" + key + "' must be scalar in '" + spec + "'");
  return it->second[0];
}

void expect_keys(const ParamMap& p,
                 std::initializer_list<const char*> allowed, const std::string& spec) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) fail(Status::parse, "unknown parameter '" + k + "' in '" + spec + "'");
  }
}

FamilyPtr constant_family(CMPtr g) { return std::make_shared<ConstantFamily>(std::move(g)); }
FamilyPtr kendall_family() { return std::make_shared<KendallFamily>(); }
FamilyPtr yosida_family() { return std::make_shared<YosidaFamily>(); }

CMPtr parse_function(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "measure") {
    if (rest.empty()) fail(Status::parse, "measure: needs a file name");
    return make_from_measure(PositiveMeasure::from_file(rest), spec);
  }
  const auto p = parse_params(rest, spec);
  if (head == "exp") {
    expect_keys(p, {}, spec);
    return make_exp();
  }
  if (head == "euler") {
    expect_keys(p, {}, spec);
    return make_euler();
  }
  if (head == "spline") {
    expect_keys(p, {}, spec);
    return make_spline();
  }
  if (head == "hille") {
    expect_keys(p, {}, spec);
    return make_hille();
  }
  if (head == "kendall") {
    expect_keys(p, {"t"}, spec);
    return make_kendall(scalar_param(p, "t", 0.5, spec));
  }
  if (head == "yosida") {
    expect_keys(p, {"t"}, spec);
    return make_yosida(scalar_param(p, "t", 1.0, spec));
  }
  if (head == "frac_tail") {
    expect_keys(p, {"gamma"}, spec);
    return make_frac_tail(scalar_param(p, "gamma", 0.5, spec));
  }
  if (head == "chung") {
    expect_keys(p, {"a", "t"}, spec);
    auto it = p.find("a");
    if (it == p.end()) fail(Status::parse, "chung: needs a=<coefficients>");
    auto g = make_chung(it->second);
    // t is implied by the coefficients; an explicit value must match it.
    if (p.count("t")) {
      double t = scalar_param(p, "t", 0, spec), implied = 0;
      for (size_t k = 0; k < it->second.size(); ++k) implied += k * it->second[k];
      if (std::abs(t - implied) > 1e-12)
        fail(Status::out_of_range, "chung: t must equal the sum of k a_k");
    }
    return g;
  }
  std::string names;
  for (const auto& n : function_names()) names += " " + n;
  fail(Status::parse, "unknown function '" + spec + "'; available:" + names);
}

FamilyPtr parse_family(const std::string& spec) {
  if (spec == "kendall") return kendall_family();
  if (spec == "yosida") return yosida_family();
  return constant_family(parse_function(spec));
}

std::vector<std::string> function_names() {
  return {"exp", "euler", "spline", "kendall", "yosida", "hille", "chung", "frac_tail", "measure"};
}

}  // namespace cma
