#include "measure.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "numerics.hpp"

namespace cma {

double poly_eval(const Poly& p, double x) {
  double r = 0;
  for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
  return r;
}

Poly poly_mul(const Poly& p, const Poly& q) {
  if (p.empty() || q.empty()) return {};
  Poly r(p.size() + q.size() - 1, 0.0);
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

Poly poly_monomial(int k) {
  Poly p(k + 1, 0.0);
  p[k] = 1.0;
  return p;
}

namespace {

template <class T>
T exp_minus(T kappa, double s) {
  return std::exp(-kappa * s);
}

// Σ q_j ∫_s^∞ t^j e^{-κt} dt via the upward recursion; as an antiderivative it is
// valid for any κ ≠ 0.
template <class T>
T pe_from(const Poly& q, T kappa, double s) {
  const T e = exp_minus(kappa, s);
  T P = e / kappa;
  T sum = q[0] * P;
  double sp = 1;
  for (size_t j = 1; j < q.size(); ++j) {
    sp *= s;
    P = (sp * e + double(j) * P) / kappa;
    sum += q[j] * P;
  }
  return sum;
}

template <class T>
T pe_integral(const Poly& q, T kappa, double a, double b) {
  if (q.empty() || !(b > a)) return T(0);
  if (std::isinf(b)) {
    if (!(std::real(kappa) > 0)) fail(Status::divergent, "poly-exp integral over infinite range needs Re κ > 0");
    return pe_from(q, kappa, a);
  }
  const double mag = std::abs(kappa) * (b - a);
  if (mag > 200) return pe_from(q, kappa, a) - pe_from(q, kappa, b);
  const int panels = std::max(1, int(std::ceil(mag / 2)));
  auto f = [&](double s) -> T { return poly_eval(q, s) * exp_minus(kappa, s); };
  if (q.size() <= 20) return num::gauss_panels<30>(f, a, b, panels);
  return num::gauss_panels<50>(f, a, b, panels);
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients of q(u − c) in powers of u.
Poly taylor_shift(const Poly& q, double c) {
  Poly r(q.size(), 0.0);
  for (size_t j = 0; j < q.size(); ++j)
    for (size_t i = 0; i <= j; ++i) r[i] += q[j] * binom(int(j), int(i)) * std::pow(-c, double(j - i));
  return r;
}

double tail_kernel(const PowerTailSegment& t, const Poly& q, double lo, double hi) {
  const Poly qs = taylor_shift(q, t.shift);
  const double ulo = lo + t.shift, uhi = hi + t.shift;
  double sum = 0;
  for (size_t i = 0; i < qs.size(); ++i) {
    if (qs[i] == 0) continue;
    const double e = double(i) + 1.0 - t.power;
    if (std::isinf(hi) && e >= 0) {
      // The highest divergent power dominates.
      double lead = 0;
      for (size_t j = qs.size(); j-- > i;)
        if (qs[j] != 0 && double(j) + 1.0 - t.power >= 0) {
          lead = qs[j];
          break;
        }
      return lead > 0 ? kInf : -kInf;
    }
    double term;
    if (std::abs(e) < 1e-12)
      term = std::log(uhi / ulo);
    else
      term = (std::isinf(uhi) ? 0.0 : std::pow(uhi, e)) / e - std::pow(ulo, e) / e;
    sum += qs[i] * term;
  }
  return t.weight * sum;
}

// ∫₀^X f(x) dx with x = e^u − 1, so power-law stretches become short exponential ones.
template <class F>
cplx log_substituted(F f, double X) {
  const double U = std::log1p(X);
  const int pieces = std::max(1, int(std::ceil(U)));
  auto h = [&](double u) -> cplx {
    const double e = std::exp(u);
    return f(e - 1.0) * e;
  };
  cplx sum = 0;
  for (int i = 0; i < pieces; ++i)
    sum += num::integrate(h, U * i / pieces, U * (i + 1) / pieces, 1e-13, 10).value;
  return sum;
}

// Rotating the contour to arg s = −arg z turns e^{-zs} into a real decaying
// exponential; the pole of (s + shift)^{-power} sits on the negative axis.
cplx tail_laplace(const PowerTailSegment& t, cplx z, int k) {
  const double r = std::abs(z);
  const cplx rot = std::polar(1.0, -std::arg(z));
  auto f = [&](double x) -> cplx {
    const cplx sig = x * rot;
    cplx v = std::pow(t.a + t.shift + sig, -t.power) * std::exp(-r * x);
    for (int i = 0; i < k; ++i) v *= t.a + sig;
    return v;
  };
  // e^{-40} is below the working precision relative to the bulk.
  return t.weight * std::exp(-z * t.a) * rot * log_substituted(f, 40.0 / r);
}

cplx tail_laplace_m1(const PowerTailSegment& t, cplx z) {
  const double r = std::abs(z);
  const cplx rot = std::polar(1.0, -std::arg(z));
  const cplx c = t.a + t.shift;
  auto f = [&](double x) -> cplx {
    return std::pow(c + x * rot, -t.power) * num::expm1(-z * t.a - r * x);
  };
  const double X = 40.0 / r;
  // Beyond X the expm1 factor is −1 to working precision: closed-form remainder.
  const cplx rest = -std::pow(c + X * rot, 1.0 - t.power) / ((t.power - 1.0) * rot);
  return t.weight * rot * (log_substituted(f, X) + rest);
}

bool density_nonnegative(const PolyExpSegment& seg) {
  const Poly& p = seg.poly;
  if (std::all_of(p.begin(), p.end(), [](double c) { return c >= 0; }) && seg.a >= 0) return true;
  size_t deg = p.size();
  while (deg > 0 && p[deg - 1] == 0) --deg;
  if (deg == 0) return true;
  double scale = 0;
  for (double c : p) scale = std::max(scale, std::abs(c));
  const double tol = -1e-13 * scale;
  std::vector<double> pts{seg.a};
  const double hi = std::isinf(seg.b) ? std::max(2.0 * seg.a, 1.0) * 1e6 : seg.b;
  pts.push_back(hi);
  if (deg > 1) {
    Eigen::VectorXd coeffs(deg);
    for (size_t i = 0; i < deg; ++i) coeffs[i] = p[i];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
    std::vector<double> roots;
    solver.realRoots(roots, 1e-9);
    for (double r : roots)
      if (r > seg.a && r < hi) pts.push_back(r);
  }
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i < pts.size(); ++i) {
    if (poly_eval(p, pts[i]) < tol) return false;
    if (i + 1 < pts.size() && poly_eval(p, 0.5 * (pts[i] + pts[i + 1])) < tol) return false;
  }
  if (std::isinf(seg.b) && p[deg - 1] < 0) return false;
  return true;
}

}  // namespace

double poly_exp_integral(const Poly& q, double kappa, double a, double b) {
  return pe_integral<double>(q, kappa, a, b);
}

cplx poly_exp_integral(const Poly& q, cplx kappa, double a, double b) {
  return pe_integral<cplx>(q, kappa, a, b);
}

PositiveMeasure::PositiveMeasure(std::vector<Atom> atoms, std::vector<PolyExpSegment> segments,
                                 std::vector<PowerTailSegment> tails)
    : atoms_(std::move(atoms)), segments_(std::move(segments)), tails_(std::move(tails)) {
  validate();
}

void PositiveMeasure::validate() const {
  for (const auto& at : atoms_) {
    if (!(at.s >= 0) || !std::isfinite(at.s)) fail(Status::invalid_argument, "atom location must be finite and >= 0");
    if (!(at.w > 0) || !std::isfinite(at.w)) fail(Status::invalid_argument, "atom weight must be positive");
  }
  for (const auto& seg : segments_) {
    if (!(seg.a >= 0) || !(seg.b > seg.a)) fail(Status::invalid_argument, "segment needs 0 <= a < b");
    if (!(seg.rate >= 0)) fail(Status::invalid_argument, "segment exp_rate must be >= 0");
    if (std::isinf(seg.b) && !(seg.rate > 0))
      fail(Status::invalid_argument, "segment reaching infinity needs exp_rate > 0");
    if (seg.poly.empty()) fail(Status::invalid_argument, "segment polynomial is empty");
    if (!density_nonnegative(seg)) fail(Status::invalid_argument, "segment density is negative somewhere");
  }
  for (const auto& t : tails_) {
    if (!(t.a >= 0) || !(t.weight > 0) || !(t.power > 1) || !(t.a + t.shift > 0))
      fail(Status::invalid_argument, "power tail needs a >= 0, weight > 0, power > 1, a + shift > 0");
  }
}

PositiveMeasure PositiveMeasure::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Status::parse, std::string("measure JSON: ") + e.what());
  }
  auto num_or_inf = [](const nlohmann::json& v) -> double {
    if (v.is_null()) return kInf;
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s == "inf" || s == "infinity" || s == "Infinity") return kInf;
      fail(Status::parse, "measure JSON: bad number '" + s + "'");
    }
    return v.get<double>();
  };
  std::vector<Atom> atoms;
  std::vector<PolyExpSegment> segs;
  try {
    if (j.contains("atoms"))
      for (const auto& a : j.at("atoms")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    if (j.contains("segments"))
      for (const auto& s : j.at("segments")) {
        PolyExpSegment seg;
        seg.a = s.at("a").get<double>();
        seg.b = s.contains("b") ? num_or_inf(s.at("b")) : kInf;
        seg.poly = s.at("poly").get<std::vector<double>>();
        seg.rate = s.value("exp_rate", 0.0);
        segs.push_back(seg);
      }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Status::parse, std::string("measure JSON: ") + e.what());
  }
  return PositiveMeasure(std::move(atoms), std::move(segs));
}

PositiveMeasure PositiveMeasure::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Status::io, "cannot open measure file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

double PositiveMeasure::moment(int k) const {
  if (k < 0) fail(Status::invalid_argument, "moment order must be >= 0");
  return kernel_integral(poly_monomial(k), 0.0, kInf);
}

double PositiveMeasure::kernel_integral(const Poly& q, double lo, double hi, bool lo_closed,
                                        bool hi_closed) const {
  double sum = 0;
  for (const auto& at : atoms_) {
    bool above = at.s > lo || (at.s == lo && lo_closed);
    bool below = at.s < hi || (at.s == hi && hi_closed);
    if (above && below) sum += at.w * poly_eval(q, at.s);
  }
  for (const auto& seg : segments_) {
    double l = std::max(lo, seg.a), h = std::min(hi, seg.b);
    if (h > l) sum += poly_exp_integral(poly_mul(q, seg.poly), seg.rate, l, h);
  }
  for (const auto& t : tails_) {
    double l = std::max(lo, t.a);
    if (hi > l) sum += tail_kernel(t, q, l, hi);
  }
  return sum;
}

cplx PositiveMeasure::laplace(cplx z, int k) const {
  cplx sum = 0;
  for (const auto& at : atoms_) sum += at.w * std::pow(at.s, double(k)) * std::exp(-z * at.s);
  for (const auto& seg : segments_) {
    Poly q = k == 0 ? seg.poly : poly_mul(poly_monomial(k), seg.poly);
    sum += poly_exp_integral(q, cplx(seg.rate) + z, seg.a, seg.b);
  }
  for (const auto& t : tails_) {
    if (z == 0.0)
      sum += tail_kernel(t, poly_monomial(k), t.a, kInf);
    else
      sum += tail_laplace(t, z, k);
  }
  return sum;
}

double PositiveMeasure::laplace(double z, int k) const {
  double sum = 0;
  for (const auto& at : atoms_) sum += at.w * std::pow(at.s, double(k)) * std::exp(-z * at.s);
  for (const auto& seg : segments_) {
    Poly q = k == 0 ? seg.poly : poly_mul(poly_monomial(k), seg.poly);
    sum += poly_exp_integral(q, seg.rate + z, seg.a, seg.b);
  }
  for (const auto& t : tails_) {
    if (z == 0.0)
      sum += tail_kernel(t, poly_monomial(k), t.a, kInf);
    else
      sum += tail_laplace(t, cplx(z), k).real();
  }
  return sum;
}

double PositiveMeasure::laplace_m1(double z) const {
  double sum = 0;
  for (const auto& at : atoms_) sum += at.w * std::expm1(-z * at.s);
  for (const auto& seg : segments_) {
    auto f = [&](double s) { return poly_eval(seg.poly, s) * std::exp(-seg.rate * s) * std::expm1(-z * s); };
    std::vector<double> br{seg.a};
    if (std::isinf(seg.b)) {
      br.push_back(seg.a + 1.0 / seg.rate);
      br.push_back(seg.a + 40.0 / seg.rate);
    }
    br.push_back(seg.b);
    sum += num::integrate_pieces(f, br, 1e-14).value;
  }
  for (const auto& t : tails_) sum += tail_laplace_m1(t, cplx(z)).real();
  return sum;
}

cplx PositiveMeasure::laplace_m1(cplx z) const {
  if (z.imag() == 0) return laplace_m1(z.real());
  cplx sum = 0;
  for (const auto& at : atoms_) sum += at.w * num::expm1(-z * at.s);
  for (const auto& seg : segments_) {
    const double reach = std::isinf(seg.b) ? seg.a + 40.0 / seg.rate : seg.b;
    if (std::abs(z) * reach > 0.25) {
      sum += poly_exp_integral(seg.poly, cplx(seg.rate) + z, seg.a, seg.b) -
             poly_exp_integral(seg.poly, cplx(seg.rate), seg.a, seg.b);
    } else {
      auto f = [&](double s) -> cplx {
        return poly_eval(seg.poly, s) * std::exp(-seg.rate * s) * num::expm1(-z * s);
      };
      std::vector<double> br{seg.a};
      if (std::isinf(seg.b)) br.push_back(reach);
      br.push_back(seg.b);
      sum += num::integrate_pieces(f, br, 1e-14).value;
    }
  }
  for (const auto& t : tails_) sum += tail_laplace_m1(t, z);
  return sum;
}

double PositiveMeasure::atom_at_zero() const {
  double w = 0;
  for (const auto& at : atoms_)
    if (at.s == 0) w += at.w;
  return w;
}

std::vector<double> PositiveMeasure::breakpoints() const {
  std::vector<double> b{0.0, 1.0};
  for (const auto& at : atoms_) b.push_back(at.s);
  for (const auto& seg : segments_) {
    b.push_back(seg.a);
    if (std::isfinite(seg.b)) b.push_back(seg.b);
  }
  for (const auto& t : tails_) b.push_back(t.a);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

bool PositiveMeasure::has_tail_beyond(double s) const {
  for (const auto& at : atoms_)
    if (at.s > s) return true;
  for (const auto& seg : segments_)
    if (seg.b > s) return true;
  return !tails_.empty();
}

}  // namespace cma
