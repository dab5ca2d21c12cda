#include "rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "functionals.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

namespace cma {

BoundReport make_report(std::string scheme, std::string generator, double t, unsigned n,
                        double alpha, std::string vector_id, double error, double bound,
                        std::string theorem, const SlackPolicy& slack) {
  BoundReport r;
  r.scheme = std::move(scheme);
  r.generator = std::move(generator);
  r.t = t;
  r.n = n;
  r.alpha = alpha;
  r.vector_id = std::move(vector_id);
  r.error = error;
  r.bound = bound;
  r.slack = bound - error;
  r.theorem = std::move(theorem);
  r.pass = slack.passes(error, bound);
  return r;
}

bool report_order(const BoundReport& a, const BoundReport& b) {
  return std::tie(a.scheme, a.generator, a.t, a.n, a.alpha, a.vector_id, a.theorem) <
         std::tie(b.scheme, b.generator, b.t, b.n, b.alpha, b.vector_id, b.theorem);
}

OrderFit fit_order(const std::vector<double>& n, const std::vector<double>& error, double reference) {
  OrderFit f;
  f.n = n;
  f.error = error;
  const double floor = 1e2 * kEps * reference;
  std::vector<double> x, y;
  for (size_t i = 0; i < n.size() && i < error.size(); ++i)
    if (error[i] > floor && std::isfinite(error[i])) {
      x.push_back(std::log(n[i]));
      y.push_back(std::log(error[i]));
    }
  f.used = int(x.size());
  if (x.empty()) {
    f.exact = true;
    return f;
  }
  if (x.size() < 4) return f;
  auto lf = num::least_squares(x, y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.r2 = lf.r2;
  return f;
}

const char* suite_name(Suite s) {
  switch (s) {
    case Suite::first: return "first";
    case Suite::non_b2: return "nonb2";
    case Suite::second: return "second";
    case Suite::holo: return "holo";
    case Suite::holo2: return "holo2";
  }
  return "?";
}

Suite parse_suite(const std::string& s) {
  for (Suite k : {Suite::first, Suite::non_b2, Suite::second, Suite::holo, Suite::holo2})
    if (s == suite_name(k)) return k;
  fail(Status::parse, "unknown suite '" + s + "'; available: first nonb2 second holo holo2");
}

bool SuiteResult::ok() const {
  for (const auto& r : reports)
    if (!r.pass) return false;
  for (const auto& f : fits)
    if (!f.pass) return false;
  return true;
}

std::vector<unsigned> dyadic(unsigned lo_exp, unsigned hi_exp) {
  std::vector<unsigned> v;
  for (unsigned k = lo_exp; k <= hi_exp; ++k) v.push_back(1u << k);
  return v;
}

BoundContext::BoundContext(GeneratorMatrix A, std::vector<TestVector> vectors)
    : A_(std::move(A)), vectors_(std::move(vectors)) {
  if (!A_.spectral())
    fail(Status::unsupported, "bound suites need a diagonalizable generator");
  for (const auto& v : vectors_) {
    if (v.x.size() != A_.dim()) fail(Status::invalid_argument, "test vector has the wrong size");
    coeffs_.push_back(A_.structure() == Structure::diagonal ? v.x : Vector(A_.Vinv() * v.x));
  }
}

double BoundContext::M(double beta) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = m_cache_.find(beta);
    if (it != m_cache_.end()) return it->second;
  }
  const double m = semigroup_constant(A_, beta);
  std::lock_guard<std::mutex> lock(mu_);
  m_cache_[beta] = m;
  return m;
}

double BoundContext::power_norm(size_t vector, double alpha) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = norm_cache_.find({vector, alpha});
    if (it != norm_cache_.end()) return it->second;
  }
  const double v = alpha == 0 ? vectors_.at(vector).x.norm()
                              : frac_power_apply(A_, alpha, vectors_.at(vector).x).norm();
  std::lock_guard<std::mutex> lock(mu_);
  norm_cache_[{vector, alpha}] = v;
  return v;
}

std::vector<double> BoundContext::apply_norms(const std::function<cplx(cplx)>& f) const {
  const auto& l = A_.eigenvalues();
  Vector fl(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) fl[i] = f(l[i]);
  std::vector<double> out;
  for (const auto& c : coeffs_) {
    Vector y = fl.cwiseProduct(c);
    out.push_back(A_.structure() == Structure::diagonal ? y.norm() : (A_.V() * y).norm());
  }
  return out;
}

cplx first_error(const CMFunction& gn, cplx z) { return gn.excess(z); }

cplx second_residual(const CMFunction& gn, double a2, unsigned n, cplx z) {
  return gn.excess(z) - (a2 / n) * z * z * std::exp(-z);
}

namespace {

bool is_euler(const ScaledFamily& f) { return f.name() == "euler"; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Everything one (t, n) grid point contributes.
struct PointResult {
  std::vector<BoundReport> reports;
  std::vector<double> sup;  // per fit slot
};

struct FitSlot {
  std::string tag;
  double alpha;
  double power;  // normalize the scalar error by |tλ|^power
  bool residual;
  double lo, hi;
};

double spectral_sup(const GeneratorMatrix& A, const std::function<cplx(cplx)>& f, double t,
                    double power) {
  double s = 0;
  const auto& l = A.eigenvalues();
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    const double m = std::abs(t * l[i]);
    if (m == 0) continue;
    s = std::max(s, std::abs(f(t * l[i])) / std::pow(m, power));
  }
  return s;
}

void require(bool ok, Status code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& cfg, const BoundContext& ctx) {
  if (!cfg.family) fail(Status::invalid_argument, "suite needs a scheme");
  if (cfg.n.empty()) fail(Status::invalid_argument, "empty n grid");
  if (cfg.t.empty()) fail(Status::invalid_argument, "empty t grid");
  for (double t : cfg.t)
    if (!(t > 0)) fail(Status::out_of_range, "t grid values must be positive");
  for (unsigned n : cfg.n)
    if (n == 0) fail(Status::out_of_range, "n grid values must be positive");

  const ScaledFamily& fam = *cfg.family;
  const GeneratorMatrix& A = ctx.A();
  const std::string scheme = fam.name(), gen = A.name();
  const Suite suite = cfg.suite;

  std::vector<double> alphas = cfg.alpha;
  if (alphas.empty()) {
    switch (suite) {
      case Suite::first: alphas = {0.5, 1.0, 2.0}; break;
      case Suite::non_b2: alphas = {0.5, 1.0}; break;
      case Suite::second: alphas = {3.0}; break;
      case Suite::holo: alphas = {0.0, 0.25, 0.5, 0.75, 1.0}; break;
      case Suite::holo2: alphas = {0.0, 0.5, 1.0}; break;
    }
  }
  for (double a : alphas) {
    bool ok = true;
    switch (suite) {
      case Suite::first: ok = a > 0 && a <= 2; break;
      case Suite::non_b2: ok = a > 0 && a <= 1; break;
      case Suite::second: ok = true; break;
      case Suite::holo:
      case Suite::holo2: ok = a >= 0 && a <= 1; break;
    }
    if (!ok) fail(Status::out_of_range, std::string("alpha ") + fmt(a) + " outside the range of suite " + suite_name(suite));
  }
  if (suite == Suite::second) alphas = {3.0};
  if ((suite == Suite::holo || suite == Suite::holo2) && A.region() != SpectrumRegion::positive_reals)
    fail(Status::requires_class, "requires-holomorphic: generator " + gen + " is not sectorial");

  SuiteResult result;
  std::vector<double> ts;
  std::vector<CMPtr> gs;
  for (double t : cfg.t) {
    if (!fam.valid(t)) {
      result.notes.push_back(scheme + " t=" + fmt(t) + ": outside the family's parameter range; skipped");
      continue;
    }
    CMPtr g = fam.at(t);
    switch (suite) {
      case Suite::first:
      case Suite::holo:
        require(g->has(kB2), Status::requires_class, g->name() + " is not in class B2");
        break;
      case Suite::non_b2:
        require(g->has(kB1) && !g->has(kB2), Status::requires_class,
                g->name() + " must be in B1 but not in B2");
        break;
      case Suite::second:
        require(g->has(kB4), Status::requires_class, g->name() + " is not in class B4");
        break;
      case Suite::holo2:
        require(g->has(kB4), Status::requires_class, g->name() + " is not in class B4");
        require(g->lk_exponent() > 0, Status::requires_class,
                g->name() + " is not integrable to any power (needed for the second-order holomorphic bound)");
        break;
    }
    ts.push_back(t);
    gs.push_back(g);
  }

  // Fit slots per suite.
  std::vector<FitSlot> slots;
  for (double a : alphas) {
    switch (suite) {
      case Suite::first:
        if (a == 1) slots.push_back({"first.order", a, 1.0, false, -1.1, -0.4});
        break;
      case Suite::holo:
        slots.push_back({"holo.order", a, a, false, -1.15, -0.85});
        break;
      case Suite::second:
        slots.push_back({"second.order", 3.0, 3.0, true, -kInf, -1.4});
        break;
      case Suite::holo2:
        slots.push_back({"holo2.order", a, a, true, -kInf, -1.85});
        break;
      case Suite::non_b2: break;
    }
  }

  const size_t nt = ts.size(), nn = cfg.n.size();
  const size_t nv = ctx.vectors().size();

  // c_α[gₙ] and d₁[gₙ] tables feed the sharp holomorphic bounds and their fitted constants.
  std::vector<std::vector<std::vector<double>>> calpha(nt, std::vector<std::vector<double>>(alphas.size(), std::vector<double>(nn, kNaN)));
  std::vector<std::vector<double>> d1(nt, std::vector<double>(nn, kNaN)), bn(nt, std::vector<double>(nn, kNaN));
  if (suite == Suite::holo || suite == Suite::holo2) {
    parallel_for(nt * nn, cfg.jobs, [&](size_t k) {
      const size_t it = k / nn, in = k % nn;
      const unsigned n = cfg.n[in];
      CMPtr gn = power_scale(gs[it], n);
      if (suite == Suite::holo) {
        for (size_t ia = 0; ia < alphas.size(); ++ia) {
          const double a = alphas[ia];
          if (is_euler(fam))
            calpha[it][ia][in] = euler_c_alpha_exact(n, a);
          else if (c_alpha_finite(*gn, a))
            calpha[it][ia][in] = c_alpha_quadrature(*gn, a);
          else
            calpha[it][ia][in] = kInf;
        }
      } else {
        bn[it][in] = b_of(*gn);
        if (is_euler(fam)) {
          const double c0 = euler_c_alpha_exact(n, 0), c1 = euler_c_alpha_exact(n, 1);
          d1[it][in] = c0 - c1 - bn[it][in];
        } else {
          d1[it][in] = c_alpha_finite(*gn, 0) ? d1_of(*gn) : kInf;
        }
      }
    });
  }

  std::vector<PointResult> points(nt * nn);
  parallel_for(nt * nn, cfg.jobs, [&](size_t k) {
    const size_t it = k / nn, in = k % nn;
    const double t = ts[it];
    const unsigned n = cfg.n[in];
    const CMFunction& g = *gs[it];
    CMPtr gn = power_scale(gs[it], n);
    const double m2 = g.moment(2);
    const double d = m2 - 1, a2 = d / 2;
    PointResult& pr = points[k];
    auto emit = [&](double alpha, size_t v, double err, double bound, const std::string& tag) {
      pr.reports.push_back(make_report(scheme, gen, t, n, alpha, ctx.vectors()[v].id, err, bound, tag, cfg.slack));
    };
    auto first = [&](cplx l) { return first_error(*gn, t * l); };
    auto resid = [&](cplx l) { return second_residual(*gn, a2, n, t * l); };

    if (suite == Suite::second || suite == Suite::holo2) {
      const auto errs = ctx.apply_norms(resid);
      if (suite == Suite::second) {
        const double m4 = g.moment(4);
        const double C = std::sqrt(d * (m4 - 1) / 2), C1 = m4 - 1, M0 = ctx.M(0);
        for (size_t v = 0; v < nv; ++v) {
          const double a3 = ctx.power_norm(v, 3), a4 = ctx.power_norm(v, 4);
          emit(3.0, v, errs[v], M0 * C * t * t * t * std::pow(n, -1.5) * a3, "second.A3");
          emit(3.0, v, errs[v], M0 * C1 * t * t * t / (double(n) * n) * (a3 + t * a4), "second.A3A4");
        }
      } else {
        // Fitted constant over the n grid: C = max n²K(gₙ, α)/(M_{3−α} + M_{4−α}).
        for (double a : alphas) {
          const double M3 = ctx.M(3 - a), M4 = ctx.M(4 - a);
          double Cfit = 0;
          for (size_t j = 0; j < nn; ++j) {
            const double nj = cfg.n[j];
            Cfit = std::max(Cfit, nj * nj * (std::abs(bn[it][j]) * M3 + 0.5 * d1[it][j] * M4) / (M3 + M4));
          }
          const double K = std::abs(bn[it][in]) * M3 + 0.5 * d1[it][in] * M4;
          for (size_t v = 0; v < nv; ++v) {
            const double an = std::pow(t, a) * ctx.power_norm(v, a);
            emit(a, v, errs[v], K * an, "holo2.K");
            emit(a, v, errs[v], Cfit * (M3 + M4) / (double(n) * n) * an, "holo2.fit");
          }
        }
      }
    } else {
      const auto errs = ctx.apply_norms(first);
      const double M0 = ctx.M(0);
      for (size_t ia = 0; ia < alphas.size(); ++ia) {
        const double a = alphas[ia];
        for (size_t v = 0; v < nv; ++v) {
          const double pn = ctx.power_norm(v, a), ta = std::pow(t, a);
          switch (suite) {
            case Suite::first:
              if (a == 2) emit(a, v, errs[v], M0 * a2 * t * t / n * pn, "first.A2");
              if (a == 1) emit(a, v, errs[v], M0 * std::sqrt(d) * t / std::sqrt(double(n)) * pn, "first.A1");
              emit(a, v, errs[v], 4 * M0 * std::pow(d * t * t / n, a / 2) * pn, "first.frac");
              break;
            case Suite::non_b2: {
              const double g1 = g.deriv(1.0 / n, 1), r = std::max(0.0, 1 + g1);
              const double f = 1 + 1 / std::abs(g1);
              if (a == 1) emit(a, v, errs[v], 4 * M_E * M0 * f * std::sqrt(r) * t * pn, "nonb2.A1");
              else emit(a, v, errs[v], 16 * M_E * M0 * f * std::pow(r, a / 2) * ta * pn, "nonb2.frac");
              break;
            }
            case Suite::holo: {
              const double M1 = ctx.M(1), M2 = ctx.M(2);
              const double K = 3 * M0 + 3 * M1 + M2 / 2;
              if (a == 0) emit(a, v, errs[v], K * d / n * pn, "holo.x");
              if (a == 1) emit(a, v, errs[v], (2 * M0 + 1.5 * M1) * d / n * t * pn, "holo.Ax");
              if (a > 0 && a < 1) emit(a, v, errs[v], 3 * M0 * K * d / n * ta * pn, "holo.frac");
              const double Mb = ctx.M(2 - a);
              const double c = calpha[it][ia][in];
              if (std::isfinite(c)) emit(a, v, errs[v], Mb * c * ta * pn, "holo.sharp");
              // (1 + C/n)-corrected leading term with C fitted over the n grid.
              double Cfit = 0;
              bool finite = true;
              for (size_t j = 0; j < nn; ++j) {
                const double cj = calpha[it][ia][j], nj = cfg.n[j];
                finite = finite && std::isfinite(cj);
                if (d > 0) Cfit = std::max(Cfit, nj * (cj * 2 * nj / d - 1));
              }
              if (finite) emit(a, v, errs[v], Mb * d / (2.0 * n) * (1 + Cfit / n) * ta * pn, "holo.sharp_fit");
              if (is_euler(fam)) {
                const double r = a < 0.5 ? 1 / (2.0 * n) + (1 - 2 * a) / (12.0 * n * n) : 1 / (2.0 * n);
                emit(a, v, errs[v], Mb * r * ta * pn, "holo.euler");
              }
              break;
            }
            default: break;
          }
        }
      }
    }
    for (const auto& s : slots)
      pr.sup.push_back(s.residual ? spectral_sup(A, [&](cplx z) { return second_residual(*gn, a2, n, z); }, t, s.power)
                                  : spectral_sup(A, [&](cplx z) { return first_error(*gn, z); }, t, s.power));
  });

  for (auto& p : points)
    for (auto& r : p.reports) result.reports.push_back(std::move(r));
  std::sort(result.reports.begin(), result.reports.end(), report_order);

  // Divergent sharp constants leave rows out; say so.
  if (suite == Suite::holo)
    for (size_t it = 0; it < nt; ++it)
      for (size_t ia = 0; ia < alphas.size(); ++ia)
        if (!std::isfinite(calpha[it][ia][0]))
          result.notes.push_back(gs[it]->name() + " t=" + fmt(ts[it]) + " alpha=" + fmt(alphas[ia]) +
                                 ": c_alpha of the scaled function diverges; sharp bound rows omitted");
  if (suite == Suite::holo2)
    for (size_t it = 0; it < nt; ++it)
      if (!std::isfinite(d1[it][0]))
        result.notes.push_back(gs[it]->name() + " t=" + fmt(ts[it]) + ": d1 of the scaled function diverges; bound is vacuous");

  std::vector<double> nd(cfg.n.begin(), cfg.n.end());
  for (size_t it = 0; it < nt; ++it)
    for (size_t s = 0; s < slots.size(); ++s) {
      std::vector<double> err(nn);
      for (size_t in = 0; in < nn; ++in) err[in] = points[it * nn + in].sup[s];
      OrderCheck c;
      c.tag = slots[s].tag;
      c.scheme = scheme;
      c.generator = gen;
      c.t = ts[it];
      c.alpha = slots[s].alpha;
      c.fit = fit_order(nd, err);
      c.lo = slots[s].lo;
      c.hi = slots[s].hi;
      c.pass = c.fit.exact || (std::isfinite(c.fit.slope) && c.fit.slope >= c.lo && c.fit.slope <= c.hi);
      result.fits.push_back(std::move(c));
    }

  // Non-B2: the decay of the rate factor (1 + g'(1/n))^{α/2} over a scalar sweep.
  if (suite == Suite::non_b2)
    for (size_t it = 0; it < nt; ++it) {
      auto gamma = frac_tail_gamma(*gs[it]);
      for (double a : alphas) {
        std::vector<double> nn2, rate;
        for (unsigned n : dyadic(4, 14)) {
          nn2.push_back(n);
          rate.push_back(std::pow(std::max(0.0, 1 + gs[it]->deriv(1.0 / n, 1)), a / 2));
        }
        OrderCheck c;
        c.tag = "nonb2.rate";
        c.scheme = scheme;
        c.generator = gen;
        c.t = ts[it];
        c.alpha = a;
        c.fit = fit_order(nn2, rate);
        if (gamma) {
          c.lo = -*gamma * a / 2 - 0.07;
          c.hi = -*gamma * a / 2 + 0.07;
        }
        c.pass = std::isfinite(c.fit.slope) && c.fit.slope >= c.lo && c.fit.slope <= c.hi;
        result.fits.push_back(std::move(c));
      }
    }
  return result;
}

// ------------------------------------------------------------------ optimality

const char* optimality_name(OptimalityKind k) {
  switch (k) {
    case OptimalityKind::imaginary_first: return "imaginary_first";
    case OptimalityKind::positive_first: return "positive_first";
    case OptimalityKind::positive_second: return "positive_second";
  }
  return "?";
}

std::vector<double> optimality_grid(OptimalityKind k) {
  return k == OptimalityKind::imaginary_first ? num::logspace(1e-2, 1e4, 2401)
                                              : num::logspace(1e-3, 1e3, 2401);
}

OptimalityReport optimality_lower(const ScaledFamily& family, OptimalityKind kind, double t,
                                  double alpha, const std::vector<unsigned>& n_grid,
                                  const std::vector<double>& moduli) {
  if (!family.valid(t)) fail(Status::out_of_range, family.name() + ": t outside the family's range");
  if (n_grid.empty()) fail(Status::invalid_argument, "empty n grid");
  CMPtr g = family.at(t);
  if (g->name() == "exp") fail(Status::requires_class, "optimality: g = e^{-z} has no error to bound from below");
  if (!g->has(kB2)) fail(Status::requires_class, g->name() + " is not in class B2");
  if (!(alpha >= 0 && alpha <= 2)) fail(Status::out_of_range, "optimality: alpha must be in [0, 2]");
  OptimalityReport rep;
  rep.kind = kind;
  rep.scheme = family.name();
  rep.t = t;
  rep.alpha = alpha;
  const auto grid = moduli.empty() ? optimality_grid(kind) : moduli;
  rep.grid_count = int(grid.size());
  rep.grid_min = *std::min_element(grid.begin(), grid.end());
  rep.grid_max = *std::max_element(grid.begin(), grid.end());
  const double d = g->moment(2) - 1, a2 = d / 2;
  const bool imag = kind == OptimalityKind::imaginary_first;
  rep.target = imag ? -alpha / 2 : kind == OptimalityKind::positive_first ? -1.0 : -2.0;

  std::vector<double> ns, sups;
  rep.c_low = kInf;
  for (unsigned n : n_grid) {
    CMPtr gn = power_scale(g, n);
    OptimalityRow row;
    row.n = n;
    row.sup = 0;
    for (double m : grid) {
      const cplx z = imag ? cplx(0.0, t * m) : cplx(t * m, 0.0);
      const cplx e = kind == OptimalityKind::positive_second ? second_residual(*gn, a2, n, z)
                                                             : first_error(*gn, z);
      const double v = std::abs(e) / std::pow(m, alpha);
      if (v > row.sup) {
        row.sup = v;
        row.argmax = m;
      }
    }
    row.rate = imag ? std::pow(t * t / n, alpha / 2)
                    : std::pow(t, alpha) / (kind == OptimalityKind::positive_first ? double(n) : double(n) * n);
    row.ratio = row.sup / row.rate;
    rep.c_low = std::min(rep.c_low, row.ratio);
    if (imag && alpha > 0) {
      const double upper = 4 * std::pow(d * t * t / n, alpha / 2);
      rep.upper_ok = rep.upper_ok && row.sup <= upper * (1 + 1e-9);
    }
    ns.push_back(n);
    sups.push_back(row.sup);
    rep.rows.push_back(row);
  }
  rep.fit = fit_order(ns, sups);
  rep.inconclusive = !(std::isfinite(rep.fit.r2) && rep.fit.r2 >= 0.98);
  rep.pass = !rep.inconclusive && std::abs(rep.fit.slope - rep.target) <= 0.1 && rep.c_low > 0 &&
             std::isfinite(rep.c_low) && rep.upper_ok;
  return rep;
}

// ------------------------------------------------------------------ sharpness

EulerSharpness euler_scalar_sharpness(const std::vector<unsigned>& n_grid) {
  if (n_grid.empty()) fail(Status::invalid_argument, "empty n grid");
  EulerSharpness out;
  out.limit = 2 * std::exp(-2.0);
  const double lead = 4 * std::exp(-2.0);
  CMPtr e = make_euler();
  double sxy = 0, sxx = 0;
  out.c_envelope = -kInf;
  for (unsigned n : n_grid) {
    if (n == 0) fail(Status::out_of_range, "n must be positive");
    CMPtr gn = power_scale(e, n);
    auto err = [&](double t) { return std::abs(gn->excess(t)); };
    const int scan = 400;
    double best = 0, bt = 0;
    for (int i = 1; i <= scan; ++i) {
      const double t = 20.0 * i / scan, v = err(t);
      if (v > best) {
        best = v;
        bt = t;
      }
    }
    const double lo = std::max(1e-12, bt - 20.0 / scan), hi = std::min(20.0, bt + 20.0 / scan);
    auto m = num::minimize([&](double t) { return -err(t); }, lo, hi);
    SharpnessRow row;
    row.n = n;
    row.value = std::max(best, -m.value);
    row.argmax = -m.value >= best ? m.x : bt;
    row.aux = n * row.value;
    out.rows.push_back(row);
    const double x = 1.0 / (double(n) * n), y = row.value / lead - 1 / (2.0 * n);
    sxy += x * y;
    sxx += x * x;
    out.c_envelope = std::max(out.c_envelope, y / x);
  }
  out.c_fit = sxy / sxx;
  const auto& last = out.rows.back();
  out.limit_rel_err = std::abs(last.aux - out.limit) / out.limit;
  out.pass = out.limit_rel_err <= 0.01 && std::isfinite(out.c_fit) && std::isfinite(out.c_envelope);
  return out;
}

double shift_kernel(unsigned n, double tau) {
  if (tau <= 0) return 0;
  const double x = n * tau;
  if (tau <= 1) return tau * num::gamma_p(n, x) - num::gamma_p(n + 1.0, x);
  return num::gamma_q(n + 1.0, x) - tau * num::gamma_q(n, x);
}

ShiftSharpness shift_second_order_sharpness(const std::vector<unsigned>& n_grid, unsigned check_n) {
  if (n_grid.empty()) fail(Status::invalid_argument, "empty n grid");
  ShiftSharpness out;
  out.target = 1 / (3 * std::sqrt(2 * M_PI));
  out.checked_n = check_n;
  std::vector<unsigned> grid = n_grid;
  if (std::find(grid.begin(), grid.end(), check_n) == grid.end()) grid.push_back(check_n);
  std::sort(grid.begin(), grid.end());
  bool i2_ok = true, checked = false;
  for (unsigned n : grid) {
    if (n < 2) fail(Status::out_of_range, "shift sharpness needs n ≥ 2");
    auto W = [n](double tau) { return shift_kernel(n, tau); };
    // The kernel varies on the scale 1/√n around τ = 1.
    const double w = 1 / std::sqrt(double(n));
    std::vector<double> br{0.0};
    for (double k : {-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0}) {
      const double b = 1 + k * w;
      if (b > br.back() && b < 2) br.push_back(b);
    }
    br.push_back(2.0);
    const double I1 = -num::integrate_pieces([&](double tau) { return W(tau) * std::abs(tau - 1); }, br, 1e-12).value;
    const double I2 = -num::integrate(W, 2.0, kInf, 1e-12).value;
    SharpnessRow row;
    row.n = n;
    row.value = std::pow(double(n), 1.5) * std::abs(I1);
    row.argmax = I1;
    row.aux = I2;
    row.pass = std::abs(I2) <= 2.0 / (double(n) * n);
    i2_ok = i2_ok && row.pass;
    if (n == check_n) checked = row.value >= 0.95 * out.target;
    out.rows.push_back(row);
  }
  out.pass = i2_ok && checked;
  return out;
}

}  // namespace cma
