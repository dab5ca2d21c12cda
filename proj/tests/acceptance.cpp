// One PASS/FAIL line per acceptance criterion. Exit status counts failures other than the
// documented unattainable one (criterion 4: c_0 of hille diverges).
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "functionals.hpp"
#include "numerics.hpp"
#include "opcalc.hpp"
#include "rates.hpp"

using namespace cma;

namespace {

// Pinned tolerances.
constexpr double kDigammaTol = 1e-8;
constexpr double kGammaFormulaTol = 1e-8;
constexpr double kDensityTol = 1e-10;
constexpr double kDeltaNormTol = 1e-12;
constexpr double kDerivRelTol = 1e-6;
constexpr double kScalingTol = 1e-10;
constexpr double kEulerConstSlack = 1e-6;
constexpr double kNonB2Window = 0.07;
constexpr double kSecondSkew = -1.4;
constexpr double kSecondHolo = -1.85;
constexpr double kSplineTol = 1e-10;
constexpr double kPathTol = 1e-8;
const std::set<int> kUnattainable{4};

constexpr double kEulerGamma = 0.57721566490153286061;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void need(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "; first failure: " << what;
      pass = false;
    }
  }
};

// ψ(n) for integer n: −γ + H_{n−1}.
double digamma_int(unsigned n) {
  double h = 0;
  for (unsigned k = 1; k < n; ++k) h += 1.0 / k;
  return -kEulerGamma + h;
}

// c_α[gₙ] for Euler from the Gamma-ratio formula, via std::lgamma.
double euler_gamma_formula(unsigned n, double a) {
  const double e = std::lgamma(n + a) - std::lgamma(double(n)) - a * std::log(double(n));
  return -std::expm1(e) / (a * (1 - a));
}

std::vector<CMPtr> b2_builtins() {
  return {make_exp(),      make_euler(),      make_spline(), make_kendall(0.5), make_kendall(0.2),
          make_yosida(1.0), make_yosida(3.0), make_hille(),  make_chung({0.25, 0.5, 0.25})};
}

BoundContext context(const std::string& gen) {
  auto A = parse_generator(gen);
  auto v = test_vectors(A);
  return BoundContext(std::move(A), std::move(v));
}

SuiteResult suite(Suite s, const std::string& scheme, const BoundContext& ctx, std::vector<unsigned> n,
                  std::vector<double> alpha = {}) {
  SuiteConfig c;
  c.suite = s;
  c.family = parse_family(scheme);
  c.n = std::move(n);
  c.alpha = std::move(alpha);
  return run_suite(c, ctx);
}

size_t failed_reports(const SuiteResult& r) {
  size_t k = 0;
  for (const auto& x : r.reports) k += !x.pass;
  return k;
}

// k-th derivative at 0 by central differences with Richardson extrapolation in h².
double richardson_derivative(const CMFunction& g, int k, double h) {
  auto f = [&](double x) { return g.eval(cplx(x, 0)).real(); };
  auto central = [&](double s) {
    switch (k) {
      case 1: return (f(s) - f(-s)) / (2 * s);
      case 2: return (f(s) - 2 * f(0) + f(-s)) / (s * s);
      case 3: return (f(2 * s) - 2 * f(s) + 2 * f(-s) - f(-2 * s)) / (2 * s * s * s);
      default: return (f(2 * s) - 4 * f(s) + 6 * f(0) - 4 * f(-s) + f(-2 * s)) / (s * s * s * s);
    }
  };
  constexpr int L = 6;
  double T[L][L];
  for (int i = 0; i < L; ++i) {
    T[i][0] = central(h / std::pow(2.0, i));
    for (int j = 1; j <= i; ++j) {
      const double p = std::pow(4.0, j);
      T[i][j] = (p * T[i][j - 1] - T[i - 1][j - 1]) / (p - 1);
    }
  }
  return T[L - 1][L - 1];
}

// Cardinal B-spline B_k on [0, k+1] by the two-term recursion.
double bspline(int k, double x) {
  if (k == 0) return x >= 0 && x < 1 ? 1.0 : 0.0;
  return (x * bspline(k - 1, x) + (k + 1 - x) * bspline(k - 1, x - 1)) / k;
}

// ---------------------------------------------------------------------------- criteria

void c1(Outcome& o) {
  auto e = make_euler();
  double worst0 = 0, worst1 = 0, worsta = 0;
  for (unsigned n = 1; n <= 64; ++n) {
    auto en = power_scale(e, n);
    worst0 = std::max(worst0, std::abs(c_alpha_quadrature(*en, 0) - (std::log(double(n)) - digamma_int(n))));
    worst1 = std::max(worst1, std::abs(c_alpha_quadrature(*en, 1) - (digamma_int(n + 1) - std::log(double(n)))));
    for (int j = 1; j <= 9; ++j) {
      const double a = j / 10.0;
      worsta = std::max(worsta, std::abs(c_alpha_quadrature(*en, a) - euler_gamma_formula(n, a)));
    }
  }
  o.detail << "max|c0 err|=" << worst0 << " max|c1 err|=" << worst1 << " max|c_alpha err|=" << worsta;
  o.need(worst0 <= kDigammaTol && worst1 <= kDigammaTol, "digamma identity");
  o.need(worsta <= kGammaFormulaTol, "Gamma formula");
}

void c2(Outcome& o) {
  double wg = 0, wg0 = 0, wl = 0;
  for (const auto& g : b2_builtins()) {
    const double d = g->moment(2) - 1;
    const double ig = g_density(g).integrate([](double) { return 1.0; });
    const double ig0 = g0_density(g).integrate([](double) { return 1.0; });
    const auto L = functional_L(*g);
    wg = std::max(wg, std::abs(ig - d / 2));
    wg0 = std::max(wg0, std::abs(ig0 - d));
    wl = std::max(wl, std::abs(L.delta1_norm - 2 * L.L));
  }
  o.detail << "max|intG - a|=" << wg << " max|intG0 - (g''-1)|=" << wg0 << " max|D1 - 2L|=" << wl;
  o.need(wg <= kDensityTol && wg0 <= kDensityTol, "density integrals");
  o.need(wl <= kDeltaNormTol, "Delta_1 norm");
}

void c3(Outcome& o) {
  double wd = 0, wb = 0, wd0 = 0;
  for (const auto& g : b2_builtins()) {
    const double m2 = g->moment(2), m3 = g->moment(3), m4 = g->moment(4);
    for (unsigned n : {1u, 2u, 3u, 5u, 8u}) {
      auto gn = power_scale(g, n);
      const double radius = gn->analytic_radius();
      const double h = std::min(0.5, 0.2 * radius);
      for (int k = 1; k <= 4; ++k) {
        if (!std::isfinite(gn->moment(k))) continue;
        const double exact = gn->deriv0(k);
        const double fd = richardson_derivative(*gn, k, k <= 2 ? h / 2 : h);
        const double rel = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
        if (rel > wd) wd = rel;
      }
      if (g->has(kB3)) wb = std::max(wb, std::abs(b_of(*gn) * n * n - b_of(*g)));
      if (g->has(kB4)) {
        const double nn = n;
        const double formula = (m2 - 1) * (m2 - 1) / (4 * nn * nn) +
                               (-6 + 12 * m2 - 3 * m2 * m2 - 4 * m3 + m4) / (12 * nn * nn * nn);
        wd0 = std::max(wd0, std::abs(d0_of(*gn) - formula));
      }
    }
  }
  o.detail << "max rel deriv err=" << wd << " max|n^2 b[g_n] - b[g]|=" << wb << " max|d0 err|=" << wd0;
  o.need(wd <= kDerivRelTol, "derivatives");
  o.need(wb <= kScalingTol, "b scaling");
  o.need(wd0 <= kScalingTol, "d0 formula");
}

void c4(Outcome& o) {
  const std::vector<unsigned> grid{4, 8, 16, 32, 64, 128, 256};
  for (auto g : {make_euler(), make_spline(), make_hille()}) {
    const auto rep = asymptotic_c_check(g, grid, {0.0, 0.5, 1.0});
    int divergent = 0;
    for (const auto& r : rep.rows) divergent += r.divergent;
    o.detail << g->name() << ": C=" << rep.constant << (rep.bounded ? "" : " unbounded")
             << (divergent ? " (" + std::to_string(divergent) + " divergent rows)" : "") << "  ";
    o.need(rep.bounded && divergent == 0, g->name() + " residual not bounded");
    if (g->name() == "euler") {
      double c0 = 0;
      for (const auto& r : rep.rows)
        if (r.alpha == 0) c0 = std::max(c0, r.scaled_residual);
      o.detail << "euler alpha=0 C=" << c0 << "  ";
      o.need(c0 <= 1.0 / 12 + kEulerConstSlack, "euler constant above 1/12");
    }
  }
}

void c5(Outcome& o) {
  const auto ctx = context("diag_imag:k=128,min=0.1,max=100");
  size_t rows = 0, bad = 0, badfit = 0;
  double kendall_dev = 0;
  for (const char* s : {"kendall", "euler", "yosida", "spline", "hille"}) {
    const auto r = suite(Suite::first, s, ctx, dyadic(2, 12));
    rows += r.reports.size();
    bad += failed_reports(r);
    for (const auto& f : r.fits) badfit += !f.pass;
    if (std::string(s) == "kendall")
      for (const auto& rep : r.reports)
        if (rep.theorem == "first.A2") {
          size_t v = 0;
          while (ctx.vectors()[v].id != rep.vector_id) ++v;
          const double intro = rep.t * (1 - rep.t) / (2.0 * rep.n) * ctx.power_norm(v, 2);
          kendall_dev = std::max(kendall_dev, std::abs(rep.bound - intro) / std::max(intro, 1e-300));
        }
  }
  o.detail << rows << " reports, " << bad << " failed; " << badfit << " order fits outside window; kendall A2 vs t(1-t)/(2n) rel dev="
           << kendall_dev;
  o.need(bad == 0, "bound failures");
  o.need(badfit == 0, "order fits");
  o.need(kendall_dev <= 1e-12, "kendall bound");
}

void c6(Outcome& o) {
  const auto ctx = context("diag_imag:k=128,min=0.1,max=100");
  for (double gamma : {0.3, 0.5, 0.8}) {
    std::ostringstream spec;
    spec << "frac_tail:gamma=" << gamma;
    const auto r = suite(Suite::non_b2, spec.str(), ctx, dyadic(4, 14), {0.5, 1.0});
    double slope = kNaN;
    for (const auto& f : r.fits)
      if (f.tag == "nonb2.rate" && f.alpha == 1.0 && f.t == 1.0) slope = f.fit.slope;
    o.detail << "gamma=" << gamma << ": " << failed_reports(r) << "/" << r.reports.size()
             << " failed, slope=" << slope << "  ";
    o.need(failed_reports(r) == 0, "bounds");
    o.need(std::abs(slope + gamma / 2) <= kNonB2Window, "rate");
  }
}

void c7(Outcome& o) {
  const auto skew = context("diag_imag:k=128,min=0.1,max=100");
  double worst = -kInf;
  size_t bad = 0, rows = 0;
  for (const char* s : {"euler", "spline", "kendall", "yosida", "hille"}) {
    const auto r = suite(Suite::second, s, skew, dyadic(2, 12));
    rows += r.reports.size();
    bad += failed_reports(r);
    for (const auto& f : r.fits)
      if (!f.fit.exact) worst = std::max(worst, f.fit.slope);
  }
  o.detail << "skew: " << bad << "/" << rows << " failed, worst slope=" << worst;
  o.need(bad == 0 && worst <= kSecondSkew, "skew second order");
  double worst_h = -kInf;
  size_t bad_h = 0, rows_h = 0;
  for (const char* gen : {"laplacian:d=128", "diag_pos:k=128,min=1e-2,max=1e2"}) {
    const auto ctx = context(gen);
    for (const char* s : {"euler", "spline"}) {
      const auto r = suite(Suite::holo2, s, ctx, dyadic(2, 12));
      rows_h += r.reports.size();
      bad_h += failed_reports(r);
      for (const auto& f : r.fits)
        if (!f.fit.exact) worst_h = std::max(worst_h, f.fit.slope);
    }
  }
  o.detail << "; holomorphic: " << bad_h << "/" << rows_h << " failed, worst slope=" << worst_h;
  o.need(bad_h == 0 && worst_h <= kSecondHolo, "holomorphic second order");
}

void c8(Outcome& o) {
  for (const char* gen : {"laplacian:d=128", "diag_pos:k=128,min=1e-2,max=1e2"}) {
    const auto ctx = context(gen);
    const double M0 = ctx.M(0), M1 = ctx.M(1), M2 = ctx.M(2);
    o.need(std::abs(M0 - 1) <= 1e-12 && std::abs(M1 - std::exp(-1.0)) <= 1e-12 &&
               std::abs(M2 - 4 * std::exp(-2.0)) <= 1e-12,
           std::string(gen) + " constants");
    std::set<std::string> seen;
    size_t bad = 0, rows = 0;
    for (const char* s : {"euler", "spline", "kendall", "yosida", "hille"}) {
      const auto r = suite(Suite::holo, s, ctx, dyadic(2, 12), {0.0, 0.25, 0.5, 0.75, 1.0});
      rows += r.reports.size();
      bad += failed_reports(r);
      for (const auto& rep : r.reports) seen.insert(rep.theorem);
      if (std::string(s) == "euler") {
        std::set<double> alphas;
        for (const auto& rep : r.reports)
          if (rep.theorem == "holo.euler") alphas.insert(rep.alpha);
        o.need(alphas.size() == 5, "euler sharp bound missing an alpha");
      }
    }
    o.detail << gen << ": M=(" << M0 << "," << M1 << "," << M2 << ") " << bad << "/" << rows << " failed  ";
    o.need(bad == 0, std::string(gen) + " bounds");
    for (const char* tag : {"holo.x", "holo.Ax", "holo.frac", "holo.sharp", "holo.euler"})
      o.need(seen.count(tag) == 1, std::string("no rows for ") + tag);
  }
}

void c9(Outcome& o) {
  const auto s = euler_scalar_sharpness(dyadic(0, 14));
  o.detail << "n*sup at n=2^14: " << s.rows.back().aux << " vs 2e^-2=" << s.limit << " (rel " << s.limit_rel_err
           << "), c_fit=" << s.c_fit;
  o.need(s.limit_rel_err <= 0.01, "limit");
  o.need(std::isfinite(s.c_fit), "next-order coefficient");
}

void c10(Outcome& o) {
  auto e = parse_family("euler");
  const auto n = dyadic(4, 16);
  struct Case {
    OptimalityKind k;
    std::vector<double> a;
  };
  for (const auto& c : {Case{OptimalityKind::imaginary_first, {0.5, 1.0, 1.5, 2.0}},
                        Case{OptimalityKind::positive_first, {0.0, 0.5, 1.0}},
                        Case{OptimalityKind::positive_second, {0.0, 0.5, 1.0}}})
    for (double a : c.a) {
      const auto r = optimality_lower(*e, c.k, 1.0, a, n);
      o.detail << optimality_name(c.k) << " a=" << a << ": " << r.fit.slope << " (target " << r.target << ")"
               << (r.inconclusive ? " inconclusive" : "") << "  ";
      o.need(r.pass, std::string(optimality_name(c.k)) + " exponent");
    }
}

void c11(Outcome& o) {
  const auto s = shift_second_order_sharpness(dyadic(1, 10), 1024);
  double worst = 0, at = kNaN;
  for (const auto& r : s.rows) {
    worst = std::max(worst, double(r.n) * r.n * std::abs(r.aux));
    if (r.n == 1024) at = r.value;
  }
  o.detail << "max n^2|I2|=" << worst << " (<= 2), n^1.5|I1| at 1024=" << at << " (>= 0.95*" << s.target << ")";
  o.need(s.pass, "shift sharpness");
}

void c12(Outcome& o) {
  auto g = make_spline();
  double worst = 0;
  for (int n = 1; n <= 8; ++n)
    for (double z : {0.1, 1.0, 10.0}) {
      std::vector<double> knots;
      for (int k = 0; k <= n; ++k) knots.push_back(k);
      const double q = num::integrate_pieces([&](double s) { return std::exp(-2 * z * s) * bspline(n - 1, s); }, knots,
                                             1e-14)
                           .value;
      const double direct = std::pow(g->eval(z), n);
      worst = std::max(worst, std::abs(q - direct));
    }
  o.detail << "max|quadrature - g^n|=" << worst;
  o.need(worst <= kSplineTol, "spline identity");
}

void c13(Outcome& o) {
  std::mt19937_64 rng(0xC0FFEE);
  double worst_q = 0, worst_r = 0;
  int rational = 0;
  const std::vector<CMPtr> fs{make_euler(),      make_spline(), make_kendall(0.3),
                              make_yosida(1.5), make_hille(),  make_chung({0.25, 0.5, 0.25})};
  for (int m = 0; m < 20; ++m) {
    const int d = 3 + m % 8;
    const auto A = random_diagonalizable(d, rng);
    for (const auto& g : fs) {
      const Matrix s = hp_apply(*g, A, HPPath::spectral);
      const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
      worst_q = std::max(worst_q, (hp_apply(*g, A, HPPath::quadrature) - s).cwiseAbs().maxCoeff() / scale);
      if (hp_applicable(*g, A, HPPath::rational)) {
        ++rational;
        worst_r = std::max(worst_r, (hp_apply(*g, A, HPPath::rational) - s).cwiseAbs().maxCoeff() / scale);
      }
    }
  }
  o.detail << "20 matrices x " << fs.size() << " functions: quadrature dev=" << worst_q << ", rational dev=" << worst_r
           << " (" << rational << " rational cases)";
  o.need(worst_q <= kPathTol && worst_r <= kPathTol, "path disagreement");
  o.need(rational >= 40, "rational path not exercised");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"Euler digamma and Gamma-formula identities", c1},
      {"density and moment identities", c2},
      {"power-scaling derivatives, b and d0 scaling", c3},
      {"c_alpha asymptotics bounded", c4},
      {"first-order bound suite", c5},
      {"non-B2 suite and rate", c6},
      {"second-order suites", c7},
      {"holomorphic suite", c8},
      {"Euler sharp constant", c9},
      {"optimality exponents", c10},
      {"shift second-order sharpness", c11},
      {"B-spline identity", c12},
      {"operator-calculus cross-validation", c13},
  };
  int unexpected = 0, id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass && !kUnattainable.count(id)) ++unexpected;
    if (o.pass && kUnattainable.count(id)) std::printf("note: criterion %d now passes; drop it from the unattainable set\n", id);
  }
  return unexpected;
}
