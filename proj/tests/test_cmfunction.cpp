#include <doctest.h>

#include <cmath>

#include "cmfunction.hpp"
#include "numerics.hpp"

using namespace cma;

namespace {
std::vector<CMPtr> builtins() {
  return {make_exp(),   make_euler(),         make_spline(),         make_kendall(0.5), make_kendall(0.2),
          make_yosida(1.0), make_yosida(4.0), make_hille(),          make_chung({0.25, 0.5, 0.25}),
          make_frac_tail(0.5)};
}

// Five-point central difference of g at z for derivative order k.
double fd(const CMFunction& g, double z, int k, double h) {
  auto f = [&](double x) { return g.eval(x); };
  switch (k) {
    case 1: return (f(z - 2 * h) - 8 * f(z - h) + 8 * f(z + h) - f(z + 2 * h)) / (12 * h);
    case 2: return (-f(z - 2 * h) + 16 * f(z - h) - 30 * f(z) + 16 * f(z + h) - f(z + 2 * h)) / (12 * h * h);
  }
  return kNaN;
}
}  // namespace

TEST_CASE("normalization g(0) = 1, g'(0) = -1 for every built-in") {
  for (const auto& g : builtins()) {
    INFO(g->name());
    CHECK(g->eval(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g->deriv0(1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(check_b1(*g));
  }
}

TEST_CASE("closed forms and the measure path agree") {
  auto e = make_euler();
  CHECK(e->eval(1.0) == doctest::Approx(0.5));
  CHECK(std::abs(e->eval_imag(1.0) - cplx(0.5, -0.5)) < 1e-15);
  auto x = make_exp();
  CHECK(std::abs(x->eval_imag(M_PI) - cplx(-1, 0)) < 1e-15);
  auto k = make_kendall(0.5);
  CHECK(k->eval(1.0) == doctest::Approx(0.5 + 0.5 * std::exp(-2.0)));
  CHECK(std::abs(k->eval_imag(M_PI) - cplx(1, 0)) < 1e-14);
  CHECK(k->moment(2) == doctest::Approx(2.0));
  auto s = make_spline();
  CHECK(s->eval(0.7) == doctest::Approx(-std::expm1(-1.4) / 1.4).epsilon(1e-14));
  auto y = make_yosida(2.0);
  CHECK(y->eval(3.0) == doctest::Approx(std::exp(-6.0 / 5.0)).epsilon(1e-14));

  for (const auto& g : builtins()) {
    if (!g->measure()) continue;
    INFO(g->name());
    for (double z : {0.05, 0.9, 6.0}) {
      CHECK(g->measure()->laplace(z) == doctest::Approx(g->eval(z)).epsilon(1e-11));
      const cplx w(z, 2 * z);
      CHECK(std::abs(g->measure()->laplace(w) - g->eval(w)) < 1e-11);
    }
  }
}

TEST_CASE("moments: derivative relation and class tags") {
  CHECK(make_euler()->moment(2) == doctest::Approx(2.0));
  CHECK(make_euler()->moment(4) == doctest::Approx(24.0));
  CHECK(make_spline()->moment(2) == doctest::Approx(4.0 / 3));
  CHECK(make_kendall(0.25)->moment(2) == doctest::Approx(4.0));
  CHECK(make_kendall(0.5)->moment(4) == doctest::Approx(8.0));
  for (const auto& g : builtins()) {
    INFO(g->name());
    for (int j = 0; j <= 4; ++j)
      if (std::isfinite(g->moment(j))) CHECK(g->deriv0(j) == doctest::Approx(std::pow(-1.0, j) * g->moment(j)));
    if (g->has(kB4)) CHECK(g->has(kB3));
    if (g->has(kB3)) CHECK(g->has(kB2));
    if (g->has(kB2)) {
      CHECK(g->has(kB1));
      CHECK(g->moment(2) >= 1.0 - 1e-14);
    }
  }
  CHECK(make_exp()->moment(2) == 1.0);
  CHECK(check_bk(*make_euler(), 4));
  auto f = make_frac_tail(0.5);
  CHECK(check_b1(*f));
  CHECK_FALSE(check_bk(*f, 2));
  CHECK(check_bk(*make_exp(), 4));
}

TEST_CASE("derivatives match finite differences away from zero") {
  for (const auto& g : builtins()) {
    INFO(g->name());
    for (double z : {0.3, 2.0}) {
      CHECK(g->deriv(z, 1) == doctest::Approx(fd(*g, z, 1, 1e-3)).epsilon(1e-8));
      CHECK(g->deriv(z, 2) == doctest::Approx(fd(*g, z, 2, 1e-2)).epsilon(1e-5));
    }
  }
}

TEST_CASE("power scaling") {
  auto e = make_euler();
  auto e2 = power_scale(e, 2);
  CHECK(e2->eval(1.0) == doctest::Approx(std::pow(1.5, -2)));
  CHECK(e2->moment(2) == doctest::Approx(1.5));
  auto s4 = power_scale(make_spline(), 4);
  CHECK(s4->moment(2) == doctest::Approx(13.0 / 12));
  auto x7 = power_scale(make_exp(), 7);
  for (double z : {0.1, 3.0}) CHECK(x7->eval(z) == doctest::Approx(std::exp(-z)));
  // gₙ = g(z/n)ⁿ at a complex point
  auto h = make_hille();
  auto h5 = power_scale(h, 5);
  const cplx w(0.4, 3.0);
  CHECK(std::abs(h5->eval(w) - std::pow(h->eval(w / 5.0), 5)) < 1e-13);
  // Large n stays accurate: (1 + z/n)^{-n} → e^{-z}
  auto big = power_scale(e, 1u << 20);
  CHECK(big->excess(1.0) == doctest::Approx(std::exp(-1.0) / (2.0 * (1u << 20))).epsilon(1e-4));
  CHECK_THROWS_AS(power_scale(e, 0), Error);
}

TEST_CASE("polynomial tail: 1 + g'(1/n) decays like n^-gamma") {
  for (double gamma : {0.3, 0.5, 0.8}) {
    auto f = make_frac_tail(gamma);
    std::vector<double> x, y;
    // The correction is relative O(n^{γ-1}); fit far out so γ = 0.8 is resolved.
    for (int k = 24; k <= 40; k += 2) {
      const double n = std::ldexp(1.0, k);
      x.push_back(std::log(n));
      y.push_back(std::log(1 + f->deriv(1.0 / n, 1)));
    }
    CHECK(num::least_squares(x, y).slope == doctest::Approx(-gamma).epsilon(0.05));
  }
}

TEST_CASE("families and parsing") {
  auto k = kendall_family();
  CHECK(k->valid(0.5));
  CHECK_FALSE(k->valid(4.0));
  // t-indexed Kendall: g_t''(0) = 1/t, so (g''−1)t²/2 = t(1−t)/2.
  for (double t : {0.25, 0.5, 1.0})
    CHECK((k->at(t)->moment(2) - 1) * t * t / 2 == doctest::Approx(t * (1 - t) / 2));
  CHECK(parse_function("kendall:t=0.25")->moment(2) == doctest::Approx(4.0));
  CHECK(parse_function("chung:a=0.25,0.5,0.25")->eval(0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_function("chung:a=0.5,0.6"), Error);
  CHECK_THROWS_AS(parse_function("kendall:t=2"), Error);
  CHECK_THROWS_AS(parse_function("kendall:s=1"), Error);
  try {
    parse_function("nope");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::parse);
    CHECK(std::string(e.what()).find("euler") != std::string::npos);
  }
}
