#include <doctest.h>

#include <cmath>

#include "functionals.hpp"
#include "numerics.hpp"

using namespace cma;

namespace {
constexpr double kEulerGamma = 0.57721566490153286061;
}

TEST_CASE("G density of the reference functions") {
  auto gd = g_density(make_euler());
  for (double s : {0.1, 0.5, 0.9}) CHECK(gd(s) == doctest::Approx(s - 1 + std::exp(-s)).epsilon(1e-13));
  for (double s : {1.5, 4.0}) CHECK(gd(s) == doctest::Approx(std::exp(-s)).epsilon(1e-13));
  auto kd = g_density(make_kendall(0.5));
  CHECK(kd(0.5) == doctest::Approx(0.25));
  CHECK(kd(1.0) == doctest::Approx(0.5));
  CHECK(kd(1.5) == doctest::Approx(0.25));
  CHECK(kd(3.0) == 0.0);
  auto xd = g_density(make_exp());
  for (double s : {0.5, 1.0, 2.0}) CHECK(xd(s) == 0.0);
}

TEST_CASE("G shape: zero at 0, peak at 1, continuous, monotone pieces") {
  for (auto g : {make_euler(), make_spline(), make_kendall(0.3), make_hille(), make_yosida(2.0)}) {
    INFO(g->name());
    auto G = g_density(g);
    CHECK(G(0.0) == doctest::Approx(0.0));
    CHECK(G(1.0 - 1e-9) == doctest::Approx(G(1.0 + 1e-9)).epsilon(1e-6));
    CHECK(G(1.0) <= 1.0);
    double prev = 0;
    for (double s = 0.05; s <= 1.0; s += 0.05) {
      CHECK(G(s) >= prev - 1e-14);
      prev = G(s);
    }
    prev = G(1.0);
    for (double s = 1.05; s < 6; s += 0.25) {
      CHECK(G(s) <= prev + 1e-14);
      prev = G(s);
    }
  }
}

TEST_CASE("density and moment identities") {
  for (auto g : {make_euler(), make_spline(), make_kendall(0.5), make_hille(), make_yosida(1.0)}) {
    INFO(g->name());
    const double d = g->moment(2) - 1;
    CHECK(g_density(g).integrate([](double) { return 1.0; }) == doctest::Approx(d / 2).epsilon(1e-10));
    CHECK(g0_density(g).integrate([](double) { return 1.0; }) == doctest::Approx(d).epsilon(1e-10));
    const auto L = functional_L(*g);
    CHECK(L.delta1_norm == doctest::Approx(2 * L.L).epsilon(1e-12));
  }
  CHECK(g0_density(make_spline()).integrate([](double) { return 1.0; }) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("delta and L") {
  CHECK(delta(*make_euler(), 0, 1.0) == doctest::Approx(0.5 - std::exp(-1.0)));
  CHECK(delta(*make_euler(), 2, 1e-6) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(delta(*make_exp(), 1, 2.0) == 0.0);
  CHECK(functional_L(*make_euler()).L == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(functional_L(*make_spline()).L == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(functional_L(*make_exp()).L == 0.0);
  // Fourier path versus the measure path.
  for (auto g : {make_euler(), make_spline()})
    CHECK(delta1_norm_fourier(*g) == doctest::Approx(functional_L(*g).delta1_norm).epsilon(1e-6));
}

TEST_CASE("L bounds dominate the exact value") {
  auto e = make_euler();
  for (unsigned n : {1u, 4u, 16u}) {
    auto en = power_scale(e, n);
    const auto b = L_scaled_bound(*e, n);
    CHECK(b.value >= functional_L(*en).L);
  }
  const auto bx = L_scaled_bound(*make_exp(), 8);
  CHECK(std::isfinite(bx.value));
}

TEST_CASE("c_alpha for Euler: digamma oracle, Gamma formula, both paths") {
  CHECK(euler_c_alpha_exact(1, 0) == doctest::Approx(kEulerGamma).epsilon(1e-14));
  CHECK(euler_c_alpha_exact(1, 1) == doctest::Approx(1 - kEulerGamma).epsilon(1e-14));
  CHECK(euler_c_alpha_exact(1, 0.5) == doctest::Approx(4 - 2 * std::sqrt(M_PI)).epsilon(1e-13));
  auto e = make_euler();
  for (unsigned n : {1u, 3u, 10u}) {
    auto en = power_scale(e, n);
    for (double a : {0.0, 0.3, 0.5, 1.0}) {
      INFO("n=" << n << " alpha=" << a);
      CHECK(c_alpha_quadrature(*en, a) == doctest::Approx(euler_c_alpha_exact(n, a)).epsilon(1e-9));
    }
  }
  CHECK(c_alpha_density(e, 0.5) == doctest::Approx(euler_c_alpha_exact(1, 0.5)).epsilon(1e-10));
  CHECK(c_alpha_quadrature(*make_exp(), 0.5) == 0.0);
}

TEST_CASE("c_alpha upper envelope for Euler") {
  for (unsigned n = 1; n <= 64; n *= 2)
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double lim = a <= 0.5 ? 1 / (2.0 * n) + (1 - 2 * a) / (12.0 * n * n) : 1 / (2.0 * n);
      CHECK(euler_c_alpha_exact(n, a) <= lim + 1e-12);
    }
}

TEST_CASE("b, d0, d1") {
  auto e = make_euler();
  CHECK(b_of(*e) == doctest::Approx(-1.0 / 3).epsilon(1e-12));
  CHECK(d0_of(*e) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(b_density(e) == doctest::Approx(-1.0 / 3).epsilon(1e-10));
  CHECK(d0_density(e) == doctest::Approx(0.75).epsilon(1e-10));
  for (unsigned n : {2u, 5u, 9u}) CHECK(b_of(*power_scale(e, n)) * n * n == doctest::Approx(-1.0 / 3).epsilon(1e-10));
  auto x = make_exp();
  CHECK(b_of(*x) == 0.0);
  CHECK(d0_of(*x) == 0.0);
  CHECK(d1_of(*x) == 0.0);
  // d1 = c0 − c1 − b; against the density path
  CHECK(d1_of(*e) == doctest::Approx(d1_density(e)).epsilon(1e-9));
}

TEST_CASE("c_alpha divergence is reported, not silently wrong") {
  auto h = make_hille();
  CHECK_FALSE(c_alpha_finite(*h, 0));
  try {
    c_alpha_quadrature(*h, 0);
    FAIL("expected divergence");
  } catch (const Error& err) {
    CHECK(err.code() == Status::divergent);
  }
  CHECK(c_alpha_finite(*h, 0.5));
}

TEST_CASE("asymptotics of c_alpha") {
  auto rep = asymptotic_c_check(make_euler(), {4, 8, 16, 32, 64, 128, 256}, {0.0});
  CHECK(rep.bounded);
  CHECK(rep.constant <= 1.0 / 12 + 1e-6);
  auto zero = asymptotic_c_check(make_exp(), {4, 8, 16, 32}, {0.0, 0.5});
  CHECK(zero.constant == doctest::Approx(0.0));
}

TEST_CASE("s_g integrates to the drop in g") {
  // s_g = (g + g')/z; for Euler, g + g' = z/(1+z)², so s_g = 1/(1+z)² and ∫ = 1.
  CHECK(s_g(*make_euler(), 2.0) == doctest::Approx(1.0 / 9));
  CHECK(s_g_integral(*make_euler()) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("polynomial rate for a fractional tail") {
  auto rep = check_polynomial_rate(make_frac_tail(0.5), 0.5, num::logspace(1e-2, 1e3, 40), num::logspace(1e-2, 1e3, 40),
                                   {16, 64, 256, 1024});
  CHECK(rep.consistent);
  CHECK(std::isfinite(rep.c1));
  CHECK(std::isfinite(rep.c3));
}
