#include <doctest.h>

#include <cmapprox/cmapprox.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

TEST_CASE("functions through the C API") {
  cma_function* g = nullptr;
  REQUIRE(cma_function_create("euler", &g) == CMA_OK);
  CHECK(std::string(cma_function_name(g)) == "euler");
  CHECK((cma_function_tags(g) & CMA_TAG_B4) != 0);
  double re = 0, im = 0;
  CHECK(cma_function_eval(g, 0.0, 1.0, &re, &im) == CMA_OK);
  CHECK(re == doctest::Approx(0.5));
  CHECK(im == doctest::Approx(-0.5));
  double m2 = 0;
  CHECK(cma_function_moment(g, 2, &m2) == CMA_OK);
  CHECK(m2 == doctest::Approx(2.0));

  cma_function* g4 = nullptr;
  REQUIRE(cma_function_power_scale(g, 4, &g4) == CMA_OK);
  double cq = 0, ce = 0;
  CHECK(cma_functional(g4, CMA_FUNCTIONAL_C_ALPHA_QUADRATURE, 0.5, &cq) == CMA_OK);
  CHECK(cma_euler_c_alpha(4, 0.5, &ce) == CMA_OK);
  CHECK(cq == doctest::Approx(ce).epsilon(1e-9));
  double b = 0;
  CHECK(cma_functional(g4, CMA_FUNCTIONAL_B, 0, &b) == CMA_OK);
  CHECK(b * 16 == doctest::Approx(-1.0 / 3).epsilon(1e-10));
  double L = 0;
  CHECK(cma_functional(g, CMA_FUNCTIONAL_L, 0, &L) == CMA_OK);
  CHECK(L == doctest::Approx(std::exp(-1.0)));
  cma_function_free(g4);
  cma_function_free(g);
}

TEST_CASE("errors carry status codes and messages") {
  cma_function* g = nullptr;
  CHECK(cma_function_create("nope", &g) == CMA_PARSE);
  CHECK(g == nullptr);
  CHECK(std::string(cma_last_error()).find("available") != std::string::npos);
  CHECK(cma_function_create(nullptr, &g) == CMA_INVALID_ARGUMENT);
  CHECK(cma_function_create("kendall:t=3", &g) == CMA_OUT_OF_RANGE);
  REQUIRE(cma_function_create("hille", &g) == CMA_OK);
  double c = 0;
  CHECK(cma_functional(g, CMA_FUNCTIONAL_C_ALPHA_QUADRATURE, 0.0, &c) == CMA_DIVERGENT);
  CHECK(std::string(cma_status_name(CMA_DIVERGENT)).size() > 0);
  CHECK(cma_function_eval(g, 1.0, 0.0, nullptr, nullptr) == CMA_INVALID_ARGUMENT);
  cma_function_free(g);
  cma_function_free(nullptr);
  cma_generator_free(nullptr);
  cma_result_free(nullptr);
}

TEST_CASE("generators and hp_apply") {
  cma_generator* A = nullptr;
  REQUIRE(cma_generator_create("laplacian:d=3", &A) == CMA_OK);
  REQUIRE(cma_generator_dim(A) == 3);
  double re[3], im[3];
  CHECK(cma_generator_eigenvalues(A, re, im, 3) == CMA_OK);
  std::vector<double> ev(re, re + 3);
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(2 - std::sqrt(2.0)));
  CHECK(cma_generator_eigenvalues(A, re, im, 2) == CMA_OUT_OF_RANGE);
  double M1 = 0;
  CHECK(cma_semigroup_constant(A, 1, &M1) == CMA_OK);
  CHECK(M1 == doctest::Approx(std::exp(-1.0)));
  cma_generator_free(A);

  cma_generator* R = nullptr;
  REQUIRE(cma_generator_random(5, 42, &R) == CMA_OK);
  cma_function* g = nullptr;
  REQUIRE(cma_function_create("euler", &g) == CMA_OK);
  std::vector<double> s(50), q(50), r(50);
  CHECK(cma_hp_apply(g, R, CMA_PATH_SPECTRAL, s.data(), s.size()) == CMA_OK);
  CHECK(cma_hp_apply(g, R, CMA_PATH_QUADRATURE, q.data(), q.size()) == CMA_OK);
  CHECK(cma_hp_apply(g, R, CMA_PATH_RATIONAL, r.data(), r.size()) == CMA_OK);
  for (size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(s[i] - q[i]) < 1e-8);
    CHECK(std::abs(s[i] - r[i]) < 1e-8);
  }
  CHECK(cma_hp_apply(g, R, CMA_PATH_SPECTRAL, s.data(), 10) == CMA_OUT_OF_RANGE);
  cma_function_free(g);
  cma_generator_free(R);
}

TEST_CASE("experiments through the C API") {
  cma_result* r = nullptr;
  const char* cfg =
      R"({"suite": "first", "scheme": "euler", "generator": "diag_imag:k=8,min=0.1,max=100", "n": [4, 8, 16, 32], "t": [1]})";
  REQUIRE(cma_run(cfg, &r) == CMA_OK);
  CHECK(cma_result_passed(r) == 1);
  REQUIRE(cma_result_table_count(r) == 3);
  CHECK(std::string(cma_result_table_name(r, 0)) == "reports");
  const std::string csv = cma_result_csv(r, 0);
  CHECK(csv.rfind("scheme,generator,t,n,alpha,vector,error,bound,slack,theorem,pass\n", 0) == 0);
  CHECK(std::string(cma_result_json(r)).find("\"passed\": true") != std::string::npos);
  CHECK(cma_result_csv(r, 9) == nullptr);

  cma_result* again = nullptr;
  REQUIRE(cma_run(cfg, &again) == CMA_OK);
  CHECK(csv == cma_result_csv(again, 0));

  const char* texts[] = {cma_result_csv(r, 0), cma_result_csv(r, 1)};
  cma_result* agg = nullptr;
  REQUIRE(cma_aggregate(texts, 2, &agg) == CMA_OK);
  CHECK(cma_result_passed(agg) == 1);
  const std::string summary = cma_result_csv(agg, 0);
  CHECK(summary.find("first.A1,") != std::string::npos);
  CHECK(summary.find("first.order,") != std::string::npos);
  cma_result_free(agg);
  cma_result_free(again);
  cma_result_free(r);

  CHECK(cma_run(R"({"suite": "first", "scheme": "euler", "n": []})", &r) == CMA_INVALID_ARGUMENT);
  CHECK(cma_run(R"({"suite": "first", "scheme": "euler", "bogus": 1})", &r) == CMA_PARSE);
  CHECK(cma_run("not json", &r) == CMA_PARSE);
  CHECK(cma_run(R"({"suite": "holo", "scheme": "euler", "generator": "diag_imag:k=8"})", &r) == CMA_REQUIRES_CLASS);
  const char* bad[] = {"a,b\n1,2\n"};
  CHECK(cma_aggregate(bad, 1, &agg) == CMA_PARSE);
}
