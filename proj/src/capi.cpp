#include "cmapprox/cmapprox.h"

#include <new>
#include <random>
#include <string>

#include "experiment.hpp"
#include "functionals.hpp"

struct cma_function {
  cma::CMPtr g;
};
struct cma_generator {
  cma::GeneratorMatrix A;
};
struct cma_result {
  cma::ExperimentResult r;
  std::vector<std::string> csv;
  std::string json;
};

namespace {

thread_local std::string last_error;

template <class F>
cma_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return CMA_OK;
  } catch (const cma::Error& e) {
    last_error = e.what();
    return static_cast<cma_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CMA_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CMA_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) cma::fail(cma::Status::invalid_argument, std::string(what) + " is null");
}

cma_result* wrap(cma::ExperimentResult r) {
  auto* out = new cma_result{std::move(r), {}, {}};
  for (const auto& t : out->r.tables) out->csv.push_back(cma::to_csv(t));
  out->json = cma::to_json(out->r);
  return out;
}

}  // namespace

extern "C" {

const char* cma_status_name(cma_status s) { return cma::status_name(static_cast<cma::Status>(s)); }

const char* cma_last_error(void) { return last_error.c_str(); }

cma_status cma_function_create(const char* spec, cma_function** out) {
  return guard([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new cma_function{cma::parse_function(spec)};
  });
}

cma_status cma_function_power_scale(const cma_function* g, unsigned n, cma_function** out) {
  return guard([&] {
    need(g, "function");
    need(out, "out");
    *out = new cma_function{cma::power_scale(g->g, n)};
  });
}

void cma_function_free(cma_function* g) { delete g; }

const char* cma_function_name(const cma_function* g) { return g ? g->g->name().c_str() : ""; }

unsigned cma_function_tags(const cma_function* g) { return g ? g->g->tags() : 0u; }

cma_status cma_function_eval(const cma_function* g, double re, double im, double* out_re, double* out_im) {
  return guard([&] {
    need(g, "function");
    need(out_re, "out_re");
    const cma::cplx v = im == 0 ? cma::cplx(g->g->eval(re)) : g->g->eval(cma::cplx(re, im));
    *out_re = v.real();
    if (out_im) *out_im = v.imag();
  });
}

cma_status cma_function_moment(const cma_function* g, int k, double* out) {
  return guard([&] {
    need(g, "function");
    need(out, "out");
    *out = g->g->moment(k);
  });
}

cma_status cma_functional(const cma_function* g, cma_functional_kind kind, double alpha, double* out) {
  return guard([&] {
    need(g, "function");
    need(out, "out");
    const cma::CMFunction& f = *g->g;
    switch (kind) {
      case CMA_FUNCTIONAL_L: *out = cma::functional_L(f).L; break;
      case CMA_FUNCTIONAL_A: *out = cma::a_of(f); break;
      case CMA_FUNCTIONAL_B: *out = cma::b_of(f); break;
      case CMA_FUNCTIONAL_C_ALPHA_QUADRATURE: *out = cma::c_alpha_quadrature(f, alpha); break;
      case CMA_FUNCTIONAL_C_ALPHA_DENSITY: *out = cma::c_alpha_density(g->g, alpha); break;
      case CMA_FUNCTIONAL_D0: *out = cma::d0_of(f); break;
      case CMA_FUNCTIONAL_D1: *out = cma::d1_of(f); break;
      default: cma::fail(cma::Status::invalid_argument, "unknown functional kind");
    }
  });
}

cma_status cma_euler_c_alpha(unsigned n, double alpha, double* out) {
  return guard([&] {
    need(out, "out");
    *out = cma::euler_c_alpha_exact(n, alpha);
  });
}

cma_status cma_generator_create(const char* spec, cma_generator** out) {
  return guard([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new cma_generator{cma::parse_generator(spec)};
  });
}

cma_status cma_generator_random(int d, unsigned long long seed, cma_generator** out) {
  return guard([&] {
    need(out, "out");
    if (d < 1 || d > 512) cma::fail(cma::Status::out_of_range, "dimension must be in [1, 512]");
    std::mt19937_64 rng(seed);
    *out = new cma_generator{cma::random_diagonalizable(d, rng)};
  });
}

void cma_generator_free(cma_generator* A) { delete A; }

size_t cma_generator_dim(const cma_generator* A) { return A ? size_t(A->A.dim()) : 0; }

cma_status cma_generator_eigenvalues(const cma_generator* A, double* re, double* im, size_t cap) {
  return guard([&] {
    need(A, "generator");
    need(re, "re");
    need(im, "im");
    const auto& l = A->A.eigenvalues();
    if (!A->A.spectral()) cma::fail(cma::Status::unsupported, "generator has no stored eigen-decomposition");
    if (cap < size_t(l.size())) cma::fail(cma::Status::out_of_range, "eigenvalue buffer too small");
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      re[i] = l[i].real();
      im[i] = l[i].imag();
    }
  });
}

cma_status cma_semigroup_constant(const cma_generator* A, double beta, double* out) {
  return guard([&] {
    need(A, "generator");
    need(out, "out");
    *out = cma::semigroup_constant(A->A, beta);
  });
}

cma_status cma_hp_apply(const cma_function* g, const cma_generator* A, cma_path path, double* out, size_t cap) {
  return guard([&] {
    need(g, "function");
    need(A, "generator");
    need(out, "out");
    const auto d = size_t(A->A.dim());
    if (cap < 2 * d * d) cma::fail(cma::Status::out_of_range, "output buffer too small");
    if (path < CMA_PATH_SPECTRAL || path > CMA_PATH_RATIONAL)
      cma::fail(cma::Status::invalid_argument, "unknown path");
    const cma::Matrix M = cma::hp_apply(*g->g, A->A, static_cast<cma::HPPath>(path));
    for (size_t j = 0; j < d; ++j)
      for (size_t i = 0; i < d; ++i) {
        out[2 * (j * d + i)] = M(i, j).real();
        out[2 * (j * d + i) + 1] = M(i, j).imag();
      }
  });
}

cma_status cma_run(const char* config_json, cma_result** out) {
  return guard([&] {
    need(config_json, "config");
    need(out, "out");
    *out = wrap(cma::run_experiment(cma::parse_config(config_json)));
  });
}

cma_status cma_aggregate(const char* const* csv_texts, size_t count, cma_result** out) {
  return guard([&] {
    need(out, "out");
    if (count) need(csv_texts, "csv_texts");
    std::vector<std::string> texts;
    for (size_t i = 0; i < count; ++i) {
      need(csv_texts[i], "csv text");
      texts.emplace_back(csv_texts[i]);
    }
    *out = wrap(cma::aggregate_reports(texts));
  });
}

int cma_result_passed(const cma_result* r) { return r && r->r.passed ? 1 : 0; }

size_t cma_result_table_count(const cma_result* r) { return r ? r->r.tables.size() : 0; }

const char* cma_result_table_name(const cma_result* r, size_t i) {
  return r && i < r->r.tables.size() ? r->r.tables[i].name.c_str() : nullptr;
}

const char* cma_result_csv(const cma_result* r, size_t i) {
  return r && i < r->csv.size() ? r->csv[i].c_str() : nullptr;
}

const char* cma_result_json(const cma_result* r) { return r ? r->json.c_str() : nullptr; }

void cma_result_free(cma_result* r) { delete r; }

}  // extern "C"
