#ifndef CMAPPROX_H
#define CMAPPROX_H

#include <stddef.h>

#if defined(CMA_BUILDING_LIBRARY)
#define CMA_API __attribute__((visibility("default")))
#else
#define CMA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cma_status {
  CMA_OK = 0,
  CMA_INVALID_ARGUMENT = 1,
  CMA_OUT_OF_RANGE = 2,
  CMA_DIVERGENT = 3,
  CMA_REQUIRES_MEASURE = 4,
  CMA_REQUIRES_CLASS = 5,
  CMA_UNSUPPORTED = 6,
  CMA_LIMIT_UNDEFINED = 7,
  CMA_NUMERIC_FAILURE = 8,
  CMA_IO = 9,
  CMA_PARSE = 10,
  CMA_INTERNAL = 11
} cma_status;

/* Class membership bits returned by cma_function_tags. */
enum { CMA_TAG_BM = 1, CMA_TAG_B1 = 2, CMA_TAG_B2 = 4, CMA_TAG_B3 = 8, CMA_TAG_B4 = 16 };

typedef enum cma_functional_kind {
  CMA_FUNCTIONAL_L = 0,
  CMA_FUNCTIONAL_A = 1,
  CMA_FUNCTIONAL_B = 2,
  CMA_FUNCTIONAL_C_ALPHA_QUADRATURE = 3,
  CMA_FUNCTIONAL_C_ALPHA_DENSITY = 4,
  CMA_FUNCTIONAL_D0 = 5,
  CMA_FUNCTIONAL_D1 = 6
} cma_functional_kind;

typedef enum cma_path { CMA_PATH_SPECTRAL = 0, CMA_PATH_QUADRATURE = 1, CMA_PATH_RATIONAL = 2 } cma_path;

typedef struct cma_function cma_function;
typedef struct cma_generator cma_generator;
typedef struct cma_result cma_result;

CMA_API const char* cma_status_name(cma_status s);
/* Message of the last failed call on this thread; "" if none. */
CMA_API const char* cma_last_error(void);

/* "euler", "spline", "hille", "exp", "kendall:t=0.5", "yosida:t=1", "chung:a=...",
   "frac_tail:gamma=0.5", "measure:<file>". */
CMA_API cma_status cma_function_create(const char* spec, cma_function** out);
/* g_n(z) = g(z/n)^n */
CMA_API cma_status cma_function_power_scale(const cma_function* g, unsigned n, cma_function** out);
CMA_API void cma_function_free(cma_function* g);
CMA_API const char* cma_function_name(const cma_function* g);
CMA_API unsigned cma_function_tags(const cma_function* g);
CMA_API cma_status cma_function_eval(const cma_function* g, double re, double im, double* out_re,
                                     double* out_im);
CMA_API cma_status cma_function_moment(const cma_function* g, int k, double* out);
/* alpha is read by the c_alpha kinds only. */
CMA_API cma_status cma_functional(const cma_function* g, cma_functional_kind kind, double alpha,
                                  double* out);
CMA_API cma_status cma_euler_c_alpha(unsigned n, double alpha, double* out);

/* "diag_imag:k=128,min=0.1,max=100", "diag_pos:k=128,min=1e-2,max=1e2", "advection:d=256",
   "laplacian:d=128". */
CMA_API cma_status cma_generator_create(const char* spec, cma_generator** out);
/* Random diagonalizable matrix of size d drawn from seed. */
CMA_API cma_status cma_generator_random(int d, unsigned long long seed, cma_generator** out);
CMA_API void cma_generator_free(cma_generator* A);
CMA_API size_t cma_generator_dim(const cma_generator* A);
CMA_API cma_status cma_generator_eigenvalues(const cma_generator* A, double* re, double* im, size_t cap);
/* sup_t ||(tA)^beta e^{-tA}|| */
CMA_API cma_status cma_semigroup_constant(const cma_generator* A, double beta, double* out);
/* g(A), column-major, interleaved (re, im); cap counts doubles and must be >= 2 d^2. */
CMA_API cma_status cma_hp_apply(const cma_function* g, const cma_generator* A, cma_path path, double* out,
                                size_t cap);

/* Runs a JSON experiment config; see README for the schema. */
CMA_API cma_status cma_run(const char* config_json, cma_result** out);
/* Pass/fail per theorem tag over CSV texts produced by cma_run. */
CMA_API cma_status cma_aggregate(const char* const* csv_texts, size_t count, cma_result** out);
CMA_API int cma_result_passed(const cma_result* r);
CMA_API size_t cma_result_table_count(const cma_result* r);
CMA_API const char* cma_result_table_name(const cma_result* r, size_t i);
/* CSV text of table i; owned by r. */
CMA_API const char* cma_result_csv(const cma_result* r, size_t i);
CMA_API const char* cma_result_json(const cma_result* r);
CMA_API void cma_result_free(cma_result* r);

#ifdef __cplusplus
}
#endif

#endif
