#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "opcalc.hpp"

namespace cma {

// error ≤ bound·(1 + rel) + abs
struct SlackPolicy {
  double rel = 1e-9;
  double abs = 1e-13;
  bool passes(double error, double bound) const { return error <= bound * (1 + rel) + abs; }
};

struct BoundReport {
  std::string scheme;
  std::string generator;
  double t = kNaN;
  unsigned n = 0;
  double alpha = kNaN;
  std::string vector_id;
  double error = kNaN;
  double bound = kNaN;
  double slack = kNaN;  // bound − error
  std::string theorem;
  bool pass = false;
};

BoundReport make_report(std::string scheme, std::string generator, double t, unsigned n,
                        double alpha, std::string vector_id, double error, double bound,
                        std::string theorem, const SlackPolicy& slack = {});
// (scheme, generator, t, n, alpha, vector id, theorem)
bool report_order(const BoundReport& a, const BoundReport& b);

struct OrderFit {
  std::vector<double> n;
  std::vector<double> error;
  double slope = kNaN;
  double intercept = kNaN;
  double r2 = kNaN;
  int used = 0;
  bool exact = false;  // every error below the noise floor
};
// Least squares on (log n, log error) over points with error > 1e2·eps·reference.
OrderFit fit_order(const std::vector<double>& n, const std::vector<double>& error,
                   double reference = 1.0);

struct OrderCheck {
  std::string tag;
  std::string scheme;
  std::string generator;
  double t = kNaN;
  double alpha = kNaN;
  OrderFit fit;
  double lo = -kInf;  // slope window
  double hi = kInf;
  bool pass = false;
};

enum class Suite { first, non_b2, second, holo, holo2 };
const char* suite_name(Suite s);
Suite parse_suite(const std::string& s);

// Generator data shared by all grid points: semigroup constants, ‖A^α x‖ per test vector.
class BoundContext {
 public:
  BoundContext(GeneratorMatrix A, std::vector<TestVector> vectors);
  const GeneratorMatrix& A() const { return A_; }
  const std::vector<TestVector>& vectors() const { return vectors_; }
  double M(double beta) const;
  double power_norm(size_t vector, double alpha) const;  // ‖A^α x‖
  // ‖f(A)x‖ for every test vector x.
  std::vector<double> apply_norms(const std::function<cplx(cplx)>& f) const;

 private:
  GeneratorMatrix A_;
  std::vector<TestVector> vectors_;
  std::vector<Vector> coeffs_;  // V⁻¹x
  mutable std::mutex mu_;
  mutable std::map<double, double> m_cache_;
  mutable std::map<std::pair<size_t, double>, double> norm_cache_;
};

struct SuiteConfig {
  Suite suite = Suite::first;
  FamilyPtr family;
  std::vector<double> t{0.25, 1.0, 4.0};
  std::vector<unsigned> n;
  std::vector<double> alpha;
  unsigned jobs = 0;  // 0 = hardware concurrency
  SlackPolicy slack;
};

struct SuiteResult {
  std::vector<BoundReport> reports;
  std::vector<OrderCheck> fits;
  std::vector<std::string> notes;  // skipped grid points and why
  bool ok() const;
};

std::vector<unsigned> dyadic(unsigned lo_exp, unsigned hi_exp);

SuiteResult run_suite(const SuiteConfig& cfg, const BoundContext& ctx);

// Scalar error functions used by the bound suites and fits.
// gₙ(z) − e^{-z}
cplx first_error(const CMFunction& gn, cplx z);
// gₙ(z) − e^{-z} − a₂/n · z² e^{-z}, a₂ = (g''(0) − 1)/2 of the unscaled g
cplx second_residual(const CMFunction& gn, double a2, unsigned n, cplx z);

// Lower-bound experiments on a dense scalar spectrum.
enum class OptimalityKind { imaginary_first, positive_first, positive_second };
const char* optimality_name(OptimalityKind k);

struct OptimalityRow {
  unsigned n = 0;
  double sup = kNaN;     // sup over the grid of |λ|^{-α}|error(tλ)|
  double argmax = kNaN;  // |λ| attaining it
  double rate = kNaN;    // claimed rate
  double ratio = kNaN;   // sup / rate
};

struct OptimalityReport {
  OptimalityKind kind{};
  std::string scheme;
  double t = kNaN;
  double alpha = kNaN;
  int grid_count = 0;
  double grid_min = kNaN;
  double grid_max = kNaN;
  std::vector<OptimalityRow> rows;
  OrderFit fit;
  double target = kNaN;  // claimed exponent
  double c_low = kNaN;   // min ratio over the grid
  bool upper_ok = true;  // imaginary case: sup ≤ 4((g''−1) t²/n)^{α/2}
  bool inconclusive = false;
  bool pass = false;
};

// Default moduli: imaginary 1e-2..1e4, positive 1e-3..1e3, 2401 log-spaced points.
std::vector<double> optimality_grid(OptimalityKind k);
OptimalityReport optimality_lower(const ScaledFamily& family, OptimalityKind kind, double t,
                                  double alpha, const std::vector<unsigned>& n_grid,
                                  const std::vector<double>& moduli = {});

struct SharpnessRow {
  unsigned n = 0;
  double value = kNaN;   // sup_t |(1+t/n)^{-n} − e^{-t}| or n^{3/2}|I₁|
  double argmax = kNaN;  // maximizing t (Euler) or I₁ (shift)
  double aux = kNaN;     // n·sup (Euler) or I₂ (shift)
  bool pass = true;
};

struct EulerSharpness {
  std::vector<SharpnessRow> rows;
  double limit = kNaN;        // 2e^{-2}
  double c_fit = kNaN;        // least squares next-order coefficient
  double c_envelope = kNaN;   // max over the grid
  double limit_rel_err = kNaN;  // at the largest n
  bool pass = false;
};
// sup over t ∈ (0, 20] by a coarse scan then Brent refinement.
EulerSharpness euler_scalar_sharpness(const std::vector<unsigned>& n_grid);

struct ShiftSharpness {
  std::vector<SharpnessRow> rows;  // value = n^{3/2}|I₁|, argmax = I₁, aux = I₂
  double target = kNaN;            // lower limit 1/(3√(2π))
  unsigned checked_n = 0;
  bool pass = false;
};
// W(τ) = E(τ − Y)⁺ for τ ≤ 1 and E(Y − τ)⁺ for τ > 1, Y ~ Gamma(n, rate n).
double shift_kernel(unsigned n, double tau);
ShiftSharpness shift_second_order_sharpness(const std::vector<unsigned>& n_grid,
                                            unsigned check_n = 1024);

}  // namespace cma
