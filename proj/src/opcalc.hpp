#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cmfunction.hpp"

namespace cma {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Structure { diagonal, diagonalizable, general };
enum class SpectrumRegion { imaginary_axis, positive_reals, right_half_plane };

const char* structure_name(Structure s);
const char* region_name(SpectrumRegion r);

// A with Re σ(A) ≥ 0, so that −A generates a bounded semigroup.
class GeneratorMatrix {
 public:
  static GeneratorMatrix diagonal(Vector lambda, SpectrumRegion region, std::string name);
  // A = V Λ V⁻¹; V is checked for invertibility and the factorization for consistency.
  static GeneratorMatrix diagonalizable(Matrix V, Vector lambda, SpectrumRegion region,
                                        std::string name);
  static GeneratorMatrix general(Matrix A, std::string name);
  // cA for c > 0, keeping the factors.
  GeneratorMatrix scaled(double c) const;
  GeneratorMatrix renamed(std::string name) const;

  const Matrix& matrix() const { return a_; }
  const Vector& eigenvalues() const { return lambda_; }
  const Matrix& V() const { return v_; }
  const Matrix& Vinv() const { return vinv_; }
  Structure structure() const { return structure_; }
  SpectrumRegion region() const { return region_; }
  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return a_.rows(); }
  bool spectral() const { return structure_ != Structure::general; }
  // V unitary (or diagonal A): then ‖f(A)‖₂ = max |f(λ)|.
  bool normal() const { return normal_; }

 private:
  GeneratorMatrix() = default;
  Matrix a_, v_, vinv_;
  Vector lambda_;
  Structure structure_ = Structure::general;
  SpectrumRegion region_ = SpectrumRegion::right_half_plane;
  std::string name_;
  bool normal_ = false;
};

GeneratorMatrix diag_imag(const std::vector<double>& s);
GeneratorMatrix diag_positive(const std::vector<double>& s);
GeneratorMatrix advection_periodic(int d);
GeneratorMatrix laplacian_dirichlet_1d(int d);
// "diag_imag:k=128,min=0.1,max=100", "diag_pos:k=128,min=1e-2,max=1e2", "advection:d=256",
// "laplacian:d=128".
GeneratorMatrix parse_generator(const std::string& spec);
std::vector<std::string> generator_names();
// V = I + 0.3·(complex Gaussian), eigenvalues with Re λ ∈ [0, 3], Im λ ∈ [−3, 3].
GeneratorMatrix random_diagonalizable(int d, std::mt19937_64& rng);

// V f(Λ) V⁻¹ for diagonalizable A.
Matrix spectral_apply(const GeneratorMatrix& A, const std::function<cplx(cplx)>& f);
// f(Λ) V⁻¹ x, then V ·.
Vector spectral_apply(const GeneratorMatrix& A, const std::function<cplx(cplx)>& f, const Vector& x);

Matrix expm(const Matrix& M);  // Padé scaling and squaring
Matrix semigroup_at(const GeneratorMatrix& A, double t);
Matrix frac_power(const GeneratorMatrix& A, double alpha);
Vector frac_power_apply(const GeneratorMatrix& A, double alpha, const Vector& x);

enum class HPPath { spectral, quadrature, rational };
const char* path_name(HPPath p);
bool hp_applicable(const CMFunction& g, const GeneratorMatrix& A, HPPath path);
// g(A) = ∫ e^{-sA} ν(ds) along the requested path.
Matrix hp_apply(const CMFunction& g, const GeneratorMatrix& A, HPPath path = HPPath::spectral);
Matrix matrix_power(const Matrix& B, unsigned n);
// g_t(tA/n)ⁿ.
Matrix scheme_apply(const ScaledFamily& family, const GeneratorMatrix& A, double t, unsigned n,
                    HPPath path = HPPath::spectral);
// (g_t(tA/n)ⁿ − e^{-tA}) x without cancellation (spectral).
Vector scheme_error_apply(const ScaledFamily& family, const GeneratorMatrix& A, double t,
                          unsigned n, const Vector& x);

double op_norm(const Matrix& M);

struct SemigroupConstants {
  double M[5] = {kNaN, kNaN, kNaN, kNaN, kNaN};  // M₀..M₄
  bool sampled = false;
  double at(int beta) const;
};
SemigroupConstants semigroup_constants(const GeneratorMatrix& A);
// sup_t ‖(tA)^β e^{-tA}‖ for arbitrary β ≥ 0.
double semigroup_constant(const GeneratorMatrix& A, double beta, bool* sampled = nullptr);

struct TestVector {
  std::string id;
  Vector x;
};
std::vector<TestVector> test_vectors(const GeneratorMatrix& A, unsigned long long seed = 0x5EED);

}  // namespace cma
