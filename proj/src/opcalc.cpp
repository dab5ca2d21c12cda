#include "opcalc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "numerics.hpp"
#include "params.hpp"

namespace cma {

const char* structure_name(Structure s) {
  switch (s) {
    case Structure::diagonal: return "diagonal";
    case Structure::diagonalizable: return "diagonalizable";
    case Structure::general: return "general";
  }
  return "?";
}

const char* region_name(SpectrumRegion r) {
  switch (r) {
    case SpectrumRegion::imaginary_axis: return "imaginary_axis";
    case SpectrumRegion::positive_reals: return "positive_reals";
    case SpectrumRegion::right_half_plane: return "right_half_plane";
  }
  return "?";
}

const char* path_name(HPPath p) {
  switch (p) {
    case HPPath::spectral: return "spectral";
    case HPPath::quadrature: return "quadrature";
    case HPPath::rational: return "rational";
  }
  return "?";
}

namespace {

void check_spectrum(const Vector& lambda, const std::string& name) {
  double scale = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (!std::isfinite(lambda[i].real()) || !std::isfinite(lambda[i].imag()) ||
        lambda[i].real() < -1e-12 * std::max(scale, 1.0))
      fail(Status::out_of_range, name + ": eigenvalue with negative real part");
}

}  // namespace

GeneratorMatrix GeneratorMatrix::diagonal(Vector lambda, SpectrumRegion region, std::string name) {
  check_spectrum(lambda, name);
  GeneratorMatrix g;
  const auto d = lambda.size();
  g.a_ = lambda.asDiagonal();
  g.v_ = Matrix::Identity(d, d);
  g.vinv_ = g.v_;
  g.lambda_ = std::move(lambda);
  g.structure_ = Structure::diagonal;
  g.region_ = region;
  g.name_ = std::move(name);
  g.normal_ = true;
  return g;
}

GeneratorMatrix GeneratorMatrix::diagonalizable(Matrix V, Vector lambda, SpectrumRegion region,
                                                std::string name) {
  if (V.rows() != V.cols() || V.rows() != lambda.size())
    fail(Status::invalid_argument, name + ": factor dimensions disagree");
  check_spectrum(lambda, name);
  Eigen::FullPivLU<Matrix> lu(V);
  if (!lu.isInvertible()) fail(Status::invalid_argument, name + ": V is singular");
  GeneratorMatrix g;
  g.vinv_ = lu.inverse();
  g.a_ = V * lambda.asDiagonal() * g.vinv_;
  // Consistency of the stored factorization.
  const double na = std::max(g.a_.norm(), 1e-300);
  if ((V * lambda.asDiagonal() - g.a_ * V).norm() > 1e-10 * na * std::max(1.0, V.norm()))
    fail(Status::numeric_failure, name + ": V is too ill-conditioned");
  const auto d = V.rows();
  g.normal_ = (V.adjoint() * V - Matrix::Identity(d, d)).norm() <= 1e-12 * d;
  g.v_ = std::move(V);
  g.lambda_ = std::move(lambda);
  g.structure_ = Structure::diagonalizable;
  g.region_ = region;
  g.name_ = std::move(name);
  return g;
}

GeneratorMatrix GeneratorMatrix::general(Matrix A, std::string name) {
  if (A.rows() != A.cols()) fail(Status::invalid_argument, name + ": matrix is not square");
  Eigen::ComplexEigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) fail(Status::numeric_failure, name + ": eigensolver failed");
  GeneratorMatrix g;
  g.lambda_ = es.eigenvalues();
  const double scale = std::max(A.norm(), 1.0);
  for (Eigen::Index i = 0; i < g.lambda_.size(); ++i)
    if (g.lambda_[i].real() < -1e-10 * scale)
      fail(Status::out_of_range, name + ": eigenvalue with negative real part");
  g.a_ = std::move(A);
  g.structure_ = Structure::general;
  g.region_ = SpectrumRegion::right_half_plane;
  g.name_ = std::move(name);
  return g;
}

GeneratorMatrix GeneratorMatrix::renamed(std::string name) const {
  GeneratorMatrix g = *this;
  g.name_ = std::move(name);
  return g;
}

GeneratorMatrix GeneratorMatrix::scaled(double c) const {
  if (!(c > 0)) fail(Status::out_of_range, "scale factor must be positive");
  GeneratorMatrix g = *this;
  g.a_ *= c;
  g.lambda_ *= c;
  return g;
}

GeneratorMatrix diag_imag(const std::vector<double>& s) {
  Vector l(s.size());
  for (size_t i = 0; i < s.size(); ++i) l[i] = cplx(0.0, s[i]);
  return GeneratorMatrix::diagonal(l, SpectrumRegion::imaginary_axis, "diag_imag");
}

GeneratorMatrix diag_positive(const std::vector<double>& s) {
  Vector l(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0)) fail(Status::out_of_range, "diag_pos: entries must be positive");
    l[i] = s[i];
  }
  return GeneratorMatrix::diagonal(l, SpectrumRegion::positive_reals, "diag_pos");
}

GeneratorMatrix advection_periodic(int d) {
  if (d < 2) fail(Status::out_of_range, "advection: d must be at least 2");
  // (Ax)_j = d(x_j − x_{j+1}) with periodic wrap; diagonalized by the unitary DFT.
  Matrix V(d, d);
  Vector l(d);
  const double inv = 1.0 / std::sqrt(double(d));
  for (int k = 0; k < d; ++k) {
    const double th = 2 * M_PI * k / d;
    l[k] = -double(d) * num::expm1(cplx(0.0, th));
    // Phase from the reduced integer jk mod d, so large d does not drift.
    for (int j = 0; j < d; ++j) V(j, k) = std::polar(inv, 2 * M_PI * double((long long)j * k % d) / d);
  }
  return GeneratorMatrix::diagonalizable(V, l, SpectrumRegion::right_half_plane, "advection");
}

GeneratorMatrix laplacian_dirichlet_1d(int d) {
  if (d < 2) fail(Status::out_of_range, "laplacian: d must be at least 2");
  Matrix V(d, d);
  Vector l(d);
  const double h = M_PI / (d + 1), c = std::sqrt(2.0 / (d + 1));
  for (int k = 1; k <= d; ++k) {
    const double s = std::sin(k * h / 2);
    l[k - 1] = 4 * s * s;  // 2 − 2cos(kh) without cancellation
    for (int j = 1; j <= d; ++j) V(j - 1, k - 1) = c * std::sin(double((long long)j * k % (2 * (d + 1))) * h);
  }
  return GeneratorMatrix::diagonalizable(V, l, SpectrumRegion::positive_reals, "laplacian");
}

namespace {

int int_param(const ParamMap& p, const char* key, int fallback, const std::string& spec) {
  double v = scalar_param(p, key, fallback, spec);
  if (v != std::floor(v) || v < 2 || v > 4096)
    fail(Status::out_of_range, std::string(key) + " must be an integer in [2, 4096] in '" + spec + "'");
  return int(v);
}

}  // namespace

GeneratorMatrix parse_generator(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const auto p = parse_params(rest, spec);
  if (head == "diag_imag" || head == "diag_pos") {
    expect_keys(p, {"k", "min", "max"}, spec);
    const int k = int_param(p, "k", 128, spec);
    const double lo = scalar_param(p, "min", head == "diag_imag" ? 0.1 : 1e-2, spec);
    const double hi = scalar_param(p, "max", head == "diag_imag" ? 100.0 : 1e2, spec);
    if (!(lo > 0 && hi > lo)) fail(Status::out_of_range, "need 0 < min < max in '" + spec + "'");
    const auto s = num::logspace(lo, hi, k);
    return (head == "diag_imag" ? diag_imag(s) : diag_positive(s)).renamed(spec);
  }
  if (head == "advection") {
    expect_keys(p, {"d"}, spec);
    return advection_periodic(int_param(p, "d", 256, spec)).renamed(spec);
  }
  if (head == "laplacian") {
    expect_keys(p, {"d"}, spec);
    return laplacian_dirichlet_1d(int_param(p, "d", 128, spec)).renamed(spec);
  }
  std::string names;
  for (const auto& n : generator_names()) names += " " + n;
  fail(Status::parse, "unknown generator '" + spec + "'; available:" + names);
}

std::vector<std::string> generator_names() {
  return {"diag_imag", "diag_pos", "advection", "laplacian"};
}

GeneratorMatrix random_diagonalizable(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> re(0.0, 3.0), im(-3.0, 3.0);
  Matrix V = Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) V(i, j) += 0.3 * cplx(n01(rng), n01(rng));
  Vector l(d);
  for (int i = 0; i < d; ++i) l[i] = cplx(re(rng), im(rng));
  return GeneratorMatrix::diagonalizable(V, l, SpectrumRegion::right_half_plane, "random");
}

Matrix spectral_apply(const GeneratorMatrix& A, const std::function<cplx(cplx)>& f) {
  if (!A.spectral()) fail(Status::unsupported, "spectral evaluation needs a diagonalizable matrix");
  const auto& l = A.eigenvalues();
  Vector fl(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) fl[i] = f(l[i]);
  if (A.structure() == Structure::diagonal) return fl.asDiagonal();
  return A.V() * fl.asDiagonal() * A.Vinv();
}

Vector spectral_apply(const GeneratorMatrix& A, const std::function<cplx(cplx)>& f, const Vector& x) {
  if (!A.spectral()) fail(Status::unsupported, "spectral evaluation needs a diagonalizable matrix");
  const auto& l = A.eigenvalues();
  Vector y = A.structure() == Structure::diagonal ? x : Vector(A.Vinv() * x);
  for (Eigen::Index i = 0; i < l.size(); ++i) y[i] *= f(l[i]);
  if (A.structure() == Structure::diagonal) return y;
  return A.V() * y;
}

Matrix expm(const Matrix& M) {
  Matrix E = M.exp();
  if (!E.allFinite()) fail(Status::numeric_failure, "matrix exponential overflowed");
  return E;
}

Matrix semigroup_at(const GeneratorMatrix& A, double t) {
  if (!(t >= 0)) fail(Status::out_of_range, "semigroup_at: t must be nonnegative");
  const auto d = A.dim();
  if (t == 0) return Matrix::Identity(d, d);
  if (A.spectral()) return spectral_apply(A, [t](cplx l) { return std::exp(-t * l); });
  return expm(-t * A.matrix());
}

namespace {

cplx principal_power(cplx l, double alpha) {
  if (alpha == 0) return 1.0;
  if (l == cplx(0.0)) return 0.0;
  return std::exp(alpha * std::log(l));
}

void check_frac(const GeneratorMatrix& A, double alpha) {
  if (!(alpha >= 0 && alpha <= 4)) fail(Status::out_of_range, "frac_power: alpha must be in [0, 4]");
  if (!A.spectral()) fail(Status::unsupported, "frac_power: unsupported structure (general)");
  if (alpha == 0)
    for (Eigen::Index i = 0; i < A.eigenvalues().size(); ++i)
      if (A.eigenvalues()[i] == cplx(0.0))
        fail(Status::out_of_range, "frac_power: zero eigenvalue needs alpha > 0");
}

}  // namespace

Matrix frac_power(const GeneratorMatrix& A, double alpha) {
  check_frac(A, alpha);
  return spectral_apply(A, [alpha](cplx l) { return principal_power(l, alpha); });
}

Vector frac_power_apply(const GeneratorMatrix& A, double alpha, const Vector& x) {
  check_frac(A, alpha);
  return spectral_apply(A, [alpha](cplx l) { return principal_power(l, alpha); }, x);
}

bool hp_applicable(const CMFunction& g, const GeneratorMatrix& A, HPPath path) {
  switch (path) {
    case HPPath::spectral: return A.spectral();
    case HPPath::quadrature: return g.measure() && g.measure()->tails().empty();
    case HPPath::rational: return g.resolvent_form().has_value();
  }
  return false;
}

namespace {

double spectral_radius_bound(const GeneratorMatrix& A) {
  if (A.eigenvalues().size() == 0) return 0;
  return A.spectral() ? A.eigenvalues().cwiseAbs().maxCoeff() : A.matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

// Upper end beyond which |p(s)| e^{-rs} is below 1e-18 of its peak.
double effective_end(const PolyExpSegment& seg) {
  if (std::isfinite(seg.b)) return seg.b;
  const double step = 1.0 / seg.rate;
  double peak = 0, s = seg.a;
  for (int i = 0; i < 100000; ++i, s += step) {
    double v = std::abs(poly_eval(seg.poly, s)) * std::exp(-seg.rate * s);
    peak = std::max(peak, v);
    if (s > seg.a + 40 * step && v < 1e-18 * peak) return s;
    if (peak == 0 && s > seg.a + 40 * step) return s;
  }
  fail(Status::numeric_failure, "density segment decays too slowly for matrix quadrature");
}

Matrix hp_quadrature(const CMFunction& g, const GeneratorMatrix& A) {
  const PositiveMeasure& nu = *g.measure();
  const auto d = A.dim();
  const Matrix& M = A.matrix();
  Matrix out = Matrix::Zero(d, d);
  for (const auto& at : nu.atoms()) out += at.w * expm(-at.s * M);
  const double rho = spectral_radius_bound(A);
  // 20-point Gauss–Legendre panels whose width keeps the phase/decay change per panel ≤ 2.
  const auto& gl = boost::math::quadrature::gauss<double, 20>::abscissa();
  const auto& gw = boost::math::quadrature::gauss<double, 20>::weights();
  for (const auto& seg : nu.segments()) {
    const double b = effective_end(seg);
    const double width = std::min(1.0, 2.0 / std::max(rho + std::abs(seg.rate), 1e-300));
    const int panels = std::max(1, int(std::ceil((b - seg.a) / width)));
    const double h = (b - seg.a) / panels;
    // e^{-hA/2 · x} at the 20 Gauss nodes of one panel, then shifted by e^{-hA} per panel.
    std::vector<std::pair<double, double>> nodes;
    for (size_t i = 0; i < gl.size(); ++i) {
      nodes.push_back({gl[i], gw[i]});
      if (gl[i] != 0) nodes.push_back({-gl[i], gw[i]});
    }
    std::vector<Matrix> local;
    for (const auto& [x, w] : nodes) local.push_back(expm(-(h / 2) * (1 + x) * M));
    const Matrix step = expm(-h * M);
    Matrix shift = expm(-seg.a * M);
    for (int p = 0; p < panels; ++p) {
      const double lo = seg.a + p * h;
      Matrix panel = Matrix::Zero(d, d);
      for (size_t i = 0; i < nodes.size(); ++i) {
        const double s = lo + (h / 2) * (1 + nodes[i].first);
        const double dens = poly_eval(seg.poly, s) * std::exp(-seg.rate * s);
        panel += (nodes[i].second * dens * h / 2) * local[i];
      }
      out += shift * panel;
      shift = shift * step;
    }
  }
  return out;
}

Matrix hp_rational(const ResolventForm& f, const GeneratorMatrix& A) {
  const auto d = A.dim();
  const Matrix I = Matrix::Identity(d, d);
  // R = t(tI + A/power)^{-1}
  Eigen::PartialPivLU<Matrix> lu(f.t * I + A.matrix() / double(f.power));
  const Matrix R = lu.solve(f.t * I);
  Matrix P = f.a.back() * I;
  for (size_t k = f.a.size() - 1; k-- > 0;) P = P * R + f.a[k] * I;
  return matrix_power(P, f.power);
}

}  // namespace

Matrix hp_apply(const CMFunction& g, const GeneratorMatrix& A, HPPath path) {
  if (!hp_applicable(g, A, path))
    fail(Status::unsupported, std::string("hp_apply: path '") + path_name(path) + "' does not apply to " +
                                  g.name() + " on " + A.name());
  switch (path) {
    case HPPath::spectral: return spectral_apply(A, [&g](cplx l) { return g.eval(l); });
    case HPPath::quadrature: return hp_quadrature(g, A);
    case HPPath::rational: return hp_rational(*g.resolvent_form(), A);
  }
  fail(Status::internal, "hp_apply: bad path");
}

Matrix matrix_power(const Matrix& B, unsigned n) {
  Matrix result = Matrix::Identity(B.rows(), B.cols());
  Matrix base = B;
  while (n) {
    if (n & 1u) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

Matrix scheme_apply(const ScaledFamily& family, const GeneratorMatrix& A, double t, unsigned n,
                    HPPath path) {
  if (!(t > 0) || n == 0) fail(Status::out_of_range, "scheme_apply: need t > 0 and n ≥ 1");
  if (!family.valid(t)) fail(Status::out_of_range, family.name() + ": t outside the family's range");
  CMPtr g = family.at(t);
  if (path == HPPath::spectral) {
    CMPtr gn = power_scale(g, n);
    return spectral_apply(A, [&gn, t](cplx l) { return gn->eval(t * l); });
  }
  return matrix_power(hp_apply(*g, A.scaled(t / n), path), n);
}

Vector scheme_error_apply(const ScaledFamily& family, const GeneratorMatrix& A, double t,
                          unsigned n, const Vector& x) {
  if (!(t > 0) || n == 0) fail(Status::out_of_range, "scheme_error_apply: need t > 0 and n ≥ 1");
  if (!family.valid(t)) fail(Status::out_of_range, family.name() + ": t outside the family's range");
  CMPtr gn = power_scale(family.at(t), n);
  return spectral_apply(A, [&gn, t](cplx l) { return gn->excess(t * l); }, x);
}

double op_norm(const Matrix& M) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

double SemigroupConstants::at(int beta) const {
  if (beta < 0 || beta > 4) fail(Status::out_of_range, "semigroup constant index must be 0..4");
  return M[beta];
}

double semigroup_constant(const GeneratorMatrix& A, double beta, bool* sampled) {
  if (!(beta >= 0)) fail(Status::out_of_range, "semigroup constant needs beta ≥ 0");
  if (sampled) *sampled = false;
  if (A.normal()) {
    if (beta == 0) return 1.0;
    double m = 0;
    const auto& l = A.eigenvalues();
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const double r = std::abs(l[i]), re = l[i].real();
      if (r == 0) continue;
      if (re <= 0) return kInf;
      // sup_t (t r)^β e^{-t re} = (r/re)^β (β/e)^β
      m = std::max(m, std::pow(r / re * beta / M_E, beta));
    }
    return m;
  }
  if (sampled) *sampled = true;
  const bool integer = beta == std::floor(beta);
  if (!integer && !A.spectral())
    fail(Status::unsupported, "fractional semigroup constant needs a diagonalizable matrix");
  double m = beta == 0 ? 1.0 : 0.0;  // t = 0 contributes the identity for β = 0
  for (double t : num::logspace(1e-6, 1e6, 512)) {
    Matrix T;
    if (A.spectral()) {
      T = spectral_apply(A, [t, beta](cplx l) { return principal_power(t * l, beta) * std::exp(-t * l); });
    } else {
      T = matrix_power(t * A.matrix(), unsigned(beta)) * expm(-t * A.matrix());
    }
    m = std::max(m, op_norm(T));
  }
  return m;
}

SemigroupConstants semigroup_constants(const GeneratorMatrix& A) {
  SemigroupConstants c;
  for (int b = 0; b <= 4; ++b) {
    bool s = false;
    c.M[b] = semigroup_constant(A, b, &s);
    c.sampled = c.sampled || s;
  }
  return c;
}

std::vector<TestVector> test_vectors(const GeneratorMatrix& A, unsigned long long seed) {
  const auto d = A.dim();
  std::vector<TestVector> out;
  auto unit = [](Vector v) {
    const double n = v.norm();
    return n > 0 ? Vector(v / n) : v;
  };
  out.push_back({"ones", unit(Vector::Ones(d))});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  for (int k = 1; k <= 5; ++k) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = cplx(n01(rng), n01(rng));
    out.push_back({"rand" + std::to_string(k), unit(v)});
  }
  Matrix V;
  Vector l;
  if (A.spectral()) {
    V = A.V();
    l = A.eigenvalues();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(A.matrix());
    V = es.eigenvectors();
    l = es.eigenvalues();
  }
  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(l[a]) < std::abs(l[b]); });
  out.push_back({"eig_min", unit(V.col(order[0]))});
  Vector mix = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) mix += V.col(order[j]) / double(1 + j);
  out.push_back({"eig_mix", unit(mix)});
  return out;
}

}  // namespace cma
