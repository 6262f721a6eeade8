#pragma once

#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "uqsd/matrix.hpp"

namespace uqsd {

/// Structured result of density-matrix validation. Never throws; residuals
/// are reported even when every check passes.
struct DensityValidation {
  bool ok = false;
  double hermiticity = 0.0;     // relative Frobenius asymmetry
  double min_eigenvalue = 0.0;  // most negative eigenvalue found
  double trace_error = 0.0;     // |Tr - 1|
  std::vector<std::string> violations;
};

inline DensityValidation validate_density(const CMat& m, const Tolerances& tol = {}) {
  DensityValidation v;
  if (m.rows() != m.cols() || m.rows() == 0) {
    v.violations.push_back("matrix is not square and nonempty");
    return v;
  }
  if (!m.allFinite()) {
    v.violations.push_back("matrix has non-finite entries");
    return v;
  }
  v.hermiticity = hermiticity_residual(m);
  if (v.hermiticity > tol.herm)
    v.violations.push_back("hermiticity residual " + std::to_string(v.hermiticity) +
                           " exceeds " + std::to_string(tol.herm));
  v.trace_error = std::abs(m.trace().real() - 1.0) + std::abs(m.trace().imag());
  if (v.trace_error > tol.trace)
    v.violations.push_back("trace deviates from 1 by " + std::to_string(v.trace_error));
  if (v.hermiticity <= tol.herm) {
    SpectralDecomposition ed = hermitian_eigen(m, Tolerances{.herm = 1.0});
    v.min_eigenvalue = ed.eigenvalues(ed.eigenvalues.size() - 1);
    if (v.min_eigenvalue < -tol.psd)
      v.violations.push_back("minimum eigenvalue " + std::to_string(v.min_eigenvalue) +
                             " below -" + std::to_string(tol.psd));
  }
  v.ok = v.violations.empty();
  return v;
}

/// Unit-trace PSD Hermitian operator. Construction validates; the stored
/// matrix is exactly what was passed in (no silent symmetrization).
class DensityMatrix {
 public:
  DensityMatrix(CMat matrix, std::string label = "", const Tolerances& tol = {})
      : matrix_(std::move(matrix)), label_(std::move(label)) {
    DensityValidation v = validate_density(matrix_, tol);
    if (!v.ok) {
      std::string what = "density '" + label_ + "':";
      for (const auto& s : v.violations) what += " " + s + ";";
      throw Error(Errc::validation_error, what);
    }
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const CMat& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

 private:
  CMat matrix_;
  std::string label_;
};

/// Unit vector in C^dim.
class PureState {
 public:
  explicit PureState(CVec amplitudes, const Tolerances& = {})
      : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0)
      throw Error(Errc::empty_input, "pure state: empty amplitude vector");
    if (!amplitudes_.allFinite())
      throw Error(Errc::validation_error, "pure state: non-finite amplitudes");
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-12)
      throw Error(Errc::validation_error,
                  "pure state: norm " + std::to_string(amplitudes_.norm()) + " is not 1");
  }

  /// Normalizes before constructing; rejects the zero vector.
  static PureState normalized(const CVec& amplitudes) {
    double n = amplitudes.norm();
    if (n == 0.0) throw Error(Errc::validation_error, "pure state: zero vector");
    return PureState(amplitudes / n);
  }

  Eigen::Index dim() const { return amplitudes_.size(); }
  const CVec& amplitudes() const { return amplitudes_; }

  DensityMatrix density(std::string label = "") const {
    CMat m = amplitudes_ * amplitudes_.adjoint();
    return DensityMatrix(hermitian_part(m), std::move(label));
  }

 private:
  CVec amplitudes_;
};

inline DensityMatrix density_from_pure(const PureState& psi, std::string label = "") {
  return psi.density(std::move(label));
}

/// Convex mixture sum_i w_i |psi_i><psi_i|. Weights must be nonnegative and
/// sum to 1 within 1e-12.
inline DensityMatrix density_from_mixture(const std::vector<double>& weights,
                                          const std::vector<PureState>& states,
                                          std::string label = "") {
  if (weights.empty() || weights.size() != states.size())
    throw Error(Errc::weight_error, "mixture: need matching, nonempty weights and states");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(Errc::weight_error, "mixture: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw Error(Errc::weight_error, "mixture: weights sum to " + std::to_string(sum));
  Eigen::Index d = states.front().dim();
  for (const auto& s : states)
    if (s.dim() != d) throw Error(Errc::dimension_mismatch, "mixture: mixed dimensions");
  CMat m = CMat::Zero(d, d);
  for (std::size_t i = 0; i < states.size(); ++i)
    m += weights[i] * (states[i].amplitudes() * states[i].amplitudes().adjoint());
  m = hermitian_part(m);
  return DensityMatrix(std::move(m), std::move(label));
}

/// Conjugation rho -> U rho U^dag by a unitary, for basis-independence tests.
inline DensityMatrix conjugated(const DensityMatrix& rho, const CMat& u) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim())
    throw Error(Errc::dimension_mismatch, "conjugated: unitary dimension mismatch");
  double unitarity = (u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).norm();
  if (unitarity > 1e-9)
    throw Error(Errc::validation_error,
                "conjugated: U^dag U deviates from identity by " + std::to_string(unitarity));
  CMat m = u * rho.matrix() * u.adjoint();
  return DensityMatrix(hermitian_part(m), rho.label());
}

/// The rank-2 triple on orthonormal axes g1, g2, g3 (embedded in dim >= 3):
///   rho1 = a1 |g1><g1| + a2 |g2><g2|
///   rho2 = b1 |g2><g2| + b2 |g3><g3|
///   rho3 = c1 |g1><g1| + c2 |g3><g3|
/// with a2 = 1-a1 etc. Every pair is discriminable, yet no single measurement
/// serves all three orderings; the verification layer exhibits why.
inline std::tuple<DensityMatrix, DensityMatrix, DensityMatrix> counterexample_states(
    double a1, double b1, double c1, Eigen::Index dim = 3) {
  if (dim < 3) throw Error(Errc::range_error, "counterexample_states: need dim >= 3");
  for (double x : {a1, b1, c1})
    if (!(x > 0.0 && x < 1.0))
      throw Error(Errc::range_error, "counterexample_states: coefficients must lie in (0,1)");
  CMat r1 = CMat::Zero(dim, dim), r2 = CMat::Zero(dim, dim), r3 = CMat::Zero(dim, dim);
  r1(0, 0) = a1;
  r1(1, 1) = 1.0 - a1;
  r2(1, 1) = b1;
  r2(2, 2) = 1.0 - b1;
  r3(0, 0) = c1;
  r3(2, 2) = 1.0 - c1;
  return {DensityMatrix(std::move(r1), "rho1"), DensityMatrix(std::move(r2), "rho2"),
          DensityMatrix(std::move(r3), "rho3")};
}

/// Wide-integer mix used to derive independent substreams from one seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Random rank-r density matrix: G G^dag / Tr(G G^dag) with G a dim x rank
/// complex Gaussian matrix. Deterministic per seed.
inline DensityMatrix random_density(Eigen::Index dim, Eigen::Index rank, std::uint64_t seed,
                                    std::string label = "") {
  if (dim < 1 || rank < 1 || rank > dim)
    throw Error(Errc::range_error, "random_density: need 1 <= rank <= dim");
  std::mt19937_64 rng(split_seed(seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat g(dim, rank);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) {
      double re = gauss(rng);
      double im = gauss(rng);
      g(i, j) = Complex(re, im);
    }
  CMat m = g * g.adjoint();
  m /= m.trace().real();
  m = hermitian_part(m);
  return DensityMatrix(std::move(m), std::move(label));
}

/// Random pure state: normalized complex Gaussian vector. Deterministic per seed.
inline PureState random_pure(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 1) throw Error(Errc::range_error, "random_pure: need dim >= 1");
  std::mt19937_64 rng(split_seed(seed, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return PureState::normalized(v);
}

/// Haar-like random unitary via QR of a complex Gaussian matrix.
inline CMat random_unitary(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 1) throw Error(Errc::range_error, "random_unitary: need dim >= 1");
  std::mt19937_64 rng(split_seed(seed, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase convention so the result is unique per seed.
  for (Eigen::Index j = 0; j < dim; ++j) {
    Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Random rank-r density matrix whose nonzero spectrum is bounded away from
/// zero (lambda_min >= lambda_max / 5). Gaussian draws can produce genuine
/// eigenvalues arbitrarily close to 0; once instances are composed, those
/// multiply across registers and sink below any noise clip, making power-law
/// and support checks meaningless at machine precision. Property runs sample
/// from this conditioned ensemble instead. Deterministic per seed.
inline DensityMatrix random_density_balanced(Eigen::Index dim, Eigen::Index rank,
                                             std::uint64_t seed, std::string label = "") {
  if (dim < 1 || rank < 1 || rank > dim)
    throw Error(Errc::range_error, "random_density_balanced: need 1 <= rank <= dim");
  std::mt19937_64 rng(split_seed(seed, 3));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(rank));
  double total = 0.0;
  for (double& x : w) {
    x = 0.25 + unif(rng);  // weight ratio within [1/5, 5] before normalization
    total += x;
  }
  CMat u = random_unitary(dim, split_seed(seed, 4));
  CMat m = CMat::Zero(dim, dim);
  for (Eigen::Index i = 0; i < rank; ++i)
    m += (w[static_cast<std::size_t>(i)] / total) * (u.col(i) * u.col(i).adjoint());
  return DensityMatrix(hermitian_part(m), std::move(label));
}

}  // namespace uqsd
