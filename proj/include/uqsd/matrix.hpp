#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace uqsd {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Numerical tolerances shared across the library. All checks that accept a
/// Tolerances argument are overridable per call; defaults are the contract
/// the test suite pins.
struct Tolerances {
  double herm = 1e-9;       // relative Frobenius asymmetry allowed in "Hermitian" inputs
  double psd = 1e-9;        // absolute slack on the minimum eigenvalue of PSD operators
  double trace = 1e-9;      // absolute slack on unit-trace checks
  double recon = 1e-9;      // relative reconstruction error of eigendecompositions
  double sqrt = 1e-9;       // relative error allowed in S*S vs the rooted operator
  double orth = 1e-9;       // eigenvector orthonormality slack
  double rank = 1e-9;       // relative singular-value cutoff for numerical rank
  double clip_rel = 1e-10;  // eigenvalues below clip_rel * lambda_max are treated as 0
};

namespace limits {
/// Hard cap on the dimension of any single composed matrix. Tensor products
/// that would exceed it refuse to materialize.
inline constexpr std::size_t kDefaultDimCap = 4096;
/// Fidelities below this count as exactly orthogonal states.
inline constexpr double kFidelityZero = 1e-12;
/// Relative floor separating eigensolver noise from genuine spectrum weight.
/// Composed instances multiply eigenvalues across registers, so their genuine
/// spectra can sit far below the support-detection clip; fidelity sums sqrt's
/// of eigenvalues, which amplifies anything wrongly dropped or kept. Solver
/// backward error is ~dim * machine-epsilon * lambda_max, a few 1e-13 at the
/// dimensions composition reaches, so 1e-12 zeroes noise with margin while
/// preserving small genuine weight.
inline constexpr double kSpectrumNoiseRel = 1e-12;
}  // namespace limits

enum class Errc {
  not_hermitian,
  not_psd,
  dimension_mismatch,
  dimension_overflow,
  weight_error,
  range_error,
  not_feasible,
  overlapping_supports,
  not_commuting,
  degenerate_overlap,
  invalid_povm,
  numerical_failure,
  empty_input,
  precondition_failed,
  validation_error,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::not_psd: return "NotPsd";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::dimension_overflow: return "DimensionOverflow";
    case Errc::weight_error: return "WeightError";
    case Errc::range_error: return "RangeError";
    case Errc::not_feasible: return "NotFeasible";
    case Errc::overlapping_supports: return "OverlappingSupports";
    case Errc::not_commuting: return "NotCommuting";
    case Errc::degenerate_overlap: return "DegenerateOverlap";
    case Errc::invalid_povm: return "InvalidPovm";
    case Errc::numerical_failure: return "NumericalFailure";
    case Errc::empty_input: return "EmptyInput";
    case Errc::precondition_failed: return "PreconditionFailed";
    case Errc::validation_error: return "ValidationError";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline double frobenius(const CMat& a) { return a.norm(); }

/// Relative Frobenius asymmetry ||H - H^dag|| / ||H||; 0 for the zero matrix.
inline double hermiticity_residual(const CMat& h) {
  double n = h.norm();
  if (n == 0.0) return 0.0;
  return (h - h.adjoint()).norm() / n;
}

inline bool is_hermitian(const CMat& h, double tol_herm = Tolerances{}.herm) {
  return h.rows() == h.cols() && hermiticity_residual(h) <= tol_herm;
}

/// Exactly Hermitian projection (h + h^dag)/2 into fresh storage. Never write
/// the result back through an expression like h = h + h.adjoint(): Eigen
/// evaluates that coefficient-wise, reading entries already overwritten.
inline CMat hermitian_part(const CMat& h) {
  CMat out = 0.5 * (h + h.adjoint());
  return out;
}

inline void require_square(const CMat& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(Errc::dimension_mismatch,
                std::string(who) + ": expected a nonempty square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void require_finite(const CMat& m, const char* who) {
  if (!m.allFinite())
    throw Error(Errc::validation_error, std::string(who) + ": matrix has non-finite entries");
}

/// Eigenvalues sorted descending, eigenvectors as matching columns.
struct SpectralDecomposition {
  RVec eigenvalues;
  CMat eigenvectors;
};

/// Eigendecomposition of a Hermitian matrix. Rejects inputs whose relative
/// asymmetry exceeds tol.herm, then solves on the symmetrized (H + H^dag)/2.
inline SpectralDecomposition hermitian_eigen(const CMat& h, const Tolerances& tol = {}) {
  require_square(h, "hermitian_eigen");
  require_finite(h, "hermitian_eigen");
  double asym = hermiticity_residual(h);
  if (asym > tol.herm)
    throw Error(Errc::not_hermitian,
                "hermitian_eigen: relative asymmetry " + std::to_string(asym));
  CMat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::numerical_failure, "hermitian_eigen: eigensolver did not converge");
  const Eigen::Index n = h.rows();
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// Eigenvalue magnitudes at or below clip_rel * lambda_max count as zero.
inline double clip_threshold(const RVec& eigenvalues, double clip_rel) {
  if (eigenvalues.size() == 0) return 0.0;
  double lambda_max = eigenvalues.maxCoeff();
  return lambda_max > 0.0 ? clip_rel * lambda_max : 0.0;
}

struct PsdCheck {
  bool psd = false;
  double min_eigenvalue = 0.0;
};

/// PSD test with an explicit witness: the minimum eigenvalue is always
/// reported so callers can log how close to the cone boundary they are.
inline PsdCheck is_psd(const CMat& h, double tol_psd = Tolerances{}.psd,
                       const Tolerances& tol = {}) {
  SpectralDecomposition ed = hermitian_eigen(h, tol);
  double min_ev = ed.eigenvalues(ed.eigenvalues.size() - 1);
  return PsdCheck{min_ev >= -tol_psd, min_ev};
}

/// Principal square root of a PSD matrix. Eigenvalues in [-tol.psd, clip)
/// are clamped to 0 before rooting; anything below -tol.psd is an error.
inline CMat psd_sqrt(const CMat& h, const Tolerances& tol = {}) {
  SpectralDecomposition ed = hermitian_eigen(h, tol);
  double min_ev = ed.eigenvalues(ed.eigenvalues.size() - 1);
  if (min_ev < -tol.psd)
    throw Error(Errc::not_psd, "psd_sqrt: minimum eigenvalue " + std::to_string(min_ev));
  double clip = clip_threshold(ed.eigenvalues, tol.clip_rel);
  RVec roots = ed.eigenvalues;
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    roots(i) = roots(i) > clip ? std::sqrt(roots(i)) : 0.0;
  CMat s = ed.eigenvectors * roots.asDiagonal() * ed.eigenvectors.adjoint();
  return hermitian_part(s);
}

/// Kronecker product, refusing results larger than dim_cap on a side.
inline CMat tensor(const CMat& a, const CMat& b,
                   std::size_t dim_cap = limits::kDefaultDimCap) {
  if (a.size() == 0 || b.size() == 0)
    throw Error(Errc::empty_input, "tensor: empty factor");
  std::size_t rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  std::size_t cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  if (rows > dim_cap || cols > dim_cap)
    throw Error(Errc::dimension_overflow,
                "tensor: product dimension " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " exceeds cap " + std::to_string(dim_cap));
  CMat out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Orthogonal projector onto the span of the given column set. Rank is the
/// numerical rank at the relative cutoff tol.rank.
inline CMat span_projector(const CMat& columns, const Tolerances& tol = {}) {
  if (columns.size() == 0 || columns.cols() == 0)
    throw Error(Errc::empty_input, "span_projector: no vectors given");
  require_finite(columns, "span_projector");
  Eigen::JacobiSVD<CMat> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? tol.rank * sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  if (rank == 0) return CMat::Zero(columns.rows(), columns.rows());
  CMat basis = svd.matrixU().leftCols(rank);
  return basis * basis.adjoint();
}

/// Numerical rank of a column set at the relative cutoff tol.rank.
inline Eigen::Index numerical_rank(const CMat& columns, const Tolerances& tol = {}) {
  if (columns.size() == 0 || columns.cols() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(columns);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? tol.rank * sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  return rank;
}

/// Real part of Tr(a * b) with a guard on the imaginary residue, which must
/// vanish for Hermitian pairs.
inline double real_trace_product(const CMat& a, const CMat& b, double imag_tol = 1e-12) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw Error(Errc::dimension_mismatch, "real_trace_product: shape mismatch");
  Complex tr = a.cwiseProduct(b.transpose()).sum();
  if (std::abs(tr.imag()) > imag_tol * std::max(1.0, std::abs(tr.real())))
    throw Error(Errc::numerical_failure,
                "real_trace_product: imaginary residue " + std::to_string(tr.imag()));
  return tr.real();
}

}  // namespace uqsd
