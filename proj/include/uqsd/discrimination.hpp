#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "uqsd/compose.hpp"
#include "uqsd/states.hpp"

namespace uqsd {

/// Two hypothesis states with prior probabilities. eta2 defaults to 1 - eta1.
struct UdProblem {
  UdProblem(DensityMatrix rho1_, DensityMatrix rho2_, double eta1_, double eta2_ = -1.0)
      : rho1(std::move(rho1_)), rho2(std::move(rho2_)), eta1(eta1_),
        eta2(eta2_ < 0.0 ? 1.0 - eta1_ : eta2_) {
    if (rho1.dim() != rho2.dim())
      throw Error(Errc::dimension_mismatch, "ud problem: state dimensions differ");
    if (!(eta1 > 0.0 && eta1 < 1.0) || !(eta2 > 0.0 && eta2 < 1.0))
      throw Error(Errc::range_error, "ud problem: priors must lie strictly in (0,1)");
    if (std::abs(eta1 + eta2 - 1.0) > 1e-12)
      throw Error(Errc::range_error, "ud problem: priors sum to " + std::to_string(eta1 + eta2));
  }

  DensityMatrix rho1;
  DensityMatrix rho2;
  double eta1;
  double eta2;
};

/// Projector onto the support of rho (eigenvalues above the relative clip).
inline CMat support_projector(const DensityMatrix& rho, const Tolerances& tol = {}) {
  SpectralDecomposition ed = hermitian_eigen(rho.matrix(), tol);
  double clip = clip_threshold(ed.eigenvalues, tol.clip_rel);
  Eigen::Index rank = 0;
  while (rank < ed.eigenvalues.size() && ed.eigenvalues(rank) > clip) ++rank;
  if (rank == 0) throw Error(Errc::numerical_failure, "support_projector: zero support");
  CMat basis = ed.eigenvectors.leftCols(rank);
  CMat p = basis * basis.adjoint();
  return hermitian_part(p);
}

/// Tr(P rho), clamped into [0,1]. P must be a projector-sized operator on
/// rho's space; the imaginary residue must vanish.
inline double support_overlap_trace(const CMat& projector, const DensityMatrix& rho) {
  if (projector.rows() != rho.dim() || projector.cols() != rho.dim())
    throw Error(Errc::dimension_mismatch, "support_overlap_trace: dimension mismatch");
  double t = real_trace_product(projector, rho.matrix());
  return std::clamp(t, 0.0, 1.0);
}

namespace detail {
/// Spectrum of sqrt(rho1) rho2 sqrt(rho1), clipped at the eigensolver noise
/// floor. Clipping kills the O(eps) noise eigenvalues whose square roots
/// would otherwise pollute near-orthogonal fidelities at the 1e-8 level; the
/// floor is deliberately tighter than the support-detection clip because
/// composed instances carry genuine eigenvalues that are products across
/// registers and can legitimately sit below clip_rel * lambda_max. The
/// relative floor needs a genuine lambda_max to anchor on, so orthogonal
/// supports are gated first: the sandwich bound F^2 <= Tr(P1 rho2) makes a
/// vanishing support overlap a certificate that the whole spectrum is noise.
inline SpectralDecomposition sandwiched_spectrum(const DensityMatrix& rho1,
                                                 const DensityMatrix& rho2,
                                                 const Tolerances& tol) {
  if (rho1.dim() != rho2.dim())
    throw Error(Errc::dimension_mismatch, "fidelity: state dimensions differ");
  const Eigen::Index d = rho1.dim();
  SpectralDecomposition ed1 = hermitian_eigen(rho1.matrix(), tol);
  double clip1 = clip_threshold(ed1.eigenvalues, limits::kSpectrumNoiseRel);
  CMat s = CMat::Zero(d, d);
  double t12 = 0.0;  // Tr(P1 rho2), accumulated over the support basis
  for (Eigen::Index i = 0; i < d; ++i) {
    if (ed1.eigenvalues(i) <= clip1) continue;
    const CVec v = ed1.eigenvectors.col(i);
    s += std::sqrt(ed1.eigenvalues(i)) * (v * v.adjoint());
    t12 += std::real(Complex(v.adjoint() * rho2.matrix() * v));
  }
  SpectralDecomposition ed;
  if (t12 <= limits::kFidelityZero) {
    ed.eigenvalues = RVec::Zero(d);
    ed.eigenvectors = CMat::Identity(d, d);
    return ed;
  }
  CMat m = hermitian_part(s * rho2.matrix() * s);
  ed = hermitian_eigen(m, tol);
  double clip = clip_threshold(ed.eigenvalues, limits::kSpectrumNoiseRel);
  for (Eigen::Index i = 0; i < ed.eigenvalues.size(); ++i)
    if (ed.eigenvalues(i) <= clip) ed.eigenvalues(i) = 0.0;
  return ed;
}
}  // namespace detail

/// Fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)); symmetric in its arguments
/// to within tolerance, 1 iff the states coincide, 0 iff supports are
/// orthogonal.
inline double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2,
                       const Tolerances& tol = {}) {
  SpectralDecomposition ed = detail::sandwiched_spectrum(rho1, rho2, tol);
  double f = 0.0;
  for (Eigen::Index i = 0; i < ed.eigenvalues.size(); ++i)
    if (ed.eigenvalues(i) > 0.0) f += std::sqrt(ed.eigenvalues(i));
  return f;
}

/// The operator sqrt(sqrt(a) b sqrt(a)). Its trace is fidelity(a, b); the
/// argument order matters for the operator even though the trace is symmetric.
inline CMat fidelity_operator(const DensityMatrix& a, const DensityMatrix& b,
                              const Tolerances& tol = {}) {
  SpectralDecomposition ed = detail::sandwiched_spectrum(a, b, tol);
  RVec roots = ed.eigenvalues;
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    roots(i) = roots(i) > 0.0 ? std::sqrt(roots(i)) : 0.0;
  CMat f = ed.eigenvectors * roots.asDiagonal() * ed.eigenvectors.adjoint();
  return hermitian_part(f);
}

/// Rank evidence for unambiguous discriminability: each state must have
/// support directions the other lacks, i.e. both supports are proper
/// subspaces of the joint support.
struct FeasibilityWitness {
  bool feasible = false;
  Eigen::Index rank1 = 0;
  Eigen::Index rank2 = 0;
  Eigen::Index rank_joint = 0;
};

inline FeasibilityWitness ud_feasible(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                      const Tolerances& tol = {}) {
  if (rho1.dim() != rho2.dim())
    throw Error(Errc::dimension_mismatch, "ud_feasible: state dimensions differ");
  SpectralDecomposition e1 = hermitian_eigen(rho1.matrix(), tol);
  SpectralDecomposition e2 = hermitian_eigen(rho2.matrix(), tol);
  auto support_cols = [&](const SpectralDecomposition& ed) {
    double clip = clip_threshold(ed.eigenvalues, tol.clip_rel);
    Eigen::Index rank = 0;
    while (rank < ed.eigenvalues.size() && ed.eigenvalues(rank) > clip) ++rank;
    return ed.eigenvectors.leftCols(rank);
  };
  CMat v1 = support_cols(e1);
  CMat v2 = support_cols(e2);
  FeasibilityWitness w;
  w.rank1 = v1.cols();
  w.rank2 = v2.cols();
  CMat joint(rho1.dim(), w.rank1 + w.rank2);
  joint << v1, v2;
  w.rank_joint = numerical_rank(joint, tol);
  w.feasible = w.rank1 < w.rank_joint && w.rank2 < w.rank_joint;
  return w;
}

enum class Regime {
  lower,
  middle,
  upper,
  degenerate_f0,
  boundary_lower_middle,
  boundary_middle_upper,
};

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::lower: return "lower";
    case Regime::middle: return "middle";
    case Regime::upper: return "upper";
    case Regime::degenerate_f0: return "degenerate_f0";
    case Regime::boundary_lower_middle: return "boundary_lower_middle";
    case Regime::boundary_middle_upper: return "boundary_middle_upper";
  }
  return "unknown";
}

enum class Attainability { yes, no, unknown };

inline const char* attainability_name(Attainability a) {
  switch (a) {
    case Attainability::yes: return "yes";
    case Attainability::no: return "no";
    case Attainability::unknown: return "unknown";
  }
  return "unknown";
}

/// The three closed-form failure lines, exposed separately so boundary
/// continuity can be checked line against line. Preconditions: inputs in
/// (0,1] where divided by, n >= 1.
inline double failure_lower(double f, double t21, double eta1, double eta2, int n) {
  return eta2 * std::pow(f * f / t21, n) + eta1 * std::pow(t21, n);
}
inline double failure_middle(double f, double eta1, double eta2, int n) {
  return 2.0 * std::sqrt(eta1 * eta2) * std::pow(f, n);
}
inline double failure_upper(double f, double t12, double eta1, double eta2, int n) {
  return eta1 * std::pow(f * f / t12, n) + eta2 * std::pow(t12, n);
}

enum class CertificatePolicy { compute, skip };

struct BoundOptions {
  Tolerances tol{};
  std::size_t dim_cap = limits::kDefaultDimCap;
  CertificatePolicy certificates = CertificatePolicy::compute;
  // The closed form and its certificates are valid whenever discrimination is
  // feasible, shared support directions included (they only force failure
  // weight onto the inconclusive outcome). Setting this rejects pairs whose
  // supports meet outside 0, for callers that want the stricter geometry.
  bool require_disjoint_supports = false;
};

/// Everything the optimal-failure computation knows about one instance.
/// fidelity/t21/t12 are single-copy quantities; q_opt already accounts for n.
struct UdBoundReport {
  int n = 1;
  double eta1 = 0.5;
  double eta2 = 0.5;
  double fidelity = 0.0;
  double t21 = 0.0;  // Tr(P2 rho1)
  double t12 = 0.0;  // Tr(P1 rho2)
  Regime regime = Regime::middle;
  double q_opt = 0.0;
  double cert_scale_1 = 0.0;
  double cert_scale_2 = 0.0;
  Attainability attainable = Attainability::unknown;
  std::optional<double> cert_residual_1;  // min eigenvalue of rho_in_1 - k1 F_in_1
  std::optional<double> cert_residual_2;  // min eigenvalue of rho_in_2 - k2 F_in_2
  Eigen::Index composed_dim = 0;          // 0 when certificates were not built
  FeasibilityWitness feasibility{};
  Tolerances tol{};
  std::size_t dim_cap = limits::kDefaultDimCap;
};

/// Least achievable average failure probability for unambiguously telling
/// rho1 from rho2 given n data copies. Requires discriminability. The prior
/// ratio r = sqrt(eta2/eta1) selects one of three closed-form lines; exact
/// threshold ties use the middle line, whose value agrees with the adjacent
/// line there.
inline UdBoundReport optimal_failure_bound(const UdProblem& problem, int n,
                                           const BoundOptions& opts = {}) {
  if (n < 1) throw Error(Errc::range_error, "optimal_failure_bound: need n >= 1");
  const Tolerances& tol = opts.tol;

  FeasibilityWitness w = ud_feasible(problem.rho1, problem.rho2, tol);
  if (!w.feasible)
    throw Error(Errc::not_feasible,
                "optimal_failure_bound: supports give no discriminating direction (ranks " +
                    std::to_string(w.rank1) + ", " + std::to_string(w.rank2) + ", joint " +
                    std::to_string(w.rank_joint) + ")");
  if (opts.require_disjoint_supports && w.rank_joint != w.rank1 + w.rank2)
    throw Error(Errc::overlapping_supports,
                "optimal_failure_bound: supports intersect nontrivially (ranks " +
                    std::to_string(w.rank1) + " + " + std::to_string(w.rank2) +
                    " > joint " + std::to_string(w.rank_joint) + ")");

  UdBoundReport rep;
  rep.feasibility = w;
  rep.n = n;
  rep.eta1 = problem.eta1;
  rep.eta2 = problem.eta2;
  rep.tol = tol;
  rep.dim_cap = opts.dim_cap;
  rep.fidelity = fidelity(problem.rho1, problem.rho2, tol);
  CMat p1 = support_projector(problem.rho1, tol);
  CMat p2 = support_projector(problem.rho2, tol);
  rep.t21 = support_overlap_trace(p2, problem.rho1);
  rep.t12 = support_overlap_trace(p1, problem.rho2);

  // Sandwich F^2 <= t <= 1 is a theorem for valid inputs; a violation means
  // the tolerance configuration is inconsistent, not a property of the states.
  double f2 = rep.fidelity * rep.fidelity;
  if (f2 > rep.t21 + 1e-9 || f2 > rep.t12 + 1e-9 || rep.t21 > 1.0 + 1e-12 ||
      rep.t12 > 1.0 + 1e-12)
    throw Error(Errc::numerical_failure,
                "optimal_failure_bound: sandwich F^2 <= t <= 1 violated (F=" +
                    std::to_string(rep.fidelity) + ", t21=" + std::to_string(rep.t21) +
                    ", t12=" + std::to_string(rep.t12) + ")");

  double r = std::sqrt(problem.eta2 / problem.eta1);
  if (rep.fidelity < limits::kFidelityZero) {
    rep.regime = Regime::degenerate_f0;
    rep.q_opt = 0.0;
    rep.cert_scale_1 = 0.0;
    rep.cert_scale_2 = 0.0;
  } else {
    double lo = std::pow(rep.t21 / rep.fidelity, n);
    double hi = std::pow(rep.fidelity / rep.t12, n);
    if (r == lo || r == hi) {
      rep.regime = (r == lo) ? Regime::boundary_lower_middle : Regime::boundary_middle_upper;
      rep.q_opt = failure_middle(rep.fidelity, problem.eta1, problem.eta2, n);
      rep.cert_scale_1 = r;
    } else if (r < lo) {
      rep.regime = Regime::lower;
      rep.q_opt = failure_lower(rep.fidelity, rep.t21, problem.eta1, problem.eta2, n);
      rep.cert_scale_1 = lo;
    } else if (r > hi) {
      rep.regime = Regime::upper;
      rep.q_opt = failure_upper(rep.fidelity, rep.t12, problem.eta1, problem.eta2, n);
      rep.cert_scale_1 = hi;
    } else {
      rep.regime = Regime::middle;
      rep.q_opt = failure_middle(rep.fidelity, problem.eta1, problem.eta2, n);
      rep.cert_scale_1 = r;
    }
    rep.cert_scale_2 = 1.0 / rep.cert_scale_1;
  }

  if (rep.q_opt < -1e-12 || rep.q_opt > 1.0 + 1e-12)
    throw Error(Errc::numerical_failure,
                "optimal_failure_bound: q_opt " + std::to_string(rep.q_opt) + " outside [0,1]");
  rep.q_opt = std::clamp(rep.q_opt, 0.0, 1.0);

  double composed = std::pow(static_cast<double>(problem.rho1.dim()), n + 2);
  if (opts.certificates == CertificatePolicy::skip) {
    rep.attainable = Attainability::unknown;
  } else if (composed > static_cast<double>(opts.dim_cap)) {
    rep.attainable = Attainability::unknown;  // certificate would exceed the cap
  } else {
    ProgrammableInstance inst =
        compose_instance(problem.rho1, problem.rho2, n, opts.dim_cap, tol);
    rep.composed_dim = inst.total_dim;
    CMat f1 = fidelity_operator(inst.rho_in_1, inst.rho_in_2, tol);
    CMat f2in = fidelity_operator(inst.rho_in_2, inst.rho_in_1, tol);
    CMat c1 = inst.rho_in_1.matrix() - rep.cert_scale_1 * f1;
    CMat c2 = inst.rho_in_2.matrix() - rep.cert_scale_2 * f2in;
    rep.cert_residual_1 = is_psd(c1, tol.psd, tol).min_eigenvalue;
    rep.cert_residual_2 = is_psd(c2, tol.psd, tol).min_eigenvalue;
    bool ok = *rep.cert_residual_1 >= -tol.psd && *rep.cert_residual_2 >= -tol.psd;
    rep.attainable = ok ? Attainability::yes : Attainability::no;
  }
  return rep;
}

enum class ComparisonCase { orthogonal_shortcut, n_equals_1, case1, case2, case3 };

inline const char* comparison_case_name(ComparisonCase c) {
  switch (c) {
    case ComparisonCase::orthogonal_shortcut: return "orthogonal_shortcut";
    case ComparisonCase::n_equals_1: return "n_equals_1";
    case ComparisonCase::case1: return "case1";
    case ComparisonCase::case2: return "case2";
    case ComparisonCase::case3: return "case3";
  }
  return "unknown";
}

enum class Verdict { strictly_better, equal, incomparable };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::strictly_better: return "strictly_better";
    case Verdict::equal: return "equal";
    case Verdict::incomparable: return "incomparable";
  }
  return "unknown";
}

/// How the n-copy optimum relates to the single-copy optimum, including the
/// prior-ratio windows where the published analysis declines to order them.
struct ComparisonReport {
  int n = 1;
  double eta1 = 0.5;
  double eta2 = 0.5;
  double r = 1.0;  // sqrt(eta2/eta1)
  double fidelity = 0.0;
  double t21 = 0.0;
  double t12 = 0.0;
  double q_opt_n = 0.0;
  double q_opt_1 = 0.0;
  ComparisonCase case_id = ComparisonCase::n_equals_1;
  Verdict verdict = Verdict::equal;
  std::optional<std::pair<double, double>> excluded_window;
  bool ordering_violation = false;
};

/// Compares the n-copy and single-copy optima. Inside an excluded window the
/// verdict is incomparable by policy (both values are still reported);
/// outside, the verdict states the actual numeric ordering.
inline ComparisonReport compare_bounds(const UdProblem& problem, int n,
                                       const BoundOptions& opts = {}) {
  if (n < 1) throw Error(Errc::range_error, "compare_bounds: need n >= 1");
  BoundOptions light = opts;
  light.certificates = CertificatePolicy::skip;
  UdBoundReport bound_n = optimal_failure_bound(problem, n, light);
  UdBoundReport bound_1 = (n == 1) ? bound_n : optimal_failure_bound(problem, 1, light);

  ComparisonReport rep;
  rep.n = n;
  rep.eta1 = problem.eta1;
  rep.eta2 = problem.eta2;
  rep.r = std::sqrt(problem.eta2 / problem.eta1);
  rep.fidelity = bound_1.fidelity;
  rep.t21 = bound_1.t21;
  rep.t12 = bound_1.t12;
  rep.q_opt_n = bound_n.q_opt;
  rep.q_opt_1 = bound_1.q_opt;

  if (rep.fidelity < limits::kFidelityZero) {
    rep.case_id = ComparisonCase::orthogonal_shortcut;
    rep.verdict = Verdict::equal;  // both optima are exactly 0
    return rep;
  }
  if (n == 1) {
    rep.case_id = ComparisonCase::n_equals_1;
    rep.verdict = Verdict::equal;
    return rep;
  }

  double lo1 = rep.t21 / rep.fidelity;
  double hi1 = rep.fidelity / rep.t12;
  if (lo1 <= 1.0 && hi1 >= 1.0) {
    rep.case_id = ComparisonCase::case1;
  } else if (lo1 > 1.0) {
    rep.case_id = ComparisonCase::case3;
    rep.excluded_window = {lo1, std::pow(lo1, n)};
  } else {
    rep.case_id = ComparisonCase::case2;
    rep.excluded_window = {std::pow(hi1, n), hi1};
  }

  if (rep.excluded_window && rep.r >= rep.excluded_window->first &&
      rep.r <= rep.excluded_window->second) {
    rep.verdict = Verdict::incomparable;
    return rep;
  }
  if (rep.q_opt_n < rep.q_opt_1 - 1e-12) {
    rep.verdict = Verdict::strictly_better;
  } else if (rep.q_opt_n <= rep.q_opt_1 + 1e-12) {
    rep.verdict = Verdict::equal;
  } else {
    // Outside every excluded window the n-copy optimum should never lose.
    rep.verdict = Verdict::incomparable;
    rep.ordering_violation = true;
  }
  return rep;
}

}  // namespace uqsd
