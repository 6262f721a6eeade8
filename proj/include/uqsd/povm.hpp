#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "uqsd/discrimination.hpp"
#include "uqsd/states.hpp"

namespace uqsd {

/// Measurement with outcome convention: element 0 is the inconclusive
/// outcome, element i >= 1 concludes "state i".
struct Povm {
  std::vector<CMat> elements;
  Eigen::Index dim() const { return elements.empty() ? 0 : elements.front().rows(); }
};

struct PovmValidation {
  bool ok = false;
  double max_hermiticity = 0.0;
  double min_eigenvalue = 0.0;
  double completeness = 0.0;  // ||sum(elements) - I||_F
  std::vector<std::string> violations;
};

inline PovmValidation validate_povm(const Povm& povm, const Tolerances& tol = {}) {
  PovmValidation v;
  if (povm.elements.empty()) {
    v.violations.push_back("no elements");
    return v;
  }
  Eigen::Index d = povm.dim();
  CMat sum = CMat::Zero(d, d);
  v.min_eigenvalue = 1.0;
  for (std::size_t i = 0; i < povm.elements.size(); ++i) {
    const CMat& e = povm.elements[i];
    if (e.rows() != d || e.cols() != d) {
      v.violations.push_back("element " + std::to_string(i) + " has mismatched shape");
      return v;
    }
    if (!e.allFinite()) {
      v.violations.push_back("element " + std::to_string(i) + " has non-finite entries");
      return v;
    }
    double herm = hermiticity_residual(e);
    v.max_hermiticity = std::max(v.max_hermiticity, herm);
    if (herm > tol.herm)
      v.violations.push_back("element " + std::to_string(i) + " asymmetry " +
                             std::to_string(herm));
    if (herm <= 1.0) {
      double min_ev = is_psd(e, tol.psd, Tolerances{.herm = 1.0}).min_eigenvalue;
      v.min_eigenvalue = std::min(v.min_eigenvalue, min_ev);
      if (min_ev < -tol.psd)
        v.violations.push_back("element " + std::to_string(i) + " min eigenvalue " +
                               std::to_string(min_ev));
    }
    sum += e;
  }
  v.completeness = (sum - CMat::Identity(d, d)).norm();
  if (v.completeness > tol.recon)
    v.violations.push_back("completeness residual " + std::to_string(v.completeness));
  v.ok = v.violations.empty();
  return v;
}

/// Born distribution of outcomes for a validated measurement on rho.
/// Entries are clamped at 0 from below; the sum must be 1 within tol.trace.
inline std::vector<double> outcome_distribution(const Povm& povm, const DensityMatrix& rho,
                                                const Tolerances& tol = {}) {
  if (povm.dim() != rho.dim())
    throw Error(Errc::dimension_mismatch, "outcome_distribution: dimension mismatch");
  std::vector<double> p(povm.elements.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double t = real_trace_product(povm.elements[i], rho.matrix());
    if (t < -1e-12)
      throw Error(Errc::numerical_failure,
                  "outcome_distribution: probability " + std::to_string(t) + " below 0");
    p[i] = std::max(t, 0.0);
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > tol.trace)
    throw Error(Errc::numerical_failure,
                "outcome_distribution: probabilities sum to " + std::to_string(sum));
  return p;
}

/// Exact Born-rule rates of a 3-outcome discriminator on a two-state problem.
struct UdRates {
  double success = 0.0;
  double failure = 0.0;
  double error = 0.0;
};

inline UdRates exact_ud_rates(const Povm& povm, const UdProblem& problem,
                              const Tolerances& tol = {}) {
  if (povm.elements.size() != 3)
    throw Error(Errc::invalid_povm, "exact_ud_rates: need exactly 3 outcomes");
  std::vector<double> d1 = outcome_distribution(povm, problem.rho1, tol);
  std::vector<double> d2 = outcome_distribution(povm, problem.rho2, tol);
  UdRates r;
  r.failure = problem.eta1 * d1[0] + problem.eta2 * d2[0];
  r.success = problem.eta1 * d1[1] + problem.eta2 * d2[2];
  r.error = problem.eta1 * d1[2] + problem.eta2 * d2[1];
  return r;
}

/// Trial tallies from sampling a discriminator. counts[t][o]: state t+1 was
/// prepared and outcome o observed. Standard errors are binomial.
struct SimulationStats {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::array<std::array<std::uint64_t, 3>, 2> counts{};
  double success_rate = 0.0, failure_rate = 0.0, error_rate = 0.0;
  double success_se = 0.0, failure_se = 0.0, error_se = 0.0;
};

/// Monte Carlo run of a 3-outcome discriminator. Deterministic per seed:
/// trials are processed in fixed-size batches, each on its own derived
/// substream, so results do not depend on how batches would be scheduled.
inline SimulationStats simulate_ud(const UdProblem& problem, const Povm& povm,
                                   std::uint64_t trials, std::uint64_t seed,
                                   const Tolerances& tol = {}) {
  if (trials < 1) throw Error(Errc::range_error, "simulate_ud: need trials >= 1");
  if (povm.elements.size() != 3)
    throw Error(Errc::invalid_povm, "simulate_ud: need exactly 3 outcomes");
  PovmValidation pv = validate_povm(povm, tol);
  if (!pv.ok) {
    std::string what = "simulate_ud: invalid measurement:";
    for (const auto& s : pv.violations) what += " " + s + ";";
    throw Error(Errc::invalid_povm, what);
  }

  std::array<std::vector<double>, 2> dist = {outcome_distribution(povm, problem.rho1, tol),
                                             outcome_distribution(povm, problem.rho2, tol)};
  std::array<std::array<double, 3>, 2> cdf{};
  for (int t = 0; t < 2; ++t) {
    double total = std::accumulate(dist[t].begin(), dist[t].end(), 0.0);
    double acc = 0.0;
    for (int o = 0; o < 3; ++o) {
      acc += dist[t][o] / total;
      cdf[t][o] = acc;
    }
    cdf[t][2] = 1.0;  // guard the tail against roundoff
  }

  SimulationStats stats;
  stats.trials = trials;
  stats.seed = seed;
  constexpr std::uint64_t kBatch = 1u << 16;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t done = 0, batch = 0; done < trials; ++batch) {
    std::uint64_t count = std::min<std::uint64_t>(kBatch, trials - done);
    std::mt19937_64 rng(split_seed(seed, 0x5151000000000000ULL + batch));
    for (std::uint64_t i = 0; i < count; ++i) {
      double u = unit(rng);
      int truth = u < problem.eta1 ? 0 : 1;
      double v = unit(rng);
      int outcome = v <= cdf[truth][0] ? 0 : (v <= cdf[truth][1] ? 1 : 2);
      ++stats.counts[truth][outcome];
    }
    done += count;
  }

  double n = static_cast<double>(trials);
  auto rate_se = [n](std::uint64_t c) {
    double p = static_cast<double>(c) / n;
    return std::pair<double, double>(p, std::sqrt(p * (1.0 - p) / n));
  };
  auto [fr, fse] = rate_se(stats.counts[0][0] + stats.counts[1][0]);
  auto [sr, sse] = rate_se(stats.counts[0][1] + stats.counts[1][2]);
  auto [er, ese] = rate_se(stats.counts[0][2] + stats.counts[1][1]);
  stats.failure_rate = fr;
  stats.failure_se = fse;
  stats.success_rate = sr;
  stats.success_se = sse;
  stats.error_rate = er;
  stats.error_se = ese;
  return stats;
}

/// Optimal unambiguous discriminator for two pure states with overlap
/// s = |<psi1|psi2>| strictly inside (0,1). Conclusive elements live in the
/// two-dimensional span; everything orthogonal to it is inconclusive. The
/// per-state failure targets are s*r and s/r (r = sqrt(eta2/eta1)), clipped
/// into [s^2, 1]; clipping at 1 shuts a conclusive outcome off entirely.
inline Povm pure_state_ud_povm(const PureState& psi1, const PureState& psi2, double eta1,
                               double eta2 = -1.0, const Tolerances& tol = {}) {
  if (eta2 < 0.0) eta2 = 1.0 - eta1;
  if (!(eta1 > 0.0 && eta1 < 1.0) || !(eta2 > 0.0 && eta2 < 1.0) ||
      std::abs(eta1 + eta2 - 1.0) > 1e-12)
    throw Error(Errc::range_error, "pure_state_ud_povm: invalid priors");
  if (psi1.dim() != psi2.dim())
    throw Error(Errc::dimension_mismatch, "pure_state_ud_povm: dimension mismatch");
  if (psi1.dim() < 2)
    throw Error(Errc::range_error, "pure_state_ud_povm: need dim >= 2");

  Complex c = psi1.amplitudes().dot(psi2.amplitudes());  // <psi1|psi2>
  double s = std::abs(c);
  if (s < 1e-12 || s > 1.0 - 1e-12)
    throw Error(Errc::degenerate_overlap,
                "pure_state_ud_povm: overlap " + std::to_string(s) + " not in (0,1)");

  double root = std::sqrt(1.0 - s * s);
  CVec psi2_perp_of_1 = (psi2.amplitudes() - c * psi1.amplitudes()) / root;  // unit, ⟂ psi1
  CVec perp_of_2 = root * psi1.amplitudes() - std::conj(c) * psi2_perp_of_1; // unit, ⟂ psi2

  double r = std::sqrt(eta2 / eta1);
  double q1 = std::clamp(s * r, s * s, 1.0);
  double q2 = std::clamp(s / r, s * s, 1.0);
  double a1 = (1.0 - q1) / (1.0 - s * s);
  double a2 = (1.0 - q2) / (1.0 - s * s);

  Povm povm;
  povm.elements.resize(3);
  povm.elements[1] = a1 * (perp_of_2 * perp_of_2.adjoint());
  povm.elements[2] = a2 * (psi2_perp_of_1 * psi2_perp_of_1.adjoint());
  povm.elements[0] = CMat::Identity(psi1.dim(), psi1.dim()) - povm.elements[1] -
                     povm.elements[2];
  for (auto& e : povm.elements) e = hermitian_part(e);
  PovmValidation pv = validate_povm(povm, tol);
  if (!pv.ok)
    throw Error(Errc::numerical_failure,
                "pure_state_ud_povm: constructed measurement failed validation");
  return povm;
}

namespace detail {
/// Common eigenbasis of a commuting Hermitian pair: diagonalize the first,
/// then rediagonalize the second inside each (near-)degenerate eigenspace of
/// the first. Returns the unitary whose columns are the joint basis.
inline CMat common_eigenbasis(const CMat& h1, const CMat& h2, const Tolerances& tol) {
  SpectralDecomposition e1 = hermitian_eigen(h1, tol);
  const Eigen::Index d = h1.rows();
  CMat basis = e1.eigenvectors;
  double scale = std::max(1.0, std::abs(e1.eigenvalues(0)));
  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index stop = start + 1;
    while (stop < d &&
           std::abs(e1.eigenvalues(stop) - e1.eigenvalues(stop - 1)) <= 1e-8 * scale)
      ++stop;
    if (stop - start > 1) {
      CMat block_basis = basis.middleCols(start, stop - start);
      CMat compressed = block_basis.adjoint() * h2 * block_basis;
      compressed = hermitian_part(compressed);
      Eigen::SelfAdjointEigenSolver<CMat> solver(compressed);
      if (solver.info() != Eigen::Success)
        throw Error(Errc::numerical_failure, "common_eigenbasis: block solve failed");
      basis.middleCols(start, stop - start) = block_basis * solver.eigenvectors();
    }
    start = stop;
  }
  return basis;
}
}  // namespace detail

/// Projective unambiguous discriminator for a commuting pair: in the common
/// eigenbasis, conclude "state i" on the part of state i's support the other
/// state misses, and stay inconclusive on the rest.
inline Povm commuting_ud_povm(const DensityMatrix& rho1, const DensityMatrix& rho2,
                              const Tolerances& tol = {}) {
  if (rho1.dim() != rho2.dim())
    throw Error(Errc::dimension_mismatch, "commuting_ud_povm: dimension mismatch");
  double comm = (rho1.matrix() * rho2.matrix() - rho2.matrix() * rho1.matrix()).norm();
  if (comm > tol.herm)
    throw Error(Errc::not_commuting,
                "commuting_ud_povm: commutator norm " + std::to_string(comm));

  CMat basis = detail::common_eigenbasis(rho1.matrix(), rho2.matrix(), tol);
  const Eigen::Index d = rho1.dim();
  CMat d1 = basis.adjoint() * rho1.matrix() * basis;
  CMat d2 = basis.adjoint() * rho2.matrix() * basis;
  double offdiag = std::sqrt(std::max(0.0, d1.norm() * d1.norm() -
                                               d1.diagonal().norm() * d1.diagonal().norm())) +
                   std::sqrt(std::max(0.0, d2.norm() * d2.norm() -
                                               d2.diagonal().norm() * d2.diagonal().norm()));
  if (offdiag > 1e-8)
    throw Error(Errc::not_commuting,
                "commuting_ud_povm: joint diagonalization residual " + std::to_string(offdiag));

  RVec l1 = d1.diagonal().real();
  RVec l2 = d2.diagonal().real();
  double clip1 = tol.clip_rel * l1.maxCoeff();
  double clip2 = tol.clip_rel * l2.maxCoeff();
  CMat p1 = CMat::Zero(d, d), p2 = CMat::Zero(d, d);
  bool any1 = false, any2 = false;
  for (Eigen::Index k = 0; k < d; ++k) {
    bool in1 = l1(k) > clip1;
    bool in2 = l2(k) > clip2;
    if (in1 && !in2) {
      p1 += basis.col(k) * basis.col(k).adjoint();
      any1 = true;
    } else if (in2 && !in1) {
      p2 += basis.col(k) * basis.col(k).adjoint();
      any2 = true;
    }
  }
  if (!any1 || !any2)
    throw Error(Errc::not_feasible,
                "commuting_ud_povm: one support contains the other; no conclusive outcome");

  Povm povm;
  povm.elements.resize(3);
  povm.elements[1] = hermitian_part(p1);
  povm.elements[2] = hermitian_part(p2);
  povm.elements[0] = CMat::Identity(d, d) - povm.elements[1] - povm.elements[2];
  PovmValidation pv = validate_povm(povm, tol);
  if (!pv.ok)
    throw Error(Errc::numerical_failure,
                "commuting_ud_povm: constructed measurement failed validation");
  return povm;
}

}  // namespace uqsd
