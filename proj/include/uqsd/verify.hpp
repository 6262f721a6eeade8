#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "uqsd/compose.hpp"
#include "uqsd/discrimination.hpp"
#include "uqsd/povm.hpp"

namespace uqsd {

/// Extends every element to prefix (x) element, acting as identity on a
/// prefix register of the given dimension. Outcome statistics on factorized
/// states with unit-trace prefixes are unchanged.
inline Povm lift_povm(const Povm& povm, Eigen::Index prefix_dim,
                      std::size_t dim_cap = limits::kDefaultDimCap) {
  if (povm.elements.empty()) throw Error(Errc::empty_input, "lift_povm: no elements");
  if (prefix_dim < 1) throw Error(Errc::range_error, "lift_povm: need prefix_dim >= 1");
  CMat eye = CMat::Identity(prefix_dim, prefix_dim);
  Povm lifted;
  lifted.elements.reserve(povm.elements.size());
  for (const CMat& e : povm.elements) lifted.elements.push_back(tensor(eye, e, dim_cap));
  return lifted;
}

/// Outcome of checking that a discriminator for (rho1, rho2) lifts to the
/// composed inputs rho1 (x) rho2 (x) rho_i without changing any statistics,
/// and that discriminability itself transfers in both directions.
struct Theorem1Report {
  double p1 = 0.0;       // Tr(Pi1 rho1) before lifting
  double p2 = 0.0;       // Tr(Pi2 rho2) before lifting
  double cross12 = 0.0;  // Tr(Pi1 rho2), must vanish for a UD measurement
  double cross21 = 0.0;  // Tr(Pi2 rho1)
  double lifted_completeness = 0.0;
  double max_trace_deviation = 0.0;
  bool feasible_base = false;
  bool feasible_composed = false;
  bool feasibility_equivalent = false;
  bool passed = false;
};

inline Theorem1Report verify_theorem1(const DensityMatrix& rho1, const DensityMatrix& rho2,
                                      const Povm& povm, const Tolerances& tol = {},
                                      std::size_t dim_cap = limits::kDefaultDimCap) {
  if (povm.elements.size() != 3)
    throw Error(Errc::invalid_povm, "verify_theorem1: need exactly 3 outcomes");
  if (povm.dim() != rho1.dim())
    throw Error(Errc::dimension_mismatch, "verify_theorem1: measurement dimension mismatch");
  std::vector<double> d1 = outcome_distribution(povm, rho1, tol);
  std::vector<double> d2 = outcome_distribution(povm, rho2, tol);

  Theorem1Report rep;
  rep.p1 = d1[1];
  rep.p2 = d2[2];
  rep.cross12 = d2[1];
  rep.cross21 = d1[2];
  if (rep.cross12 > tol.psd || rep.cross21 > tol.psd)
    throw Error(Errc::precondition_failed,
                "verify_theorem1: measurement misidentifies (cross traces " +
                    std::to_string(rep.cross12) + ", " + std::to_string(rep.cross21) + ")");
  if (rep.p1 <= tol.psd || rep.p2 <= tol.psd)
    throw Error(Errc::precondition_failed,
                "verify_theorem1: measurement never concludes one of the states");

  ProgrammableInstance inst = compose_instance(rho1, rho2, 1, dim_cap, tol);
  Eigen::Index prefix = rho1.dim() * rho1.dim();
  Povm lifted = lift_povm(povm, prefix, dim_cap);
  PovmValidation pv = validate_povm(lifted, tol);
  rep.lifted_completeness = pv.completeness;

  const std::array<const DensityMatrix*, 2> composed = {&inst.rho_in_1, &inst.rho_in_2};
  const std::array<const std::vector<double>*, 2> base = {&d1, &d2};
  for (int j = 0; j < 2; ++j) {
    std::vector<double> lifted_dist = outcome_distribution(lifted, *composed[j], tol);
    for (int i = 0; i < 3; ++i)
      rep.max_trace_deviation =
          std::max(rep.max_trace_deviation, std::abs(lifted_dist[i] - (*base[j])[i]));
  }

  rep.feasible_base = ud_feasible(rho1, rho2, tol).feasible;
  rep.feasible_composed = ud_feasible(inst.rho_in_1, inst.rho_in_2, tol).feasible;
  rep.feasibility_equivalent = rep.feasible_base == rep.feasible_composed;
  rep.passed = pv.ok && rep.max_trace_deviation <= tol.recon && rep.feasibility_equivalent;
  return rep;
}

/// One case's worth of product basis vectors that any fixed conclusive
/// element must annihilate when the corresponding ordering of the state
/// triple is loaded into the program registers.
struct AnnihilationConstraintSet {
  int case_id = 0;                             // 1..4, matching the orderings
  std::vector<std::array<int, 3>> triples;     // 1-based axis indices (i, j, k)
  std::vector<CVec> vectors;                   // basis vectors |g_i g_j g_k> in dim^3
};

namespace detail {
inline CVec product_basis_vector(Eigen::Index dim, int i, int j, int k) {
  CVec v = CVec::Zero(dim * dim * dim);
  v((i - 1) * dim * dim + (j - 1) * dim + (k - 1)) = Complex(1.0, 0.0);
  return v;
}

inline AnnihilationConstraintSet make_constraint_set(
    int case_id, Eigen::Index dim, std::initializer_list<std::array<int, 3>> triples) {
  AnnihilationConstraintSet set;
  set.case_id = case_id;
  for (const auto& t : triples) {
    set.triples.push_back(t);
    set.vectors.push_back(product_basis_vector(dim, t[0], t[1], t[2]));
  }
  return set;
}
}  // namespace detail

/// The four constraint families, one per ordering of the rank-2 triple that
/// a single fixed discriminator would have to serve. Enumeration order of
/// the triples inside each family is fixed and load-bearing for the
/// negative-control knob. dim > 3 embeds the same triple on the first three
/// axes of a larger space.
inline std::vector<AnnihilationConstraintSet> theorem2_constraints(Eigen::Index dim = 3) {
  if (dim < 3) throw Error(Errc::range_error, "theorem2_constraints: need dim >= 3");
  std::vector<AnnihilationConstraintSet> sets;
  sets.push_back(detail::make_constraint_set(1, dim,
                                             {{{1, 2, 2}},
                                              {{1, 2, 3}},
                                              {{1, 3, 2}},
                                              {{1, 3, 3}},
                                              {{2, 2, 2}},
                                              {{2, 2, 3}},
                                              {{2, 3, 2}},
                                              {{2, 3, 3}}}));
  sets.push_back(detail::make_constraint_set(2, dim,
                                             {{{2, 1, 1}},
                                              {{2, 1, 2}},
                                              {{2, 2, 1}},
                                              {{2, 2, 2}},
                                              {{3, 1, 1}},
                                              {{3, 1, 2}},
                                              {{3, 2, 1}},
                                              {{3, 2, 2}}}));
  sets.push_back(detail::make_constraint_set(3, dim,
                                             {{{1, 1, 1}},
                                              {{1, 1, 3}},
                                              {{1, 3, 1}},
                                              {{1, 3, 3}},
                                              {{2, 1, 1}},
                                              {{2, 1, 3}},
                                              {{2, 3, 1}},
                                              {{2, 3, 3}}}));
  sets.push_back(detail::make_constraint_set(4, dim,
                                             {{{1, 1, 1}},
                                              {{1, 1, 2}},
                                              {{1, 2, 1}},
                                              {{1, 2, 2}},
                                              {{3, 1, 1}},
                                              {{3, 1, 2}},
                                              {{3, 2, 1}},
                                              {{3, 2, 2}}}));
  return sets;
}

struct Theorem2Options {
  double a1 = 0.5;
  double b1 = 0.5;
  double c1 = 0.5;
  Eigen::Index dim = 3;
  /// Negative control: drop vector `second` (0-based) from case `first`
  /// (1-based) before building the annihilated span.
  std::optional<std::pair<int, int>> drop_constraint;
};

/// Evidence that no single measurement can unambiguously serve every
/// ordering of the triple, even though each pair alone is discriminable.
struct Theorem2Report {
  std::array<Eigen::Index, 4> constraint_counts{};
  Eigen::Index union_rank = 0;
  std::array<FeasibilityWitness, 3> pair_witnesses{};
  bool pairs_feasible = false;
  double containment_residual = 0.0;      // ||(I - P_S) rho_in (I - P_S)||_F
  double conclusive_trace = 0.0;          // Tr(Pi1 rho_in) for Pi1 = I - P_S
  double max_constraint_violation = 0.0;  // max over kept vectors of ||Pi1 v||
  double pi1_min_eigenvalue = 0.0;
  bool passed = false;
};

/// Builds the annihilated span S from all four constraint families, then
/// shows the contradiction: the case-1 composed input is contained in S, so
/// the only element compatible with every family has zero probability of
/// ever concluding "state 1" even though that probability must be positive
/// for a working discriminator.
inline Theorem2Report verify_theorem2(const Theorem2Options& opts = {},
                                      const Tolerances& tol = {},
                                      std::size_t dim_cap = limits::kDefaultDimCap) {
  auto [rho1, rho2, rho3] = counterexample_states(opts.a1, opts.b1, opts.c1, opts.dim);

  Theorem2Report rep;
  rep.pair_witnesses[0] = ud_feasible(rho1, rho2, tol);
  rep.pair_witnesses[1] = ud_feasible(rho2, rho3, tol);
  rep.pair_witnesses[2] = ud_feasible(rho1, rho3, tol);
  rep.pairs_feasible = rep.pair_witnesses[0].feasible && rep.pair_witnesses[1].feasible &&
                       rep.pair_witnesses[2].feasible;

  std::vector<AnnihilationConstraintSet> sets = theorem2_constraints(opts.dim);
  if (opts.drop_constraint) {
    auto [case_id, index] = *opts.drop_constraint;
    if (case_id < 1 || case_id > 4 || index < 0 ||
        index >= static_cast<int>(sets[case_id - 1].vectors.size()))
      throw Error(Errc::range_error, "verify_theorem2: drop_constraint out of range");
    sets[case_id - 1].vectors.erase(sets[case_id - 1].vectors.begin() + index);
    sets[case_id - 1].triples.erase(sets[case_id - 1].triples.begin() + index);
  }

  Eigen::Index total = 0;
  for (int c = 0; c < 4; ++c) {
    rep.constraint_counts[c] = static_cast<Eigen::Index>(sets[c].vectors.size());
    total += rep.constraint_counts[c];
  }
  Eigen::Index d3 = opts.dim * opts.dim * opts.dim;
  CMat stacked(d3, total);
  Eigen::Index col = 0;
  for (const auto& set : sets)
    for (const auto& v : set.vectors) stacked.col(col++) = v;
  CMat p_span = span_projector(stacked, tol);
  rep.union_rank = numerical_rank(stacked, tol);

  ProgrammableInstance inst = compose_instance(rho1, rho2, 1, dim_cap, tol);
  CMat pi1 = CMat::Identity(d3, d3) - p_span;
  pi1 = hermitian_part(pi1);
  rep.containment_residual = (pi1 * inst.rho_in_1.matrix() * pi1).norm();
  rep.conclusive_trace = real_trace_product(pi1, inst.rho_in_1.matrix());
  for (const auto& set : sets)
    for (const auto& v : set.vectors)
      rep.max_constraint_violation =
          std::max(rep.max_constraint_violation, (pi1 * v).norm());
  rep.pi1_min_eigenvalue = is_psd(pi1, tol.psd, tol).min_eigenvalue;

  rep.passed = rep.pairs_feasible && rep.containment_residual <= tol.recon &&
               std::abs(rep.conclusive_trace) <= tol.recon &&
               rep.max_constraint_violation <= tol.recon &&
               rep.pi1_min_eigenvalue >= -tol.psd;
  return rep;
}

/// Residual of the power law F(composed pair) = F(factors)^n.
struct FidelityPowerCheck {
  int n = 1;
  double base_fidelity = 0.0;
  double composed_fidelity = 0.0;
  double predicted = 0.0;
  double residual = 0.0;
};

inline FidelityPowerCheck composed_fidelity_check(const DensityMatrix& rho1,
                                                  const DensityMatrix& rho2, int n,
                                                  std::size_t dim_cap = limits::kDefaultDimCap,
                                                  const Tolerances& tol = {}) {
  FidelityPowerCheck chk;
  chk.n = n;
  chk.base_fidelity = fidelity(rho1, rho2, tol);
  ProgrammableInstance inst = compose_instance(rho1, rho2, n, dim_cap, tol);
  chk.composed_fidelity = fidelity(inst.rho_in_1, inst.rho_in_2, tol);
  chk.predicted = std::pow(chk.base_fidelity, n);
  chk.residual = std::abs(chk.composed_fidelity - chk.predicted);
  return chk;
}

/// Residual of multiplicativity F(a (x) b, c (x) d) = F(a,c) F(b,d).
struct ProductFidelityCheck {
  double product_fidelity = 0.0;
  double factored = 0.0;
  double residual = 0.0;
};

inline ProductFidelityCheck product_fidelity_check(const DensityMatrix& a,
                                                   const DensityMatrix& b,
                                                   const DensityMatrix& c,
                                                   const DensityMatrix& d,
                                                   std::size_t dim_cap = limits::kDefaultDimCap,
                                                   const Tolerances& tol = {}) {
  if (a.dim() != c.dim() || b.dim() != d.dim())
    throw Error(Errc::dimension_mismatch, "product_fidelity_check: factor dimensions differ");
  DensityMatrix ab(tensor(a.matrix(), b.matrix(), dim_cap), "", tol);
  DensityMatrix cd(tensor(c.matrix(), d.matrix(), dim_cap), "", tol);
  ProductFidelityCheck chk;
  chk.product_fidelity = fidelity(ab, cd, tol);
  chk.factored = fidelity(a, c, tol) * fidelity(b, d, tol);
  chk.residual = std::abs(chk.product_fidelity - chk.factored);
  return chk;
}

}  // namespace uqsd
