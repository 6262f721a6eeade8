// Tour of the library: build a pair of mixed states, compute the optimal
// unambiguous-discrimination failure probability with its attainability
// certificates, compare copy counts, compose programmable instances,
// construct explicit measurements, and check them by exact rates and by
// Monte Carlo sampling. Every quantity printed here is also reachable
// through the `uqsd` command-line tool.
#include <cstdio>

#include "uqsd/uqsd.hpp"

int main() {
  using namespace uqsd;

  // --- A pair of rank-2 qutrit states whose supports overlap on one axis. ---
  auto [rho1, rho2, rho3] = counterexample_states(0.5, 0.5, 0.5);
  (void)rho3;  // third member of the family; the pair is enough here

  double f = fidelity(rho1, rho2);
  CMat p1 = support_projector(rho1);
  CMat p2 = support_projector(rho2);
  double t21 = support_overlap_trace(p2, rho1);
  double t12 = support_overlap_trace(p1, rho2);
  std::printf("states           : two rank-2 qutrits, fidelity F = %.6f\n", f);
  std::printf("support overlaps : Tr(P2 rho1) = %.6f, Tr(P1 rho2) = %.6f\n", t21, t12);

  FeasibilityWitness w = ud_feasible(rho1, rho2);
  std::printf("feasible         : %s (ranks %td + %td span %td dimensions)\n",
              w.feasible ? "yes" : "no", w.rank1, w.rank2, w.rank_joint);

  // --- Optimal failure probability at equal priors, one and two copies. ---
  UdProblem problem(rho1, rho2, 0.5);
  UdBoundReport b1 = optimal_failure_bound(problem, 1);
  UdBoundReport b2 = optimal_failure_bound(problem, 2);
  std::printf("\noptimum, n = 1   : q = %.10f  [%s regime, attainable: %s]\n", b1.q_opt,
              regime_name(b1.regime), attainability_name(b1.attainable));
  std::printf("optimum, n = 2   : q = %.10f  (composed dimension %td)\n", b2.q_opt,
              b2.composed_dim);
  if (b1.cert_residual_1 && b1.cert_residual_2)
    std::printf("certificates     : min eigenvalues %.3e and %.3e (>= 0 proves the\n"
                "                   failure weight cannot be squeezed any further)\n",
                *b1.cert_residual_1, *b1.cert_residual_2);

  // --- How much do extra copies help, and when is the ordering decided? ---
  ComparisonReport cmp = compare_bounds(problem, 3);
  std::printf("\nthree copies     : q(3) = %.10f vs q(1) = %.10f -> %s (%s)\n", cmp.q_opt_n,
              cmp.q_opt_1, verdict_name(cmp.verdict), comparison_case_name(cmp.case_id));

  // --- Composition: the n-copy instance behaves like fidelity to the n-th. ---
  ProgrammableInstance inst = compose_instance(rho1, rho2, 2);
  FidelityPowerCheck fp = composed_fidelity_check(rho1, rho2, 2);
  std::printf("\ncomposed n = 2   : total dimension %td, F(composed) = %.10f,\n"
              "                   F^2 = %.10f, residual %.3e\n",
              inst.total_dim, fp.composed_fidelity, fp.predicted, fp.residual);

  // --- An explicit measurement achieving the optimum (the pair commutes). ---
  Povm povm = commuting_ud_povm(rho1, rho2);
  UdRates exact = exact_ud_rates(povm, problem);
  std::printf("\nmeasurement      : exact failure %.10f, error %.3e (optimum %.10f)\n",
              exact.failure, exact.error, b1.q_opt);

  Theorem1Report lift = verify_theorem1(rho1, rho2, povm);
  std::printf("lift check       : single-copy rates survive composition, max trace\n"
              "                   deviation %.3e -> %s\n",
              lift.max_trace_deviation, lift.passed ? "passed" : "FAILED");

  // --- Monte Carlo: sample the measurement and compare with exact rates. ---
  SimulationStats sim = simulate_ud(problem, povm, 200000, 42);
  std::printf("\nsimulation       : %llu trials, failure %.5f +/- %.5f, errors %llu\n",
              static_cast<unsigned long long>(sim.trials), sim.failure_rate, sim.failure_se,
              static_cast<unsigned long long>(sim.counts[0][2] + sim.counts[1][1]));

  // --- Pure states get a dedicated constructor covering all three regimes. ---
  CVec a(2), b(2);
  a << 1.0, 0.0;
  b << 0.6, 0.8;  // overlap 0.6
  PureState psi1(a), psi2(b);
  UdProblem pure_problem(density_from_pure(psi1), density_from_pure(psi2), 0.3);
  Povm pure_povm = pure_state_ud_povm(psi1, psi2, 0.3);
  UdRates pure_exact = exact_ud_rates(pure_povm, pure_problem);
  UdBoundReport pure_bound = optimal_failure_bound(pure_problem, 1);
  std::printf("\npure pair        : overlap 0.6, priors 0.3/0.7 -> failure %.10f,\n"
              "                   bound %.10f [%s regime]\n",
              pure_exact.failure, pure_bound.q_opt, regime_name(pure_bound.regime));

  // --- Random survey: the optimum never degrades as copies are added. ---
  SweepOptions sw;
  sw.count = 20;
  sw.n_max = 3;
  sw.seed = 7;
  SweepResult sweep = run_sweep(sw);
  std::printf("\nsweep            : %zu random instances, n up to %d, monotonicity "
              "violations: %d\n",
              sweep.rows.size(), sw.n_max, sweep.violations);
  return 0;
}
