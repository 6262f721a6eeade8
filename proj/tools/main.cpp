// Command-line front end for the unambiguous-discrimination library.
//
// Subcommands: gen | bound | compare | verify | simulate | sweep.
// Stdout carries the report (JSON or aligned table); stderr carries one
// machine-readable JSON object per error. Exit codes are a stable contract:
//   0  success (for `verify`: the property held)
//   1  internal numerical failure
//   2  the requested discrimination is infeasible
//   3  validation failure (bad files, bad flags, bad ranges)
//   4  verification finding (a checked property genuinely failed)
//   5  constructor inapplicable to the inputs (wrong structure, not an error
//      in the inputs themselves)

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "uqsd/json_io.hpp"
#include "uqsd/uqsd.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration shared by every subcommand.

struct RunConfig {
  uqsd::Tolerances tol{};
  std::size_t dim_cap = uqsd::limits::kDefaultDimCap;
  std::string format = "table";
  std::uint64_t seed = 1;
  std::uint64_t trials = 100000;
};

// Smallest composed dimension any verifier needs is 3^2 = 9.
constexpr std::size_t kMinDimCap = 9;

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--tol-psd", cfg.tol.psd, "slack for positivity/validity checks")
      ->capture_default_str();
  cmd->add_option("--tol-clip", cfg.tol.clip_rel,
                  "relative eigenvalue clip separating support from noise")
      ->capture_default_str();
  cmd->add_option("--dim-cap", cfg.dim_cap, "largest composed dimension allowed")
      ->capture_default_str();
  cmd->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
}

void check_config(const RunConfig& cfg) {
  if (cfg.dim_cap < kMinDimCap)
    throw uqsd::Error(uqsd::Errc::range_error,
                      "config: --dim-cap must be at least " + std::to_string(kMinDimCap));
  if (cfg.trials < 1)
    throw uqsd::Error(uqsd::Errc::range_error, "config: --trials must be at least 1");
}

json config_json(const RunConfig& cfg, bool with_seed = false, bool with_trials = false) {
  json j{{"tolerances", uqsd::tolerances_to_json(cfg.tol)},
         {"dim_cap", cfg.dim_cap},
         {"format", cfg.format}};
  if (with_seed) j["seed"] = cfg.seed;
  if (with_trials) j["trials"] = cfg.trials;
  return j;
}

// ---------------------------------------------------------------------------
// Rendering. The table format is a flattened view of the exact same JSON
// document, so both formats carry identical scalar values by construction.

void flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, prefix.empty() ? key : prefix + "." + key, rows);
    return;
  }
  if (j.is_array()) {
    const bool scalars_only =
        std::all_of(j.begin(), j.end(), [](const json& e) { return !e.is_structured(); });
    if (scalars_only) {
      rows.emplace_back(prefix, j.dump());
    } else {
      int i = 0;
      for (const auto& e : j) flatten(e, prefix + "[" + std::to_string(i++) + "]", rows);
    }
    return;
  }
  rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
}

void print_table(const json& out) {
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(out, "", rows);
  std::size_t width = 0;
  for (const auto& [key, value] : rows) width = std::max(width, key.size());
  for (const auto& [key, value] : rows)
    std::cout << key << std::string(width - key.size() + 2, ' ') << value << "\n";
}

// Sweeps render as CSV in table mode: one line per instance, q_opt expanded
// into one column per copy count. Non-row scalars ride along as comments.
void print_sweep_csv(const json& out) {
  json meta = out;
  meta.erase("rows");
  std::vector<std::pair<std::string, std::string>> comments;
  flatten(meta, "", comments);
  for (const auto& [key, value] : comments) std::cout << "# " << key << " = " << value << "\n";

  const json& rows = out.at("rows");
  std::size_t n_max = 0;
  for (const auto& row : rows) n_max = std::max(n_max, row.at("q_opt").size());
  std::cout << "index,seed1,seed2,eta1,fidelity,t21,t12,regime_n1";
  for (std::size_t k = 1; k <= n_max; ++k) std::cout << ",q_opt_" << k;
  std::cout << ",case,verdict,monotone_violation\n";
  for (const auto& row : rows) {
    std::cout << row.at("index").dump() << "," << row.at("seed1").dump() << ","
              << row.at("seed2").dump() << "," << row.at("eta1").dump() << ","
              << row.at("fidelity").dump() << "," << row.at("t21").dump() << ","
              << row.at("t12").dump() << "," << row.at("regime_n1").get<std::string>();
    const json& q = row.at("q_opt");
    for (std::size_t k = 0; k < n_max; ++k)
      std::cout << "," << (k < q.size() ? q[k].dump() : "");
    std::cout << "," << row.at("case").get<std::string>() << ","
              << row.at("verdict").get<std::string>() << ","
              << row.at("monotone_violation").dump() << "\n";
  }
}

void print_report(const json& out, const RunConfig& cfg, bool sweep_layout = false) {
  if (cfg.format == "json") {
    std::cout << out.dump(2) << "\n";
  } else if (sweep_layout) {
    print_sweep_csv(out);
  } else {
    print_table(out);
  }
}

// ---------------------------------------------------------------------------
// Error plumbing.

int exit_code_for(uqsd::Errc c) {
  using uqsd::Errc;
  switch (c) {
    case Errc::not_feasible:
    case Errc::overlapping_supports:
      return 2;
    case Errc::not_commuting:
    case Errc::degenerate_overlap:
    case Errc::precondition_failed:
      return 5;
    case Errc::numerical_failure:
      return 1;
    default:
      return 3;
  }
}

void print_error_json(const std::string& code, const std::string& message) {
  json j{{"error", {{"code", code}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
}

// ---------------------------------------------------------------------------
// Shared helpers.

uqsd::PureState pure_from_density(const uqsd::DensityMatrix& rho, const uqsd::Tolerances& tol) {
  uqsd::SpectralDecomposition ed = uqsd::hermitian_eigen(rho.matrix(), tol);
  Eigen::Index top = 0;
  ed.eigenvalues.maxCoeff(&top);
  if (ed.eigenvalues(top) < 1.0 - 1e-9) {
    std::ostringstream oss;
    oss << "state '" << rho.label() << "' is not pure (largest eigenvalue "
        << ed.eigenvalues(top) << "); the pure-state constructor needs rank-1 inputs";
    throw uqsd::Error(uqsd::Errc::precondition_failed, oss.str());
  }
  return uqsd::PureState::normalized(ed.eigenvectors.col(top));
}

uqsd::Povm build_povm(const std::string& source, const std::string& povm_file,
                      const uqsd::DensityMatrix& rho1, const uqsd::DensityMatrix& rho2,
                      double eta1, double eta2, const uqsd::Tolerances& tol) {
  if (source == "pure") {
    uqsd::PureState psi1 = pure_from_density(rho1, tol);
    uqsd::PureState psi2 = pure_from_density(rho2, tol);
    return uqsd::pure_state_ud_povm(psi1, psi2, eta1, eta2, tol);
  }
  if (source == "commuting") return uqsd::commuting_ud_povm(rho1, rho2, tol);
  if (povm_file.empty())
    throw uqsd::Error(uqsd::Errc::validation_error,
                      "simulate: --povm file requires --povm-file PATH");
  return uqsd::load_povm(povm_file, tol);
}

std::pair<int, int> parse_drop_constraint(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
    throw uqsd::Error(uqsd::Errc::validation_error,
                      "--drop-constraint expects CASE:INDEX, e.g. 1:2");
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw uqsd::Error(uqsd::Errc::validation_error,
                      "--drop-constraint expects integers CASE:INDEX, got '" + text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unambiguous discrimination of mixed-state pairs: optimal failure bounds,\n"
               "programmable composition, structural verifiers, and POVM simulation."};
  app.require_subcommand(1);

  RunConfig cfg;
  std::function<int()> action;

  // ---- gen -----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "write state fixtures to JSON files");
  gen->require_subcommand(1);

  {
    auto* ce = gen->add_subcommand("counterexample",
                                   "three qutrit states pairwise discriminable yet jointly "
                                   "unserveable by one measurement");
    auto a1 = std::make_shared<double>(0.5);
    auto b1 = std::make_shared<double>(0.5);
    auto c1 = std::make_shared<double>(0.5);
    auto dim = std::make_shared<Eigen::Index>(3);
    auto prefix = std::make_shared<std::string>();
    ce->add_option("--a1", *a1, "first diagonal weight of state 1")->capture_default_str();
    ce->add_option("--b1", *b1, "first diagonal weight of state 2")->capture_default_str();
    ce->add_option("--c1", *c1, "first diagonal weight of state 3")->capture_default_str();
    ce->add_option("--dim", *dim, "embedding dimension (>= 3)")->capture_default_str();
    ce->add_option("--out-prefix", *prefix, "files are written as PREFIX1.json .. PREFIX3.json")
        ->required();
    add_common_options(ce, cfg);
    ce->callback([&, a1, b1, c1, dim, prefix] {
      action = [&, a1, b1, c1, dim, prefix]() -> int {
        check_config(cfg);
        auto [r1, r2, r3] = uqsd::counterexample_states(*a1, *b1, *c1, *dim);
        json written = json::array();
        int i = 1;
        for (const uqsd::DensityMatrix* rho : {&r1, &r2, &r3}) {
          std::string path = *prefix + std::to_string(i++) + ".json";
          uqsd::save_density(path, *rho);
          written.push_back(path);
        }
        json out{{"command", "gen counterexample"},
                 {"written", written},
                 {"labels", {r1.label(), r2.label(), r3.label()}},
                 {"dim", *dim},
                 {"config", config_json(cfg)}};
        print_report(out, cfg);
        return 0;
      };
    });
  }

  {
    auto* rnd = gen->add_subcommand("random", "one random density matrix of a chosen rank");
    auto dim = std::make_shared<Eigen::Index>(3);
    auto rank = std::make_shared<Eigen::Index>(2);
    auto label = std::make_shared<std::string>("random");
    auto out_path = std::make_shared<std::string>();
    rnd->add_option("--dim", *dim, "dimension")->capture_default_str();
    rnd->add_option("--rank", *rank, "rank (1 <= rank <= dim)")->capture_default_str();
    rnd->add_option("--label", *label, "label stored in the file")->capture_default_str();
    rnd->add_option("--out", *out_path, "output file")->required();
    rnd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    add_common_options(rnd, cfg);
    rnd->callback([&, dim, rank, label, out_path] {
      action = [&, dim, rank, label, out_path]() -> int {
        check_config(cfg);
        uqsd::DensityMatrix rho = uqsd::random_density(*dim, *rank, cfg.seed, *label);
        uqsd::save_density(*out_path, rho);
        json out{{"command", "gen random"},
                 {"written", {*out_path}},
                 {"labels", {rho.label()}},
                 {"dim", *dim},
                 {"rank", *rank},
                 {"config", config_json(cfg, /*seed=*/true)}};
        print_report(out, cfg);
        return 0;
      };
    });
  }

  {
    auto* pure = gen->add_subcommand(
        "pure", "a pure-state pair with a prescribed overlap <psi1|psi2> = s");
    auto overlap = std::make_shared<double>();
    auto dim = std::make_shared<Eigen::Index>(2);
    auto prefix = std::make_shared<std::string>();
    pure->add_option("--overlap", *overlap, "overlap s in [0, 1]")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    pure->add_option("--dim", *dim, "embedding dimension (>= 2)")->capture_default_str();
    pure->add_option("--out-prefix", *prefix, "files are written as PREFIX1.json, PREFIX2.json")
        ->required();
    add_common_options(pure, cfg);
    pure->callback([&, overlap, dim, prefix] {
      action = [&, overlap, dim, prefix]() -> int {
        check_config(cfg);
        if (*dim < 2)
          throw uqsd::Error(uqsd::Errc::range_error, "gen pure: need --dim >= 2");
        const double s = *overlap;
        uqsd::CVec v1 = uqsd::CVec::Zero(*dim), v2 = uqsd::CVec::Zero(*dim);
        v1(0) = 1.0;
        v2(0) = s;
        v2(1) = std::sqrt(std::max(0.0, 1.0 - s * s));
        uqsd::DensityMatrix r1 =
            uqsd::density_from_pure(uqsd::PureState::normalized(v1), "pure1");
        uqsd::DensityMatrix r2 =
            uqsd::density_from_pure(uqsd::PureState::normalized(v2), "pure2");
        json written = json::array();
        uqsd::save_density(*prefix + "1.json", r1);
        written.push_back(*prefix + "1.json");
        uqsd::save_density(*prefix + "2.json", r2);
        written.push_back(*prefix + "2.json");
        json out{{"command", "gen pure"},
                 {"written", written},
                 {"labels", {r1.label(), r2.label()}},
                 {"overlap", s},
                 {"dim", *dim},
                 {"config", config_json(cfg)}};
        print_report(out, cfg);
        return 0;
      };
    });
  }

  // ---- bound ---------------------------------------------------------------
  {
    auto* b = app.add_subcommand(
        "bound", "optimal failure probability for telling two states apart with n copies");
    auto s1 = std::make_shared<std::string>();
    auto s2 = std::make_shared<std::string>();
    auto eta1 = std::make_shared<double>(0.5);
    auto eta2 = std::make_shared<double>(-1.0);
    auto n = std::make_shared<int>(1);
    auto skip_certs = std::make_shared<bool>(false);
    auto disjoint = std::make_shared<bool>(false);
    b->add_option("state1", *s1, "JSON file with the first density matrix")->required();
    b->add_option("state2", *s2, "JSON file with the second density matrix")->required();
    b->add_option("--eta1", *eta1, "prior probability of state 1")->capture_default_str();
    b->add_option("--eta2", *eta2, "prior of state 2 (default: 1 - eta1)");
    b->add_option("-n,--n", *n, "number of data copies")->capture_default_str();
    b->add_flag("--skip-certificates", *skip_certs,
                "skip the positive-semidefinite attainability certificates");
    b->add_flag("--require-disjoint-supports", *disjoint,
                "reject pairs whose supports meet outside the origin");
    add_common_options(b, cfg);
    b->callback([&, s1, s2, eta1, eta2, n, skip_certs, disjoint] {
      action = [&, s1, s2, eta1, eta2, n, skip_certs, disjoint]() -> int {
        check_config(cfg);
        uqsd::UdProblem problem(uqsd::load_density(*s1, cfg.tol),
                                uqsd::load_density(*s2, cfg.tol), *eta1, *eta2);
        uqsd::BoundOptions opts{cfg.tol, cfg.dim_cap,
                                *skip_certs ? uqsd::CertificatePolicy::skip
                                            : uqsd::CertificatePolicy::compute,
                                *disjoint};
        uqsd::UdBoundReport rep = uqsd::optimal_failure_bound(problem, *n, opts);
        json out = uqsd::bound_report_to_json(rep);
        out["config"] = config_json(cfg);
        print_report(out, cfg);
        return 0;
      };
    });
  }

  // ---- compare ---------------------------------------------------------------
  {
    auto* c = app.add_subcommand(
        "compare", "n-copy joint measurement versus n independent single-copy rounds");
    auto s1 = std::make_shared<std::string>();
    auto s2 = std::make_shared<std::string>();
    auto eta1 = std::make_shared<double>(0.5);
    auto eta2 = std::make_shared<double>(-1.0);
    auto n = std::make_shared<int>(2);
    auto disjoint = std::make_shared<bool>(false);
    c->add_option("state1", *s1, "JSON file with the first density matrix")->required();
    c->add_option("state2", *s2, "JSON file with the second density matrix")->required();
    c->add_option("--eta1", *eta1, "prior probability of state 1")->capture_default_str();
    c->add_option("--eta2", *eta2, "prior of state 2 (default: 1 - eta1)");
    c->add_option("-n,--n", *n, "number of data copies")->capture_default_str();
    c->add_flag("--require-disjoint-supports", *disjoint,
                "reject pairs whose supports meet outside the origin");
    add_common_options(c, cfg);
    c->callback([&, s1, s2, eta1, eta2, n, disjoint] {
      action = [&, s1, s2, eta1, eta2, n, disjoint]() -> int {
        check_config(cfg);
        uqsd::UdProblem problem(uqsd::load_density(*s1, cfg.tol),
                                uqsd::load_density(*s2, cfg.tol), *eta1, *eta2);
        uqsd::BoundOptions opts{cfg.tol, cfg.dim_cap, uqsd::CertificatePolicy::skip,
                                *disjoint};
        uqsd::ComparisonReport rep = uqsd::compare_bounds(problem, *n, opts);
        json out = uqsd::comparison_report_to_json(rep);
        out["config"] = config_json(cfg);
        print_report(out, cfg);
        return 0;
      };
    });
  }

  // ---- verify ----------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "run one of the structural verifiers");
  verify->require_subcommand(1);

  {
    auto* t1 = verify->add_subcommand(
        "theorem1", "a working discriminator for one copy lifts to every composed instance");
    auto s1 = std::make_shared<std::string>();
    auto s2 = std::make_shared<std::string>();
    auto source = std::make_shared<std::string>("commuting");
    auto povm_file = std::make_shared<std::string>();
    auto eta1 = std::make_shared<double>(0.5);
    t1->add_option("state1", *s1, "JSON file with the first density matrix (optional)");
    t1->add_option("state2", *s2, "JSON file with the second density matrix (optional)");
    t1->add_option("--povm", *source, "measurement source")
        ->check(CLI::IsMember({"commuting", "pure", "file"}))
        ->capture_default_str();
    t1->add_option("--povm-file", *povm_file, "measurement JSON (with --povm file)");
    t1->add_option("--eta1", *eta1, "prior used by the pure-state constructor")
        ->capture_default_str();
    add_common_options(t1, cfg);
    t1->callback([&, s1, s2, source, povm_file, eta1] {
      action = [&, s1, s2, source, povm_file, eta1]() -> int {
        check_config(cfg);
        if (s1->empty() != s2->empty())
          throw uqsd::Error(uqsd::Errc::validation_error,
                            "verify theorem1: give both state files or neither");
        std::optional<uqsd::UdProblem> problem;
        if (s1->empty()) {
          auto [r1, r2, r3] = uqsd::counterexample_states(0.5, 0.5, 0.5);
          problem.emplace(r1, r2, *eta1);
        } else {
          problem.emplace(uqsd::load_density(*s1, cfg.tol), uqsd::load_density(*s2, cfg.tol),
                          *eta1);
        }
        uqsd::Povm povm = build_povm(*source, *povm_file, problem->rho1, problem->rho2,
                                     problem->eta1, problem->eta2, cfg.tol);
        uqsd::Theorem1Report rep =
            uqsd::verify_theorem1(problem->rho1, problem->rho2, povm, cfg.tol, cfg.dim_cap);
        json out = uqsd::theorem1_report_to_json(rep);
        out["config"] = config_json(cfg);
        print_report(out, cfg);
        return rep.passed ? 0 : 4;
      };
    });
  }

  {
    auto* t2 = verify->add_subcommand(
        "theorem2",
        "no single measurement unambiguously serves all orderings of a state triple");
    auto opts = std::make_shared<uqsd::Theorem2Options>();
    auto drop = std::make_shared<std::string>();
    t2->add_option("--a1", opts->a1, "first diagonal weight of state 1")->capture_default_str();
    t2->add_option("--b1", opts->b1, "first diagonal weight of state 2")->capture_default_str();
    t2->add_option("--c1", opts->c1, "first diagonal weight of state 3")->capture_default_str();
    t2->add_option("--dim", opts->dim, "single-register dimension (>= 3)")
        ->capture_default_str();
    t2->add_option("--drop-constraint", *drop, "")->group("");  // negative-control hook
    add_common_options(t2, cfg);
    t2->callback([&, opts, drop] {
      action = [&, opts, drop]() -> int {
        check_config(cfg);
        uqsd::Theorem2Options o = *opts;
        if (!drop->empty()) o.drop_constraint = parse_drop_constraint(*drop);
        uqsd::Theorem2Report rep = uqsd::verify_theorem2(o, cfg.tol, cfg.dim_cap);
        json out = uqsd::theorem2_report_to_json(rep);
        out["config"] = config_json(cfg);
        print_report(out, cfg);
        return rep.passed ? 0 : 4;
      };
    });
  }

  {
    auto* l1 = verify->add_subcommand(
        "lemma1", "fidelity and support-overlap traces obey exact power laws under composition");
    auto dim = std::make_shared<Eigen::Index>(3);
    auto n = std::make_shared<int>(2);
    auto samples = std::make_shared<int>(50);
    auto tolerance = std::make_shared<double>(1e-8);
    l1->add_option("--dim", *dim, "single-register dimension")->capture_default_str();
    l1->add_option("-n,--n", *n, "number of data copies")->capture_default_str();
    l1->add_option("--seeds", *samples, "number of random pairs")->capture_default_str();
    l1->add_option("--tolerance", *tolerance, "pass threshold on the max residual")
        ->capture_default_str();
    l1->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    add_common_options(l1, cfg);
    l1->callback([&, dim, n, samples, tolerance] {
      action = [&, dim, n, samples, tolerance]() -> int {
        check_config(cfg);
        if (*samples < 1)
          throw uqsd::Error(uqsd::Errc::range_error, "verify lemma1: need --seeds >= 1");
        double max_f = 0.0, max_t21 = 0.0, max_t12 = 0.0;
        for (int i = 0; i < *samples; ++i) {
          const Eigen::Index rank1 = 1 + (i % *dim);
          const Eigen::Index rank2 = 1 + ((i / 2) % *dim);
          uqsd::DensityMatrix r1 = uqsd::random_density_balanced(
              *dim, rank1, uqsd::split_seed(cfg.seed, 1000 + 2 * i), "a");
          uqsd::DensityMatrix r2 = uqsd::random_density_balanced(
              *dim, rank2, uqsd::split_seed(cfg.seed, 1001 + 2 * i), "b");
          uqsd::FidelityPowerCheck chk =
              uqsd::composed_fidelity_check(r1, r2, *n, cfg.dim_cap, cfg.tol);
          max_f = std::max(max_f, chk.residual);

          uqsd::CMat p1 = uqsd::support_projector(r1, cfg.tol);
          uqsd::CMat p2 = uqsd::support_projector(r2, cfg.tol);
          const double t21 = uqsd::support_overlap_trace(p2, r1);
          const double t12 = uqsd::support_overlap_trace(p1, r2);
          uqsd::ProgrammableInstance inst =
              uqsd::compose_instance(r1, r2, *n, cfg.dim_cap, cfg.tol);
          uqsd::CMat p1_in = uqsd::support_projector(inst.rho_in_1, cfg.tol);
          uqsd::CMat p2_in = uqsd::support_projector(inst.rho_in_2, cfg.tol);
          max_t21 = std::max(max_t21, std::abs(uqsd::support_overlap_trace(p2_in, inst.rho_in_1) -
                                               std::pow(t21, *n)));
          max_t12 = std::max(max_t12, std::abs(uqsd::support_overlap_trace(p1_in, inst.rho_in_2) -
                                               std::pow(t12, *n)));
        }
        const bool passed =
            max_f <= *tolerance && max_t21 <= *tolerance && max_t12 <= *tolerance;
        json out{{"target", "lemma1"},
                 {"dim", *dim},
                 {"n", *n},
                 {"samples", *samples},
                 {"tolerance", *tolerance},
                 {"max_fidelity_residual", max_f},
                 {"max_t21_residual", max_t21},
                 {"max_t12_residual", max_t12},
                 {"passed", passed},
                 {"config", config_json(cfg, /*seed=*/true)}};
        print_report(out, cfg);
        return passed ? 0 : 4;
      };
    });
  }

  {
    auto* e16 = verify->add_subcommand(
        "eq16", "fidelity is multiplicative across tensor products of independent pairs");
    auto dim1 = std::make_shared<Eigen::Index>(3);
    auto dim2 = std::make_shared<Eigen::Index>(3);
    auto samples = std::make_shared<int>(30);
    auto tolerance = std::make_shared<double>(1e-8);
    e16->add_option("--dim1", *dim1, "dimension of the first factor")->capture_default_str();
    e16->add_option("--dim2", *dim2, "dimension of the second factor")->capture_default_str();
    e16->add_option("--seeds", *samples, "number of random quadruples")->capture_default_str();
    e16->add_option("--tolerance", *tolerance, "pass threshold on the max residual")
        ->capture_default_str();
    e16->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    add_common_options(e16, cfg);
    e16->callback([&, dim1, dim2, samples, tolerance] {
      action = [&, dim1, dim2, samples, tolerance]() -> int {
        check_config(cfg);
        if (*samples < 1)
          throw uqsd::Error(uqsd::Errc::range_error, "verify eq16: need --seeds >= 1");
        double max_res = 0.0;
        for (int i = 0; i < *samples; ++i) {
          auto make = [&](Eigen::Index d, int slot) {
            const Eigen::Index rank = 1 + ((i + slot) % d);
            return uqsd::random_density_balanced(
                d, rank, uqsd::split_seed(cfg.seed, 2000 + 4 * i + slot), "q");
          };
          uqsd::ProductFidelityCheck chk = uqsd::product_fidelity_check(
              make(*dim1, 0), make(*dim2, 1), make(*dim1, 2), make(*dim2, 3), cfg.dim_cap,
              cfg.tol);
          max_res = std::max(max_res, chk.residual);
        }
        const bool passed = max_res <= *tolerance;
        json out{{"target", "eq16"},
                 {"dim1", *dim1},
                 {"dim2", *dim2},
                 {"samples", *samples},
                 {"tolerance", *tolerance},
                 {"max_residual", max_res},
                 {"passed", passed},
                 {"config", config_json(cfg, /*seed=*/true)}};
        print_report(out, cfg);
        return passed ? 0 : 4;
      };
    });
  }

  // ---- simulate ---------------------------------------------------------------
  {
    auto* sim = app.add_subcommand(
        "simulate", "Monte Carlo trials of an explicit three-outcome discriminator");
    auto s1 = std::make_shared<std::string>();
    auto s2 = std::make_shared<std::string>();
    auto eta1 = std::make_shared<double>(0.5);
    auto eta2 = std::make_shared<double>(-1.0);
    auto source = std::make_shared<std::string>("commuting");
    auto povm_file = std::make_shared<std::string>();
    sim->add_option("state1", *s1, "JSON file with the first density matrix")->required();
    sim->add_option("state2", *s2, "JSON file with the second density matrix")->required();
    sim->add_option("--eta1", *eta1, "prior probability of state 1")->capture_default_str();
    sim->add_option("--eta2", *eta2, "prior of state 2 (default: 1 - eta1)");
    sim->add_option("--povm", *source, "measurement source")
        ->check(CLI::IsMember({"pure", "commuting", "file"}))
        ->capture_default_str();
    sim->add_option("--povm-file", *povm_file, "measurement JSON (with --povm file)");
    sim->add_option("--trials", cfg.trials, "number of Monte Carlo trials")
        ->capture_default_str();
    sim->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    add_common_options(sim, cfg);
    sim->callback([&, s1, s2, eta1, eta2, source, povm_file] {
      action = [&, s1, s2, eta1, eta2, source, povm_file]() -> int {
        check_config(cfg);
        uqsd::UdProblem problem(uqsd::load_density(*s1, cfg.tol),
                                uqsd::load_density(*s2, cfg.tol), *eta1, *eta2);
        uqsd::Povm povm = build_povm(*source, *povm_file, problem.rho1, problem.rho2,
                                     problem.eta1, problem.eta2, cfg.tol);
        uqsd::SimulationStats stats =
            uqsd::simulate_ud(problem, povm, cfg.trials, cfg.seed, cfg.tol);
        uqsd::UdRates exact = uqsd::exact_ud_rates(povm, problem, cfg.tol);

        json out{{"povm_source", *source},
                 {"stats", uqsd::simulation_stats_to_json(stats)},
                 {"exact",
                  {{"success", exact.success}, {"failure", exact.failure},
                   {"error", exact.error}}},
                 {"config", config_json(cfg, /*seed=*/true, /*trials=*/true)}};
        const double se = std::max(stats.failure_se, 1e-15);
        out["comparison"] = json{
            {"sim_failure_minus_exact", stats.failure_rate - exact.failure},
            {"sim_failure_sigma_from_exact", (stats.failure_rate - exact.failure) / se}};
        try {
          uqsd::BoundOptions bopts{cfg.tol, cfg.dim_cap, uqsd::CertificatePolicy::skip, false};
          uqsd::UdBoundReport rep = uqsd::optimal_failure_bound(problem, 1, bopts);
          out["bound"] = json{{"q_opt", rep.q_opt}, {"regime", uqsd::regime_name(rep.regime)}};
          out["comparison"]["povm_failure_minus_bound"] = exact.failure - rep.q_opt;
        } catch (const uqsd::Error&) {
          out["bound"] = nullptr;  // bound unavailable for this pair; stats stand alone
        }
        print_report(out, cfg);
        return 0;
      };
    });
  }

  // ---- sweep --------------------------------------------------------------------
  {
    auto* sw = app.add_subcommand(
        "sweep", "random instances: bound per copy count, regimes, comparison verdicts");
    auto opts = std::make_shared<uqsd::SweepOptions>();
    sw->add_option("--dim", opts->dim, "state dimension")->capture_default_str();
    sw->add_option("--rank1", opts->rank1, "rank of state 1")->capture_default_str();
    sw->add_option("--rank2", opts->rank2, "rank of state 2")->capture_default_str();
    sw->add_option("--n-max", opts->n_max, "largest copy count")->capture_default_str();
    sw->add_option("--count", opts->count, "number of instances")->capture_default_str();
    sw->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    add_common_options(sw, cfg);
    sw->callback([&, opts] {
      action = [&, opts]() -> int {
        check_config(cfg);
        uqsd::SweepOptions o = *opts;
        o.seed = cfg.seed;
        o.tol = cfg.tol;
        o.dim_cap = cfg.dim_cap;
        uqsd::SweepResult res = uqsd::run_sweep(o);
        json out = uqsd::sweep_result_to_json(res);
        out["count"] = static_cast<int>(res.rows.size());
        out["config"] = config_json(cfg, /*seed=*/true);
        print_report(out, cfg, /*sweep_layout=*/true);
        return 0;
      };
    });
  }

  // ---- dispatch ----------------------------------------------------------------
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    print_error_json(uqsd::errc_name(uqsd::Errc::validation_error), e.what());
    return 3;
  }

  try {
    return action ? action() : 3;
  } catch (const uqsd::Error& e) {
    print_error_json(uqsd::errc_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    print_error_json("internal_error", e.what());
    return 1;
  }
}
