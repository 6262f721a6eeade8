#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "uqsd/discrimination.hpp"
#include "uqsd/povm.hpp"
#include "uqsd/sweep.hpp"
#include "uqsd/verify.hpp"

namespace uqsd {

using json = nlohmann::json;

/// Matrices are nested row-major arrays of [re, im] pairs.
inline json matrix_to_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMat matrix_from_json(const json& j, Eigen::Index expect_dim = -1) {
  if (!j.is_array() || j.empty())
    throw Error(Errc::validation_error, "matrix: expected a nonempty array of rows");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j.front().is_array() ? j.front().size() : 0);
  if (cols == 0) throw Error(Errc::validation_error, "matrix: empty row");
  if (expect_dim >= 0 && (rows != expect_dim || cols != expect_dim))
    throw Error(Errc::validation_error,
                "matrix: declared dim " + std::to_string(expect_dim) + " but data is " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(Errc::validation_error, "matrix: ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& cell = row[k];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number())
        throw Error(Errc::validation_error, "matrix: entries must be [re, im] pairs");
      m(i, k) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

inline json density_to_json(const DensityMatrix& rho) {
  return json{{"dim", rho.dim()}, {"matrix", matrix_to_json(rho.matrix())},
              {"label", rho.label()}};
}

/// Parses and validates; rejected files report every violated invariant with
/// its residual.
inline DensityMatrix density_from_json(const json& j, const Tolerances& tol = {}) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("matrix"))
    throw Error(Errc::validation_error, "density: need an object with 'dim' and 'matrix'");
  Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  CMat m = matrix_from_json(j.at("matrix"), dim);
  std::string label = j.value("label", "");
  DensityValidation v = validate_density(m, tol);
  if (!v.ok) {
    std::string what = "density '" + label + "' rejected:";
    for (const auto& s : v.violations) what += " " + s + ";";
    throw Error(Errc::validation_error, what);
  }
  return DensityMatrix(std::move(m), std::move(label), tol);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(Errc::validation_error, path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << j.dump(2) << "\n";
}

inline DensityMatrix load_density(const std::string& path, const Tolerances& tol = {}) {
  return density_from_json(load_json_file(path), tol);
}

inline void save_density(const std::string& path, const DensityMatrix& rho) {
  save_json_file(path, density_to_json(rho));
}

inline json povm_to_json(const Povm& povm) {
  json elements = json::array();
  for (const auto& e : povm.elements) elements.push_back(matrix_to_json(e));
  return json{{"dim", povm.dim()}, {"elements", std::move(elements)}};
}

inline Povm povm_from_json(const json& j, const Tolerances& tol = {}) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("elements"))
    throw Error(Errc::validation_error, "povm: need an object with 'dim' and 'elements'");
  Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  Povm povm;
  for (const json& e : j.at("elements")) povm.elements.push_back(matrix_from_json(e, dim));
  PovmValidation v = validate_povm(povm, tol);
  if (!v.ok) {
    std::string what = "povm rejected:";
    for (const auto& s : v.violations) what += " " + s + ";";
    throw Error(Errc::invalid_povm, what);
  }
  return povm;
}

inline Povm load_povm(const std::string& path, const Tolerances& tol = {}) {
  return povm_from_json(load_json_file(path), tol);
}

inline json tolerances_to_json(const Tolerances& t) {
  return json{{"herm", t.herm},   {"psd", t.psd},   {"trace", t.trace}, {"recon", t.recon},
              {"sqrt", t.sqrt},   {"orth", t.orth}, {"rank", t.rank},
              {"clip_rel", t.clip_rel}};
}

inline json feasibility_to_json(const FeasibilityWitness& w) {
  return json{{"feasible", w.feasible},
              {"rank1", w.rank1},
              {"rank2", w.rank2},
              {"rank_joint", w.rank_joint}};
}

inline json bound_report_to_json(const UdBoundReport& r) {
  json j{{"n", r.n},
         {"eta1", r.eta1},
         {"eta2", r.eta2},
         {"fidelity", r.fidelity},
         {"t21", r.t21},
         {"t12", r.t12},
         {"regime", regime_name(r.regime)},
         {"q_opt", r.q_opt},
         {"cert_scale_1", r.cert_scale_1},
         {"cert_scale_2", r.cert_scale_2},
         {"attainable", attainability_name(r.attainable)},
         {"composed_dim", r.composed_dim},
         {"feasibility", feasibility_to_json(r.feasibility)},
         {"config", {{"tolerances", tolerances_to_json(r.tol)}, {"dim_cap", r.dim_cap}}}};
  j["cert_residual_1"] = r.cert_residual_1 ? json(*r.cert_residual_1) : json(nullptr);
  j["cert_residual_2"] = r.cert_residual_2 ? json(*r.cert_residual_2) : json(nullptr);
  return j;
}

inline json comparison_report_to_json(const ComparisonReport& r) {
  json j{{"n", r.n},
         {"eta1", r.eta1},
         {"eta2", r.eta2},
         {"prior_ratio", r.r},
         {"fidelity", r.fidelity},
         {"t21", r.t21},
         {"t12", r.t12},
         {"q_opt_n", r.q_opt_n},
         {"q_opt_1", r.q_opt_1},
         {"case", comparison_case_name(r.case_id)},
         {"verdict", verdict_name(r.verdict)},
         {"ordering_violation", r.ordering_violation}};
  if (r.excluded_window)
    j["excluded_window"] = json::array({r.excluded_window->first, r.excluded_window->second});
  else
    j["excluded_window"] = json(nullptr);
  return j;
}

inline json theorem1_report_to_json(const Theorem1Report& r) {
  return json{{"p1", r.p1},
              {"p2", r.p2},
              {"cross12", r.cross12},
              {"cross21", r.cross21},
              {"lifted_completeness", r.lifted_completeness},
              {"max_trace_deviation", r.max_trace_deviation},
              {"feasible_base", r.feasible_base},
              {"feasible_composed", r.feasible_composed},
              {"feasibility_equivalent", r.feasibility_equivalent},
              {"passed", r.passed}};
}

inline json theorem2_report_to_json(const Theorem2Report& r) {
  json witnesses = json::array();
  for (const auto& w : r.pair_witnesses) witnesses.push_back(feasibility_to_json(w));
  return json{{"constraint_counts", r.constraint_counts},
              {"union_rank", r.union_rank},
              {"pair_witnesses", std::move(witnesses)},
              {"pairs_feasible", r.pairs_feasible},
              {"containment_residual", r.containment_residual},
              {"conclusive_trace", r.conclusive_trace},
              {"max_constraint_violation", r.max_constraint_violation},
              {"pi1_min_eigenvalue", r.pi1_min_eigenvalue},
              {"passed", r.passed}};
}

inline json simulation_stats_to_json(const SimulationStats& s) {
  return json{{"trials", s.trials},
              {"seed", s.seed},
              {"counts",
               {{"state1", {s.counts[0][0], s.counts[0][1], s.counts[0][2]}},
                {"state2", {s.counts[1][0], s.counts[1][1], s.counts[1][2]}}}},
              {"success_rate", s.success_rate},
              {"failure_rate", s.failure_rate},
              {"error_rate", s.error_rate},
              {"success_se", s.success_se},
              {"failure_se", s.failure_se},
              {"error_se", s.error_se}};
}

inline json sweep_row_to_json(const SweepRow& row) {
  return json{{"index", row.index},
              {"seed1", row.seed1},
              {"seed2", row.seed2},
              {"eta1", row.eta1},
              {"fidelity", row.fidelity},
              {"t21", row.t21},
              {"t12", row.t12},
              {"regime_n1", regime_name(row.regime_n1)},
              {"q_opt", row.q_opt},
              {"case", comparison_case_name(row.case_id)},
              {"verdict", verdict_name(row.verdict)},
              {"monotone_violation", row.monotone_violation}};
}

inline json sweep_result_to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) rows.push_back(sweep_row_to_json(row));
  return json{{"rows", std::move(rows)}, {"violations", result.violations}};
}

}  // namespace uqsd
