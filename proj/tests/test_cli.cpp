// End-to-end tests of the command-line binary: exit codes, stdout reports in
// both formats, machine-readable stderr errors, and cross-format consistency.
// The binary path is injected at compile time as UQSD_CLI_PATH.

#include <sys/wait.h>
#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "uqsd/json_io.hpp"
#include "uqsd/uqsd.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("uqsd_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

CmdResult run_cli(const std::string& args) {
  static int invocation = 0;
  const fs::path out_path = scratch_dir() / ("out" + std::to_string(invocation) + ".txt");
  const fs::path err_path = scratch_dir() / ("err" + std::to_string(invocation) + ".txt");
  ++invocation;
  const std::string cmd = std::string(UQSD_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

json run_json(const std::string& args, int expect_exit = 0) {
  CmdResult r = run_cli(args + " --format json");
  INFO("args: " << args << "\nstderr: " << r.err);
  REQUIRE(r.exit_code == expect_exit);
  json j = json::parse(r.out);
  // Contract: every rendered JSON report re-parses into an equal value.
  REQUIRE(json::parse(j.dump()) == j);
  return j;
}

json expect_error(const std::string& args, int expect_exit) {
  CmdResult r = run_cli(args);
  INFO("args: " << args << "\nstdout: " << r.out << "\nstderr: " << r.err);
  REQUIRE(r.exit_code == expect_exit);
  json j = json::parse(r.err);
  REQUIRE(j.contains("error"));
  REQUIRE(j["error"].contains("code"));
  REQUIRE(j["error"].contains("message"));
  return j["error"];
}

// Parses the aligned key/value table emitted by --format table.
std::map<std::string, std::string> parse_table(const std::string& text) {
  std::map<std::string, std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto gap = line.find("  ");
    if (gap == std::string::npos) continue;
    const std::string key = line.substr(0, gap);
    auto value_at = line.find_first_not_of(' ', gap);
    if (value_at == std::string::npos) continue;
    rows[key] = line.substr(value_at);
  }
  return rows;
}

std::string fixture(const std::string& name) { return (scratch_dir() / name).string(); }

}  // namespace

TEST_CASE("gen writes fixtures and bound reproduces the two-copy contract values") {
  json g = run_json("gen counterexample --out-prefix " + fixture("ce"));
  REQUIRE(g["written"].size() == 3);
  for (const auto& p : g["written"]) REQUIRE(fs::exists(p.get<std::string>()));

  json b1 = run_json("bound " + fixture("ce1.json") + " " + fixture("ce2.json") +
                     " --eta1 0.5 -n 1");
  REQUIRE(b1["q_opt"].get<double>() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(b1["regime"] == "boundary_lower_middle");
  REQUIRE(b1["attainable"] == "yes");
  REQUIRE(b1["cert_residual_1"].get<double>() >= -1e-9);
  REQUIRE(b1["feasibility"]["rank_joint"] == 3);
  REQUIRE(b1["config"]["dim_cap"] == 4096);

  json b2 = run_json("bound " + fixture("ce1.json") + " " + fixture("ce2.json") +
                     " --eta1 0.5 -n 2");
  REQUIRE(b2["q_opt"].get<double>() == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(b2["composed_dim"] == 81);
}

TEST_CASE("bound maps infeasible and invalid inputs to the documented exit codes") {
  json same = expect_error("bound " + fixture("ce1.json") + " " + fixture("ce1.json"), 2);
  REQUIRE(same["code"] == "NotFeasible");

  json missing = expect_error("bound " + fixture("nope.json") + " " + fixture("ce2.json"), 3);
  REQUIRE(missing["code"] == "IoError");

  std::ofstream(fixture("garbled.json")) << "{not json";
  json bad = expect_error("bound " + fixture("garbled.json") + " " + fixture("ce2.json"), 3);
  REQUIRE(bad["code"] == "ValidationError");

  // A parseable file holding a non-state (trace 2) is a validation failure.
  uqsd::CMat twice = 2.0 * uqsd::CMat::Identity(2, 2) / 2.0;
  uqsd::save_json_file(fixture("trace2.json"),
                       json{{"dim", 2}, {"label", "bad"},
                            {"matrix", uqsd::matrix_to_json(twice)}});
  json nonstate =
      expect_error("bound " + fixture("trace2.json") + " " + fixture("ce2.json"), 3);
  REQUIRE(nonstate["code"] == "ValidationError");

  json badeta =
      expect_error("bound " + fixture("ce1.json") + " " + fixture("ce2.json") + " --eta1 1.5", 3);
  REQUIRE(badeta["code"] == "RangeError");
}

TEST_CASE("bound honors the strict support-geometry flag") {
  // The contract pair shares one support direction: accepted by default,
  // rejected when disjoint supports are demanded.
  json b = run_json("bound " + fixture("ce1.json") + " " + fixture("ce2.json"));
  REQUIRE(b["q_opt"].get<double>() == Catch::Approx(0.5).margin(1e-12));
  json strict = expect_error("bound " + fixture("ce1.json") + " " + fixture("ce2.json") +
                                 " --require-disjoint-supports",
                             2);
  REQUIRE(strict["code"] == "OverlappingSupports");
}

TEST_CASE("gen pure plus bound covers orthogonal and partial-overlap fixtures") {
  run_json("gen pure --overlap 0 --out-prefix " + fixture("orth"));
  json b0 = run_json("bound " + fixture("orth1.json") + " " + fixture("orth2.json"));
  REQUIRE(b0["q_opt"].get<double>() == 0.0);
  REQUIRE(b0["regime"] == "degenerate_f0");

  run_json("gen pure --overlap 0.5 --out-prefix " + fixture("half"));
  json b = run_json("bound " + fixture("half1.json") + " " + fixture("half2.json") +
                    " --eta1 0.5 -n 3");
  REQUIRE(b["q_opt"].get<double>() == Catch::Approx(0.125).margin(1e-9));
}

TEST_CASE("compare renders the three contract verdicts") {
  json better = run_json("compare " + fixture("half1.json") + " " + fixture("half2.json") +
                         " --eta1 0.5 -n 3");
  REQUIRE(better["case"] == "case1");
  REQUIRE(better["verdict"] == "strictly_better");
  REQUIRE(better["q_opt_n"].get<double>() == Catch::Approx(0.125).margin(1e-9));
  REQUIRE(better["excluded_window"].is_null());

  json equal = run_json("compare " + fixture("orth1.json") + " " + fixture("orth2.json") +
                        " --eta1 0.3 -n 2");
  REQUIRE(equal["verdict"] == "equal");
  REQUIRE(equal["case"] == "orthogonal_shortcut");

  // Case-3 geometry (both projections onto the other support recover weight
  // 1/2, fidelity sqrt(0.18)): prior ratios inside the excluded window are
  // incomparable from the bound alone.
  uqsd::CMat m1 = uqsd::CMat::Zero(4, 4);
  m1(0, 0) = 0.1;
  m1(1, 1) = 0.9;
  uqsd::CVec u = uqsd::CVec::Zero(4), w = uqsd::CVec::Zero(4);
  u(0) = u(2) = 1.0 / std::sqrt(2.0);
  w(1) = w(3) = 1.0 / std::sqrt(2.0);
  uqsd::CMat m2 = 0.9 * (u * u.adjoint()) + 0.1 * (w * w.adjoint());
  uqsd::save_density(fixture("skew1.json"), uqsd::DensityMatrix(m1, "skew1"));
  uqsd::save_density(fixture("skew2.json"), uqsd::DensityMatrix(m2, "skew2"));
  const double eta1 = 1.0 / (1.0 + 1.25 * 1.25);  // prior ratio r = 1.25
  std::ostringstream cmd;
  cmd << "compare " << fixture("skew1.json") << " " << fixture("skew2.json") << " --eta1 "
      << eta1 << " -n 2";
  json inc = run_json(cmd.str());
  REQUIRE(inc["case"] == "case3");
  REQUIRE(inc["verdict"] == "incomparable");
  REQUIRE(inc["excluded_window"].is_array());
  REQUIRE(inc["excluded_window"][0].get<double>() == Catch::Approx(1.1785).margin(1e-3));
}

TEST_CASE("verify theorem1 passes on the bundled fixture and rejects broken measurements") {
  json t1 = run_json("verify theorem1");
  REQUIRE(t1["passed"] == true);
  REQUIRE(t1["feasibility_equivalent"] == true);
  REQUIRE(t1["max_trace_deviation"].get<double>() <= 1e-9);

  // A pure pair with the pure-state construction also lifts.
  json t1p = run_json("verify theorem1 " + fixture("half1.json") + " " + fixture("half2.json") +
                      " --povm pure --eta1 0.4");
  REQUIRE(t1p["passed"] == true);

  // A measurement whose conclusive outcomes point at the wrong states
  // violates the verifier's premise: that is inapplicability, not a finding.
  auto [r1, r2, r3] = uqsd::counterexample_states(0.5, 0.5, 0.5);
  uqsd::Povm swapped = uqsd::commuting_ud_povm(r1, r2);
  std::swap(swapped.elements[1], swapped.elements[2]);
  uqsd::save_json_file(fixture("swapped_povm.json"), uqsd::povm_to_json(swapped));
  json sw = expect_error("verify theorem1 " + fixture("ce1.json") + " " + fixture("ce2.json") +
                             " --povm file --povm-file " + fixture("swapped_povm.json"),
                         5);
  REQUIRE(sw["code"] == "PreconditionFailed");

  json onefile = expect_error("verify theorem1 " + fixture("ce1.json"), 3);
  REQUIRE(onefile["code"] == "ValidationError");
}

TEST_CASE("verify theorem2 passes, and the truncated constraint set is a genuine finding") {
  json t2 = run_json("verify theorem2 --a1 0.5 --b1 0.5 --c1 0.5");
  REQUIRE(t2["passed"] == true);
  REQUIRE(t2["union_rank"] == 22);
  REQUIRE(t2["conclusive_trace"].get<double>() <= 1e-10);

  json dropped = run_json("verify theorem2 --drop-constraint 1:2", 4);
  REQUIRE(dropped["passed"] == false);
  REQUIRE(dropped["union_rank"] == 21);
  REQUIRE(dropped["conclusive_trace"].get<double>() ==
          Catch::Approx(0.125).margin(1e-9));

  json badflag = expect_error("verify theorem2 --drop-constraint nope", 3);
  REQUIRE(badflag["code"] == "ValidationError");
  json badcase = expect_error("verify theorem2 --drop-constraint 9:0", 3);
  REQUIRE(badcase["code"] == "RangeError");
}

TEST_CASE("verify lemma1 and eq16 run their property checks clean") {
  json l1 = run_json("verify lemma1 --dim 3 -n 2 --seeds 8 --seed 21");
  REQUIRE(l1["passed"] == true);
  REQUIRE(l1["max_fidelity_residual"].get<double>() <= 1e-8);
  REQUIRE(l1["max_t21_residual"].get<double>() <= 1e-8);
  REQUIRE(l1["config"]["seed"] == 21);

  json e = run_json("verify eq16 --dim1 3 --dim2 2 --seeds 6 --seed 4");
  REQUIRE(e["passed"] == true);
  REQUIRE(e["max_residual"].get<double>() <= 1e-8);
}

TEST_CASE("simulate agrees with exact rates and the analytic bound") {
  json s = run_json("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                    " --povm commuting --trials 40000 --seed 3");
  REQUIRE(s["stats"]["trials"] == 40000);
  const auto& c1 = s["stats"]["counts"]["state1"];
  const auto& c2 = s["stats"]["counts"]["state2"];
  std::uint64_t total = 0;
  for (const auto& c : c1) total += c.get<std::uint64_t>();
  for (const auto& c : c2) total += c.get<std::uint64_t>();
  REQUIRE(total == 40000);
  REQUIRE(s["stats"]["error_rate"].get<double>() == 0.0);
  REQUIRE(s["exact"]["failure"].get<double>() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(s["bound"]["q_opt"].get<double>() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(std::abs(s["comparison"]["sim_failure_sigma_from_exact"].get<double>()) <= 4.5);

  json sp = run_json("simulate " + fixture("half1.json") + " " + fixture("half2.json") +
                     " --povm pure --trials 40000 --seed 9");
  REQUIRE(sp["exact"]["failure"].get<double>() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(std::abs(sp["comparison"]["sim_failure_sigma_from_exact"].get<double>()) <= 4.5);

  // Same seed, same counts: the sampler is deterministic.
  json again = run_json("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                        " --povm commuting --trials 40000 --seed 3");
  REQUIRE(again["stats"] == s["stats"]);
}

TEST_CASE("simulate maps constructor inapplicability and bad files per contract") {
  run_json("gen random --dim 3 --rank 2 --seed 41 --out " + fixture("r1.json"));
  run_json("gen random --dim 3 --rank 2 --seed 42 --out " + fixture("r2.json"));
  json nc = expect_error("simulate " + fixture("r1.json") + " " + fixture("r2.json") +
                             " --povm commuting",
                         5);
  REQUIRE(nc["code"] == "NotCommuting");

  json deg = expect_error("simulate " + fixture("orth1.json") + " " + fixture("orth2.json") +
                              " --povm pure",
                          5);
  REQUIRE(deg["code"] == "DegenerateOverlap");

  json mixed = expect_error("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                                " --povm pure",
                            5);
  REQUIRE(mixed["code"] == "PreconditionFailed");

  // An explicit measurement file that breaks completeness: exit 3 and the
  // violation is spelled out in the error message.
  auto [r1, r2, r3] = uqsd::counterexample_states(0.5, 0.5, 0.5);
  uqsd::Povm povm = uqsd::commuting_ud_povm(r1, r2);
  povm.elements[0] *= 0.5;
  uqsd::save_json_file(fixture("badpovm.json"), uqsd::povm_to_json(povm));
  json bad = expect_error("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                              " --povm file --povm-file " + fixture("badpovm.json"),
                          3);
  REQUIRE(bad["code"] == "InvalidPovm");
  REQUIRE(bad["message"].get<std::string>().find("completeness") != std::string::npos);

  // The same measurement, unbroken, runs from file.
  uqsd::Povm good = uqsd::commuting_ud_povm(r1, r2);
  uqsd::save_json_file(fixture("goodpovm.json"), uqsd::povm_to_json(good));
  json ok = run_json("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                     " --povm file --povm-file " + fixture("goodpovm.json") +
                     " --trials 10000 --seed 2");
  REQUIRE(ok["exact"]["failure"].get<double>() == Catch::Approx(0.5).margin(1e-12));

  json nofile = expect_error("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                                 " --povm file",
                             3);
  REQUIRE(nofile["code"] == "ValidationError");
}

TEST_CASE("sweep is deterministic, honors count 0, and rejects impossible ranks") {
  json empty = run_json("sweep --count 0");
  REQUIRE(empty["rows"].is_array());
  REQUIRE(empty["rows"].empty());
  REQUIRE(empty["violations"] == 0);

  CmdResult a = run_cli("sweep --count 4 --n-max 2 --seed 17 --format json");
  CmdResult b = run_cli("sweep --count 4 --n-max 2 --seed 17 --format json");
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  json ja = json::parse(a.out);
  REQUIRE(ja["rows"].size() == 4);
  for (const auto& row : ja["rows"]) {
    REQUIRE(row["q_opt"].size() == 2);
    REQUIRE(row["monotone_violation"] == false);
  }

  json overflow = expect_error("sweep --dim 3 --rank1 2 --rank2 2", 3);
  REQUIRE(overflow["code"] == "RangeError");
}

TEST_CASE("sweep table format is CSV with one q_opt column per copy count") {
  CmdResult r = run_cli("sweep --count 3 --n-max 3 --seed 6 --format table");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.out);
  std::string line, header;
  int data_rows = 0;
  bool saw_count_comment = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      if (line.find("count = 3") != std::string::npos) saw_count_comment = true;
      continue;
    }
    if (line.rfind("index,", 0) == 0) {
      header = line;
      continue;
    }
    if (!line.empty()) ++data_rows;
  }
  REQUIRE(saw_count_comment);
  REQUIRE(header.find("q_opt_1,q_opt_2,q_opt_3") != std::string::npos);
  REQUIRE(header.find("monotone_violation") != std::string::npos);
  REQUIRE(data_rows == 3);
}

TEST_CASE("table and json formats carry the same scalar values") {
  const std::string args =
      "bound " + fixture("ce1.json") + " " + fixture("ce2.json") + " --eta1 0.3 -n 2";
  json j = run_json(args);
  CmdResult t = run_cli(args + " --format table");
  REQUIRE(t.exit_code == 0);
  auto table = parse_table(t.out);

  for (const char* key : {"q_opt", "fidelity", "t21", "t12", "eta1", "eta2"}) {
    REQUIRE(table.count(key) == 1);
    REQUIRE(std::stod(table.at(key)) == j[key].get<double>());
  }
  REQUIRE(table.at("regime") == j["regime"].get<std::string>());
  REQUIRE(table.at("attainable") == j["attainable"].get<std::string>());
  REQUIRE(std::stoll(table.at("composed_dim")) == j["composed_dim"].get<long long>());
  REQUIRE(std::stod(table.at("config.tolerances.psd")) ==
          j["config"]["tolerances"]["psd"].get<double>());
}

TEST_CASE("config flags flow into the run and are echoed in the report") {
  json b = run_json("bound " + fixture("ce1.json") + " " + fixture("ce2.json") +
                    " --dim-cap 9 --tol-psd 1e-7");
  // Cap 9 < composed dimension 27: certificates cannot be materialized, so
  // attainability is unknown, but the bound value itself is unaffected.
  REQUIRE(b["attainable"] == "unknown");
  REQUIRE(b["q_opt"].get<double>() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(b["config"]["dim_cap"] == 9);
  REQUIRE(b["config"]["tolerances"]["psd"].get<double>() == 1e-7);

  json cap = expect_error("bound " + fixture("ce1.json") + " " + fixture("ce2.json") +
                              " --dim-cap 8",
                          3);
  REQUIRE(cap["code"] == "RangeError");

  json trials = expect_error("simulate " + fixture("ce1.json") + " " + fixture("ce2.json") +
                                 " --trials 0",
                             3);
  REQUIRE(trials["code"] == "RangeError");
}

TEST_CASE("usage errors and help follow the exit-code contract") {
  CmdResult help = run_cli("--help");
  REQUIRE(help.exit_code == 0);
  REQUIRE(help.out.find("bound") != std::string::npos);

  json none = expect_error("", 3);
  REQUIRE(none["code"] == "ValidationError");

  json badsub = expect_error("frobnicate", 3);
  REQUIRE(badsub["code"] == "ValidationError");

  json badformat = expect_error("sweep --count 1 --format yaml", 3);
  REQUIRE(badformat["code"] == "ValidationError");
}
