#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "problem_document.hpp"
#include "support/instances.hpp"

namespace ocifuse::cli {
namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& name) {
  return (fs::path(OCIFUSE_FIXTURE_DIR) / name).string();
}

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

CliRun run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Matrix to_matrix(const Json& j) {
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(j[0].size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < m.cols(); ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

TEST(CliSolve, SymmetricCiFixture) {
  const CliRun r = run({"solve", "ci", fixture("ci_diag_symmetric.json"), "--criterion", "trace"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_NEAR(j["omega"][0].get<double>(), 0.5, 1e-6);
  EXPECT_NEAR(j["omega"][1].get<double>(), 0.5, 1e-6);
  EXPECT_NEAR(j["objective"].get<double>(), 3.2, 1e-9);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["kind"], "ci");
  ASSERT_TRUE(j.contains("x"));
  EXPECT_NEAR(j["x"][0].get<double>(), 1.2, 1e-6);
  EXPECT_FALSE(j.contains("B1"));
}

TEST(CliSolve, DeficientFixtureIsInfeasible) {
  const CliRun r = run({"solve", "ci", fixture("ci_deficient.json")});
  EXPECT_EQ(r.code, kExitInfeasible);
  EXPECT_NE(r.err.find("H is not full column rank"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(CliSolve, SciSingleSplitSums) {
  const CliRun r = run({"solve", "sci", fixture("sci_single.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  ASSERT_TRUE(j.contains("B1"));
  ASSERT_TRUE(j.contains("B2"));
  const Matrix sum = to_matrix(j["B1"]) + to_matrix(j["B2"]);
  EXPECT_LT((sum - to_matrix(j["B"])).cwiseAbs().maxCoeff(), 1e-12);
  Matrix expected(2, 2);
  expected << 2.5, 0.6, 0.6, 1.3;
  EXPECT_LT((to_matrix(j["B"]) - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CliSolve, LogdetOverrideAndStdin) {
  std::ifstream file(fixture("ci_two.json"));
  std::stringstream text;
  text << file.rdbuf();
  const CliRun trace = run({"solve", "ci", "-"}, text.str());
  const CliRun logdet = run({"solve", "ci", "-", "--criterion", "logdet"}, text.str());
  ASSERT_EQ(trace.code, kExitOk) << trace.err;
  ASSERT_EQ(logdet.code, kExitOk) << logdet.err;
  EXPECT_EQ(trace.json()["criterion"], "trace");
  EXPECT_EQ(logdet.json()["criterion"], "logdet");
}

TEST(CliSolve, KindMismatchAndBadInput) {
  EXPECT_EQ(run({"solve", "sci", fixture("ci_two.json")}).code, kExitInputError);
  EXPECT_EQ(run({"solve", "ci", fixture("missing.json")}).code, kExitInputError);
  const CliRun bad = run({"solve", "ci", "-"}, R"({"version": "1", "kind": "ci",
      "estimates": [{"H": [[1, 0]], "X": [[-1]]}, {"H": [[1]], "X": [[1]]}]})");
  EXPECT_EQ(bad.code, kExitInputError);
  EXPECT_NE(bad.err.find("  - "), std::string::npos);
  EXPECT_EQ(run({"solve", "ci", "-"}, "not json").code, kExitInputError);
  EXPECT_EQ(run({"solve", "xyz", "-"}).code, kExitInputError);
  EXPECT_EQ(run({}).code, kExitInputError);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(CliSolve, OutputFile) {
  const fs::path out = fs::temp_directory_path() / "ocifuse_cli_test_out.json";
  const CliRun r = run({"solve", "oci", fixture("oci_zero.json"), "--output", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  const Json j = Json::parse(in);
  EXPECT_EQ(j["kind"], "oci");
  EXPECT_EQ(j["x"].size(), 2u);
  fs::remove(out);
}

TEST(CliVerify, TwoEstimateCi) {
  const CliRun r = run({"verify", fixture("ci_two.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_LE(std::abs(j["objective_gap"].get<double>()), 1e-4);
  EXPECT_NE(r.err.find("PASS consistency"), std::string::npos);
}

TEST(CliVerify, DenseSplitFixture) {
  const CliRun r = run({"verify", fixture("sci_dense.json"), "--quiet"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.json()["pass"].get<bool>());
  EXPECT_TRUE(r.err.empty());
}

TEST(CliVerify, FiveEstimatesSkipGrid) {
  const CliRun r = run({"verify", fixture("ci_five.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_TRUE(j["oracle"]["skipped"].get<bool>());
  EXPECT_NE(r.err.find("warning: grid check skipped"), std::string::npos);
  bool consistency = false;
  for (const auto& c : j["checks"]) {
    if (c["name"] == "consistency") consistency = c["pass"].get<bool>();
  }
  EXPECT_TRUE(consistency);
}

TEST(CliVerify, FlagsAreHonoured) {
  const CliRun r = run({"verify", fixture("oci_zero.json"), "--grid-step", "0.1", "--samples", "20",
                     "--seed", "3", "--quiet"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_EQ(j["oracle"]["step"].get<double>(), 0.1);
  EXPECT_EQ(j["consistency"]["samples"].get<int>(), 20);
  EXPECT_EQ(j["consistency"]["seed"].get<int>(), 3);
  const CliRun off = run({"verify", fixture("oci_zero.json"), "--grid-step", "0", "--quiet"});
  EXPECT_TRUE(off.json()["oracle"]["skipped"].get<bool>());
  EXPECT_EQ(run({"verify", fixture("oci_zero.json"), "--grid-step", "0.3"}).code,
            kExitInputError);
}

TEST(CliCheck, Verdicts) {
  CliRun r = run({"check", fixture("ci_two.json")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "feasible (H full column rank: 2/2)\n");
  r = run({"check", fixture("ci_deficient.json")});
  EXPECT_EQ(r.code, kExitInfeasible);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "infeasible (rank 1 < 2)");
  r = run({"check", fixture("oci_zero.json")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("H^T C^-T W^T W C^-1 H"), std::string::npos);
}

TEST(CliCheck, ExitCodesAreDeterministic) {
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(run({"check", fixture("ci_deficient.json")}).code, kExitInfeasible);
    EXPECT_EQ(run({"solve", "ci", fixture("ci_deficient.json")}).code, kExitInfeasible);
  }
}

double max_rel_diff(const Json& a, const Json& b) {
  if (a.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    return std::abs(x - y) / std::max(1.0, std::abs(x));
  }
  if (a.is_array() || a.is_object()) {
    double worst = 0.0;
    for (auto it = a.begin(); it != a.end(); ++it) {
      const Json& other = a.is_array() ? b.at(static_cast<std::size_t>(it - a.begin())) : b.at(it.key());
      worst = std::max(worst, max_rel_diff(*it, other));
    }
    return worst;
  }
  return a == b ? 0.0 : std::numeric_limits<double>::infinity();
}

TEST(ProblemDocument, RoundTripFixtures) {
  for (const char* name : {"ci_diag_symmetric.json", "ci_two.json", "sci_single.json",
                           "sci_dense.json", "ci_five.json", "oci_zero.json"}) {
    std::ifstream in(fixture(name));
    const Json original = Json::parse(in);
    const Json once = to_json(parse_document(original));
    const Json twice = to_json(parse_document(once));
    EXPECT_EQ(once, twice) << name;
    EXPECT_LE(max_rel_diff(once, original.contains("criterion") ? original : [&] {
      Json o = original;
      o["criterion"] = "trace";
      return o;
    }()), 1e-15) << name;
  }
}

TEST(ProblemDocument, RoundTripRandomValues) {
  testing::Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    ProblemDocument doc;
    doc.kind = ProblemKind::kOci;
    doc.problem = testing::random_oci_pd(2, 3, 3, 2, rng);
    const std::string text = to_json(doc).dump();
    std::istringstream in(text);
    const ProblemDocument back = read_document(in);
    const auto& a = std::get<OciProblem>(doc.problem);
    const auto& b = std::get<OciProblem>(back.problem);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.noise.matrix(), b.noise.matrix());
    EXPECT_EQ(a.coupling, b.coupling);
    EXPECT_EQ(a.bounds[1].bound.matrix(), b.bounds[1].bound.matrix());
  }
}

TEST(ProblemDocument, SchemaViolationsAreListed) {
  try {
    parse_document(Json::parse(R"({"kind": "oci", "H": [[1, 2], [3]], "R": "x"})"));
    FAIL() << "expected DocumentError";
  } catch (const DocumentError& e) {
    EXPECT_GE(e.violations().size(), 4u);
  }
  EXPECT_THROW(parse_document(Json::parse(R"({"version": "2", "kind": "ci", "estimates": []})")),
               DocumentError);
  EXPECT_THROW(parse_document(Json::parse(
                   R"({"version": "1", "kind": "ci", "estimates": [{"H": [[1]], "X": [[1]], "z": [1, 2]}]})")),
               DocumentError);
}

}  // namespace
}  // namespace ocifuse::cli
