#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "its/field.hpp"
#include "shapes.hpp"

using its::cli::run_cli;
using nlohmann::json;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string path(const std::string& name) { return (its::testing::scratch_dir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Torus OBJ and a K = 4 field built from it through the CLI, shared by tests.
const std::string& torus_obj() {
  static const std::string p =
      its::testing::write_temp_obj(its::testing::make_torus(1.0, 0.35, 32, 16), "cli_torus.obj").string();
  return p;
}

const std::string& torus_its() {
  static const std::string p = [] {
    const std::string its = path("cli_torus.its");
    const CliRun r = run({"build", "--in", torus_obj(), "--k", "4", "--out", its});
    EXPECT_EQ(r.code, 0) << r.err;
    return its;
  }();
  return p;
}

}  // namespace

TEST(Cli, BuildWritesFieldAndReport) {
  const std::string report = path("cli_build.json");
  const std::string its = path("cli_build.its");
  const std::string candidates = path("cli_candidates.csv");
  const CliRun r = run({"build", "--in", torus_obj(), "--k", "4", "--out", its, "--report", report, "--candidates",
                     candidates, "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("eps1 ", 0), 0u);
  const json doc = json::parse(slurp(report));
  EXPECT_EQ(doc["k"], 4);
  EXPECT_EQ(doc["mode"], "signed");
  EXPECT_EQ(doc["seed"], 5);
  EXPECT_TRUE(doc["solver"]["converged"].get<bool>());
  EXPECT_LE(doc["solver"]["residual"].get<double>(), 1e-7);
  EXPECT_DOUBLE_EQ(doc["thickness"].get<double>(), doc["eps2"].get<double>() - doc["eps1"].get<double>());
  const its::ImplicitField field = its::load_its(its);
  ASSERT_TRUE(field.shell().has_value());
  EXPECT_EQ(field.shell()->eps1, doc["eps1"].get<double>());
  EXPECT_FALSE(slurp(candidates).empty());
}

TEST(Cli, ValidateReportsFullContainment) {
  const CliRun r = run({"validate", "--its", torus_its(), "--mesh", torus_obj(), "--samples", "10000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["samples"], 10000);
  EXPECT_EQ(doc["ratio"], 1.0);
  EXPECT_NE(r.err.find("inside-shell ratio 100.0%"), std::string::npos);
}

TEST(Cli, ThicknessShrinksWithK) {
  const std::string r4 = path("cli_k4.json");
  const std::string r5 = path("cli_k5.json");
  ASSERT_EQ(run({"build", "--in", torus_obj(), "--k", "4", "--out", path("cli_k4.its"), "--report", r4}).code, 0);
  ASSERT_EQ(run({"build", "--in", torus_obj(), "--k", "5", "--out", path("cli_k5.its"), "--report", r5}).code, 0);
  EXPECT_LT(json::parse(slurp(r5))["thickness"].get<double>(), json::parse(slurp(r4))["thickness"].get<double>());
}

TEST(Cli, UnsignedModeReported) {
  const std::string report = path("cli_udf.json");
  const CliRun r = run({"build", "--in", torus_obj(), "--k", "3", "--mode", "unsigned", "--out", path("cli_udf.its"),
                     "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(slurp(report))["mode"], "unsigned");
  EXPECT_EQ(its::load_its(path("cli_udf.its")).mode(), its::DistanceMode::Unsigned);
}

TEST(Cli, RejectsBadArguments) {
  CliRun r = run({"build", "--in", torus_obj(), "--k", "1", "--out", path("x.its")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(run({"build", "--in", torus_obj(), "--k", "13", "--out", path("x.its")}).code, 1);
  EXPECT_EQ(run({"build", "--in", torus_obj(), "--k", "4", "--tol", "0", "--out", path("x.its")}).code, 1);
  EXPECT_EQ(run({"build", "--in", torus_obj(), "--k", "4", "--margin", "0.3", "--out", path("x.its")}).code, 1);
  EXPECT_NE(run({"build", "--in", torus_obj(), "--k", "4", "--bogus", "--out", path("x.its")}).code, 0);
  EXPECT_NE(run({"build", "--in", torus_obj(), "--k", "4", "--mode", "sideways", "--out", path("x.its")}).code, 0);
  EXPECT_NE(run({}).code, 0);
  r = run({"build", "--in", path("missing.obj"), "--k", "4", "--out", path("x.its")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
  EXPECT_EQ(run({"query", "--its", torus_its(), "--points", path("missing.txt"), "--out", path("q.csv")}).code, 1);
}

TEST(Cli, HelpExitsCleanly) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("build"), std::string::npos);
}

TEST(Cli, QueryWritesResults) {
  const std::string points = path("cli_points.txt");
  std::ofstream(points) << "0 0 0\n1 0 0\n100 100 100\n";
  const std::string csv = path("cli_results.csv");
  CliRun r = run({"query", "--its", torus_its(), "--points", points, "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["count"], 3);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "x,y,z,f,label,usedFallback");
  int n = 0;
  std::string last;
  while (std::getline(lines, line)) ++n, last = line;
  EXPECT_EQ(n, 3);
  EXPECT_NE(last.find("Outside"), std::string::npos);

  EXPECT_EQ(run({"query", "--its", torus_its(), "--points", points, "--policy", "exact", "--out", csv}).code, 1);
  r = run({"query", "--its", torus_its(), "--points", points, "--policy", "exact", "--mesh", torus_obj(), "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["agreement"], 1.0);
}

TEST(Cli, ExtractLevels) {
  for (const std::string level : {"eps1", "zero", "eps2", "0.01"}) {
    const std::string obj = path("cli_level.obj");
    const CliRun r = run({"extract", "--its", torus_its(), "--level", level, "--res", "32", "--out", obj});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_GT(its::load_mesh(obj).face_count(), 0u) << level;
  }
  CliRun r = run({"extract", "--its", torus_its(), "--level", "1e3", "--res", "16", "--out", path("cli_empty.obj")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(run({"extract", "--its", torus_its(), "--level", "high", "--out", path("x.obj")}).code, 1);
  EXPECT_NE(run({"extract", "--its", torus_its(), "--res", "8", "--out", path("x.obj")}).code, 0);
}

TEST(Cli, SimplifyModes) {
  const std::string report = path("cli_simplify.json");
  const std::string log = path("cli_simplify.csv");
  CliRun r = run({"simplify", "--in", torus_obj(), "--its", torus_its(), "--mode", "constrained", "--target", "300",
               "--out", path("cli_simplified.obj"), "--report", report, "--log", log});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(slurp(report));
  EXPECT_EQ(doc["shellViolations"], 0);
  EXPECT_EQ(doc["initialFaces"], 1024);
  EXPECT_EQ(doc["mode"], "constrained");
  EXPECT_EQ(its::load_mesh(path("cli_simplified.obj")).face_count(), doc["finalFaces"].get<std::size_t>());
  EXPECT_EQ(slurp(log).substr(0, 8), "kept,rem");

  r = run({"simplify", "--in", torus_obj(), "--its", torus_its(), "--mode", "global_term", "--gamma", "3",
           "--target", "300", "--out", path("cli_global.obj")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["gamma"], 3.0);
  EXPECT_LE(json::parse(r.out)["finalFaces"].get<int>(), 300);

  r = run({"simplify", "--in", torus_obj(), "--mode", "plain", "--target", "300", "--out", path("cli_plain.obj")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"simplify", "--in", torus_obj(), "--target", "300", "--out", path("x.obj")}).code, 1);
}

TEST(Cli, BenchWritesRows) {
  const std::string csv = path("cli_bench.csv");
  CliRun r = run({"bench", "--its", torus_its(), "--mesh", torus_obj(), "--boxes", "1..3", "--n", "500", "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "rows 9\n");
  r = run({"bench", "--its", torus_its(), "--mesh", torus_obj(), "--boxes", "1,2.5", "--n", "0", "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"bench", "--its", torus_its(), "--mesh", torus_obj(), "--boxes", "3..1", "--out", csv}).code, 1);
}

TEST(Cli, ParseBoxSizes) {
  EXPECT_EQ(its::cli::parse_box_sizes("1..4"), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(its::cli::parse_box_sizes("1.5,2"), (std::vector<double>{1.5, 2}));
  EXPECT_THROW(its::cli::parse_box_sizes("a..b"), its::Error);
  EXPECT_THROW(its::cli::parse_box_sizes("-1"), its::Error);
}

TEST(Cli, BuildIsByteDeterministic) {
  const std::string a = path("cli_det_a.its");
  const std::string b = path("cli_det_b.its");
  ASSERT_EQ(run({"build", "--in", torus_obj(), "--k", "4", "--out", a}).code, 0);
  ASSERT_EQ(run({"--threads", "1", "build", "--in", torus_obj(), "--k", "4", "--out", b}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}
