#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "avi/io.hpp"

namespace fs = std::filesystem;
using namespace avi;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("avi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(path("four.csv")) << "x,y\n1,0\n0,1\n-1,0\n0,-1\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(const std::string& args) const {
    const std::string cmd = std::string(AVI_BIN) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(path("stdout"));
    r.err = slurp(path("stderr"));
    return r;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FitCountsOnFourPoints) {
  auto r = run("fit " + path("four.csv") + " -o " + path("g.json") + " --epsilon 0 --normalization grad");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("total G: 4"), std::string::npos) << r.out;
  r = run("fit " + path("four.csv") + " -o " + path("v.json") + " --normalization vca");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("total G: 5"), std::string::npos) << r.out;
  EXPECT_EQ(load_model(path("v.json")).model.count(Tag::G), 5u);
}

TEST_F(Cli, ReduceKeepsTwoAndIsIdempotent) {
  for (const std::string norm : {"grad", "vca"}) {
    ASSERT_EQ(run("fit " + path("four.csv") + " -o " + path("m.json") + " --normalization " + norm).code, 0);
    auto r = run("reduce " + path("m.json") + " " + path("four.csv") + " -o " + path("r.json"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("kept 2"), std::string::npos) << r.out;
    const std::string first = slurp(path("r.json"));
    r = run("reduce " + path("r.json") + " " + path("four.csv"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("r.json")), first);
  }
}

TEST_F(Cli, EvalReducedModelVanishesOnTrainingPoints) {
  ASSERT_EQ(run("fit " + path("four.csv") + " -o " + path("m.json")).code, 0);
  ASSERT_EQ(run("reduce " + path("m.json") + " " + path("four.csv")).code, 0);
  const auto r = run("eval " + path("m.json") + " " + path("four.csv") + " -o " + path("vals.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("vals.csv"));
  const auto t = read_csv(in);
  ASSERT_EQ(t.rows.rows(), 4);
  ASSERT_EQ(t.rows.cols(), 2);
  EXPECT_EQ(t.header[0].substr(0, 4), "d2_g");
  EXPECT_LE(t.rows.cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(Cli, EvalGridExport) {
  ASSERT_EQ(run("fit " + path("four.csv") + " -o " + path("m.json")).code, 0);
  const auto r = run("eval " + path("m.json") + " " + path("four.csv") + " --grid 5 --grid-range -2,2,-2,2 -o " + path("grid.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("grid.csv"));
  const auto t = read_csv(in);
  EXPECT_EQ(t.rows.rows(), 25);
  EXPECT_EQ(t.header[0], "x");
  EXPECT_EQ(t.rows(0, 0), -2.0);
  EXPECT_EQ(t.rows(24, 1), 2.0);
}

TEST_F(Cli, EmptyCsv) {
  std::ofstream(path("empty.csv")) << "";
  const auto r = run("fit " + path("empty.csv") + " -o " + path("m.json"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("empty point set"), std::string::npos) << r.err;
}

TEST_F(Cli, MalformedCsvNamesLine) {
  std::ofstream(path("bad.csv")) << "x,y\n1,0\n0,oops\n";
  const auto r = run("fit " + path("bad.csv") + " -o " + path("m.json"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrors) {
  ASSERT_EQ(run("fit " + path("four.csv") + " -o " + path("m.json")).code, 0);
  EXPECT_NE(run("reduce " + path("m.json") + " " + path("four.csv") + " --threshold -1").code, 0);
  EXPECT_NE(run("fit " + path("four.csv") + " -o " + path("m.json") + " --normalization grad --var-subset 0").code, 0);
  EXPECT_NE(run("fit " + path("four.csv") + " -o " + path("m.json") + " --normalization bogus").code, 0);
  EXPECT_NE(run("").code, 0);
  ASSERT_EQ(run("fit " + path("four.csv") + " -o " + path("e.json") + " --epsilon 0.1").code, 0);
  const auto r = run("reduce " + path("e.json") + " " + path("four.csv"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("--threshold"), std::string::npos) << r.err;
}

TEST_F(Cli, DiagnoseScaling) {
  const auto r = run("diagnose " + path("four.csv") + " --scale 2 -o " + path("d.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(path("d.json")));
  EXPECT_TRUE(j["scaling_counts_equal"].get<bool>());
  EXPECT_TRUE(j["translation_counts_equal"].get<bool>());
  bool any = false;
  for (const auto& per : j["eigenvalue_ratios"]) {
    for (const auto& v : per) {
      EXPECT_NEAR(v.get<double>(), 4.0, 4e-6);
      any = true;
    }
  }
  EXPECT_TRUE(any);
}

TEST_F(Cli, GenerateDeterministic) {
  std::ofstream(path("spec.json")) << R"({"variety": "concentric_ellipses", "radii": [[1, 1]], "samples": 16, "seed": 7})";
  ASSERT_EQ(run("generate " + path("spec.json") + " -o " + path("a.csv")).code, 0);
  ASSERT_EQ(run("generate " + path("spec.json") + " -o " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv")).substr(0, 6), "x1,x2\n");
  std::ofstream(path("bad.json")) << R"({"variety": "torus"})";
  EXPECT_NE(run("generate " + path("bad.json")).code, 0);
}

TEST_F(Cli, FeaturesHeaderAndShape) {
  std::ofstream(path("other.csv")) << "0,0\n1,1\n2,2\n";
  ASSERT_EQ(run("fit " + path("four.csv") + " -o " + path("a.json")).code, 0);
  ASSERT_EQ(run("reduce " + path("a.json") + " " + path("four.csv")).code, 0);
  ASSERT_EQ(run("fit " + path("other.csv") + " -o " + path("b.json") + " --max-degree 1").code, 0);
  const auto r = run("features --model " + path("a.json") + " --model " + path("b.json") + " " + path("four.csv") +
                     " -o " + path("f.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("f.csv"));
  const auto t = read_csv(in);
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[0].substr(0, 3), "c0_");
  EXPECT_EQ(t.header[2], "c1_d1_g0");
  EXPECT_LE(t.rows.leftCols(2).maxCoeff(), 1e-10);
}

TEST_F(Cli, EpsilonSearch) {
  std::ofstream(path("spec.json")) << R"({"variety": "concentric_ellipses", "radii": [[1, 1]], "samples": 24,
                                          "extra_linear_vars": [0.5], "seed": 3})";
  ASSERT_EQ(run("generate " + path("spec.json") + " -o " + path("pts.csv")).code, 0);
  auto r = run("epsilon-search " + path("pts.csv") + " --num-linear 1 --d-min 2 --num-at-dmin 1 -o " + path("e.json") +
               " --fit-output " + path("m.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(path("e.json")));
  EXPECT_TRUE(j["found"].get<bool>());
  EXPECT_EQ(load_model(path("m.json")).model.count(1, Tag::G), 1u);
  r = run("epsilon-search " + path("pts.csv") + " --num-linear 5 --d-min 2 --num-at-dmin 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(Json::parse(r.out)["found"].get<bool>());
}

TEST_F(Cli, RankTolFromEnvironment) {
  const auto r = run("fit " + path("four.csv") + " -o " + path("m.json"));
  ASSERT_EQ(r.code, 0);
  const std::string cmd = "AVI_RANK_TOL=notanumber " + std::string(AVI_BIN) + " fit " + path("four.csv") + " -o " +
                          path("m2.json") + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  EXPECT_NE(WEXITSTATUS(status), 0);
}
