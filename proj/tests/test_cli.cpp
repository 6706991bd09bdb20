#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metadecomp/cli.hpp"
#include "support.hpp"

using namespace metadecomp;

namespace {

namespace fs = std::filesystem;

std::string sample(const std::string& name) { return std::string(METADECOMP_SAMPLES) + "/" + name; }

struct Outcome {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    saved_ = global_caps();
    dir_ = fs::temp_directory_path() / ("metadecomp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    set_global_caps(saved_);
    fs::remove_all(dir_);
  }

  Outcome run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Caps saved_;
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, CheckReportsAcyclicity) {
  auto ok = run({"check", sample("hierarchical.json")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.json()["acyclic"], true);
  auto cyclic = run({"check", sample("triangle.q")});
  EXPECT_EQ(cyclic.code, 2);
  EXPECT_EQ(cyclic.json()["acyclic"], false);
}

TEST_F(Cli, MetaJsonAndDot) {
  auto j = run({"meta", sample("hierarchical.json")});
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_EQ(j.json()["minor"], 0);
  EXPECT_EQ(j.json()["valid"], true);
  auto star = run({"meta", sample("star4.json")});
  EXPECT_EQ(star.json()["minor"], 1);
  auto dot = run({"meta", "--format", "dot", sample("nested_minor.json")});
  EXPECT_EQ(dot.out.rfind("digraph", 0), 0u);
}

TEST_F(Cli, GenThenCountStar) {
  for (int n = 2; n <= 6; ++n) {
    auto q = path("star" + std::to_string(n) + ".json");
    ASSERT_EQ(run({"gen", "--preset", "star", "--n", std::to_string(n), "--emit", q}).code, 0);
    auto c = run({"enumerate", "--format", "count", q});
    ASSERT_EQ(c.code, 0) << c.err;
    std::uint64_t expected = 1;
    for (int i = 1; i < n; ++i) expected *= static_cast<std::uint64_t>(n);
    EXPECT_EQ(c.json()["count"], expected);
  }
}

TEST_F(Cli, EnumerateJsonListsTrees) {
  auto r = run({"enumerate", sample("hierarchical.json")});
  ASSERT_EQ(r.code, 0);
  auto j = r.json();
  EXPECT_EQ(j["count"], 4);
  EXPECT_EQ(j["truncated"], false);
  auto limited = run({"enumerate", "--limit", "2", sample("star4.json")});
  EXPECT_EQ(limited.json()["count"], 2);
  EXPECT_EQ(limited.json()["truncated"], true);
}

TEST_F(Cli, OptimizeWithCards) {
  auto r = run({"optimize", sample("hierarchical.json"), "--cards", sample("hierarchical.cards.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.json();
  EXPECT_EQ(j["cost"], 435);
  EXPECT_EQ(j["width"], 1);
  EXPECT_EQ(j["join_tree"], "R1(R2(R3),R4)");
  auto sql = run({"optimize", sample("hierarchical.json"), "--cards", sample("hierarchical.cards.json"), "--emit", "sql"});
  EXPECT_NE(sql.out.find("CREATE TEMP VIEW"), std::string::npos);
  EXPECT_NE(sql.out.find("SELECT EXISTS"), std::string::npos);
  auto no_rb = run({"optimize", "--no-rebranch", sample("hierarchical.json"), "--cards", sample("hierarchical.cards.json")});
  EXPECT_GE(no_rb.json()["cost"].get<double>(), 435);
}

TEST_F(Cli, OptimizeWithoutCardsFails) {
  auto r = run({"optimize", sample("star4.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cardinalit"), std::string::npos) << r.err;
}

TEST_F(Cli, WidthOfFigurePlans) {
  auto w2 = run({"width", sample("hierarchical.json"), "--plan-expr", "(((R1,R2),R3),R4)"});
  ASSERT_EQ(w2.code, 0) << w2.err;
  EXPECT_EQ(w2.json()["width"], 2);
  EXPECT_TRUE(w2.json()["join_tree"].is_null());
  auto w1 = run({"width", sample("clique4.json"), "--plan-expr", "(((R1,R2),R3),R4)"});
  EXPECT_EQ(w1.json()["width"], 1);
  auto bad = run({"width", sample("hierarchical.json"), "--plan-expr", "((R3,R4),(R1,R2))"});
  EXPECT_EQ(bad.json()["valid"], false);
}

TEST_F(Cli, OracleModes) {
  auto g = run({"oracle", "--mode", "global", sample("hierarchical.json"), "--cards", sample("hierarchical.cards.json")});
  auto w = run({"oracle", "--mode", "width1", sample("hierarchical.json"), "--cards", sample("hierarchical.cards.json")});
  auto t = run({"oracle", "--mode", "trees", sample("nested_minor.json")});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_LE(g.json()["cost"].get<double>(), w.json()["cost"].get<double>());
  EXPECT_EQ(w.json()["cost"], 435);
  auto counted = run({"enumerate", "--format", "count", sample("nested_minor.json")});
  EXPECT_EQ(t.json()["count"], counted.json()["count"]);
}

TEST_F(Cli, GenExecRoundTrip) {
  auto q = path("q.json"), c = path("q.cards.json"), d = path("data");
  auto gen = run({"gen", "--preset", "random", "--n", "5", "--seed", "3", "--rows", "40", "--emit", q, c, d});
  ASSERT_EQ(gen.code, 0) << gen.err;
  auto ex = run({"exec", q, "--data", d});
  ASSERT_EQ(ex.code, 0) << ex.err;
  auto j = ex.json();
  EXPECT_EQ(j["within_bound"], true);
  EXPECT_LE(j["max_interface"].get<std::int64_t>(), j["N"].get<std::int64_t>());
  auto opt = run({"optimize", q, "--cards", c});
  auto truth = run({"optimize", q, "--data", d});
  EXPECT_EQ(opt.json()["cost"], truth.json()["cost"]);
}

TEST_F(Cli, BenchWritesCsv) {
  auto r = run({"bench", "--preset", "random", "--n-min", "3", "--n-max", "4", "--count", "2", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("instance,preset,n,seed,metaOptCost,globalOptCost,ratio", 0), 0u);
  EXPECT_NE(r.err.find("median_ratio="), std::string::npos);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(Cli, BatchModeEmitsOneLinePerQuery) {
  auto r = run({"check", "--batch", METADECOMP_SAMPLES});
  EXPECT_EQ(r.code, 2);  // triangle.q is cyclic
  std::istringstream lines(r.out);
  std::string line;
  int count = 0;
  std::string previous;
  while (std::getline(lines, line)) {
    auto j = Json::parse(line);
    EXPECT_LT(previous, j["instance"].get<std::string>());
    previous = j["instance"].get<std::string>();
    EXPECT_EQ(previous.find(".cards."), std::string::npos);
    ++count;
  }
  EXPECT_EQ(count, 8);
}

TEST_F(Cli, ErrorsMapToExitCodes) {
  EXPECT_EQ(run({"meta", path("missing.json")}).code, 2);
  EXPECT_EQ(run({"meta", sample("triangle.q")}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--caps", "nonsense=1", "check", sample("star4.json")}).code, 2);
  auto capped = run({"--caps", "oracle_join_trees=3", "oracle", "--mode", "trees", sample("star4.json")});
  EXPECT_EQ(capped.code, 3);
  EXPECT_NE(capped.err.find("cap-exceeded"), std::string::npos) << capped.err;
  auto wide = run({"--caps", "width_cover=1", "width", sample("hierarchical.json"), "--plan-expr", "(((R1,R2),R3),R4)"});
  EXPECT_EQ(wide.code, 3);
  auto disconnected = path("split.q");
  std::ofstream(disconnected) << "R(a)\nS(b)\n";
  EXPECT_EQ(run({"check", disconnected}).code, 2);
}

TEST_F(Cli, VersionAndHelp) {
  auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(cli::kVersion) + "\n");
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, InstalledBinaryBehavesLikeTheLibrary) {
  std::string cmd = std::string(METADECOMP_CLI) + " enumerate --format count " + sample("star4.json");
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string text;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  EXPECT_EQ(pclose(pipe), 0);
  EXPECT_EQ(Json::parse(text)["count"], 64);
  std::string failing = std::string(METADECOMP_CLI) + " check " + sample("triangle.q") + " > /dev/null";
  int status = std::system(failing.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
