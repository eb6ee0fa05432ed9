#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"

namespace {

int run(const std::string& args) {
  const int rc = std::system((std::string(HEAL_CLI_PATH) + " " + args + " >cli_stdout.txt 2>cli_stderr.txt").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

const std::string kGraph = "cli_graph.txt";

void write_graph() {
  std::ofstream(kGraph) << "nodes=4 edges=3\n0 1\n1 2\n0 2 3\n";
}

}  // namespace

TEST(Cli, SpectrumWritesCsvAndSummary) {
  write_graph();
  ASSERT_EQ(run("spectrum " + kGraph + " -o cli_spectrum.csv"), 0);
  const std::string csv = slurp("cli_spectrum.csv");
  EXPECT_EQ(csv.rfind("# config: ", 0), 0u);
  EXPECT_NE(csv.find("index,eigenvalue"), std::string::npos);
  const auto s = nlohmann::json::parse(slurp("cli_spectrum.csv.json"));
  EXPECT_GT(s["lambda1"].get<double>(), 0.0);
}

TEST(Cli, CheegerToStdout) {
  std::ofstream("cli_uniform.txt") << "nodes=5 edges=3\n0 1 2\n2 3 4\n0 3 4\n";
  ASSERT_EQ(run("cheeger cli_uniform.txt"), 0);
  const auto j = nlohmann::json::parse(slurp("cli_stdout.txt"));
  EXPECT_TRUE(j["holds"].get<bool>());
  EXPECT_EQ(j["method"], "exact");

  write_graph();
  ASSERT_EQ(run("cheeger " + kGraph), 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp("cli_stdout.txt")).contains("reason"));
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  write_graph();
  std::ofstream("cli_cfg.json") << R"({"steps": 5, "dt": 0.2})";
  ASSERT_EQ(run("diffuse " + kGraph + " --config cli_cfg.json --steps 3 -o cli_diffuse.csv"), 0);
  const std::string csv = slurp("cli_diffuse.csv");
  EXPECT_NE(csv.find("\"steps\":3"), std::string::npos);
  EXPECT_NE(csv.find("\"dt\":0.2"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("heterophily --levels 9"), 2);
  EXPECT_EQ(run("ablation --off delta"), 2);
  EXPECT_EQ(run("transfer --epochs many"), 2);
  EXPECT_EQ(run("transfer --no-such-flag 1"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, NumericalErrorExitsThree) {
  write_graph();
  EXPECT_EQ(run("diffuse " + kGraph + " --dt 5"), 3);
  EXPECT_NE(slurp("cli_stderr.txt").find("error"), std::string::npos);
}

TEST(Cli, MissingInputExitsOne) {
  EXPECT_EQ(run("spectrum /nonexistent/graph.txt"), 1);
  EXPECT_EQ(run("spectrum " + kGraph + " --config /nonexistent/cfg.json"), 1);
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_NE(slurp("cli_stdout.txt").find("heterophily"), std::string::npos);
  EXPECT_EQ(run("--version"), 0);
}

TEST(Cli, GenerateThenAnalyse) {
  ASSERT_EQ(run("generate --topology hed --n 3 --m 2 --seed 1 -o cli_hed.txt"), 0);
  const auto side = nlohmann::json::parse(slurp("cli_hed.txt.json"));
  EXPECT_EQ(side["required_depth"].get<int>(), 8);
  EXPECT_EQ(run("spectrum cli_hed.txt --laplacian edge"), 0);
}
