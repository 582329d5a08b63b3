// Runs the built command-line binary and checks stdout and exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(STEPWISE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("stepwise_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, TraceGoldenAndExitCodes) {
  CliRun r = run("trace '1+8/1*10+2'");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1+8/1*10+2=1+8*10+2=1+80+2=81+2=83\n");
  EXPECT_EQ(run("trace 7").out, "7\n");
  EXPECT_EQ(run("trace --fraction '(9947/9276)+(4411/9276)'").out, "(9947/9276)+(4411/9276)=14358/9276=2393/1546\n");
  EXPECT_EQ(run("trace '1/0'").code, 3);
  EXPECT_EQ(run("trace '1+'").code, 2);
  EXPECT_EQ(run("trace 1 --bogus").code, 64);
  EXPECT_EQ(run("").code, 64);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, TraceErrorNamesTheRedex) {
  const std::string cmd = std::string(STEPWISE_CLI_PATH) + " trace '1/0' 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  char buf[512] = {};
  std::string all;
  while (fgets(buf, sizeof buf, p)) all += buf;
  pclose(p);
  EXPECT_NE(all.find("DivByZero"), std::string::npos);
  EXPECT_NE(all.find("1"), std::string::npos);
}

TEST_F(Cli, TraceJson) {
  CliRun r = run("trace --json '3^9'");
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["trace"], "3^9=19683");
  EXPECT_EQ(j["final"], "19683");
}

TEST_F(Cli, GenerateIsReproducibleAndNeedsSeed) {
  EXPECT_EQ(run("generate --records 10 --out " + path("x.txt")).code, 64);
  ASSERT_EQ(run("generate --seed 42 --records 1000 --phase2 100 --workers 1 --out " + path("a.txt")).code, 0);
  ASSERT_EQ(run("generate --seed 42 --records 1000 --phase2 100 --workers 3 --out " + path("b.txt")).code, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  auto m = nlohmann::json::parse(slurp(path("a.txt") + std::string(".manifest.json")));
  EXPECT_EQ(m["record_count"], 1000);
  auto mb = nlohmann::json::parse(slurp(path("b.txt") + std::string(".manifest.json")));
  EXPECT_EQ(m["digest"], mb["digest"]);
}

TEST_F(Cli, GenerateEdgeCases) {
  EXPECT_EQ(run("generate --seed 1 --records 0 --out " + path("empty.txt")).code, 0);
  EXPECT_EQ(slurp(path("empty.txt")), "");
  EXPECT_EQ(run("generate --seed 1 --records 5 --out /nonexistent-dir/x.txt").code, 4);
  spit(path("bad.json"), "{\"phases\":[{\"specs\":[{\"category\":\"nope\",\"records\":1}]}]}");
  EXPECT_EQ(run("generate --seed 1 --schedule " + path("bad.json") + " --out " + path("y.txt")).code, 2);
}

TEST_F(Cli, TokenizePackUnpack) {
  EXPECT_EQ(run("tokenize --text '34*678='").out, "20005 20013 20016 20032 20021 20025 20023 20054\n");
  EXPECT_EQ(run("detokenize --ids '20005 20013 20016 20032 20021 20025 20023 20054'").out, "34*678=\n");
  EXPECT_EQ(run("tokenize --text 'a'").code, 2);
  spit(path("d.txt"), "1+1=2\n12345+345=12690\n");
  ASSERT_EQ(run("pack --block-length 16 --in " + path("d.txt") + " --out " + path("d.bin")).code, 0);
  EXPECT_EQ(run("unpack --in " + path("d.bin")).out, "1+1=2\n12345+345=12690\n");
  EXPECT_EQ(run("pack --block-length 4 --in " + path("d.txt") + " --out " + path("e.bin")).code, 2);
  EXPECT_EQ(run("pack --in " + path("missing.txt") + " --out " + path("e.bin")).code, 4);
}

TEST_F(Cli, Vocab) {
  auto j = nlohmann::json::parse(run("vocab").out);
  EXPECT_EQ(j["format_version"], 1);
  EXPECT_EQ(j["entries"].size(), 24U);
}

TEST_F(Cli, EvalAndBigbench) {
  CliRun bb = run("bigbench --op MUL --digits 5 --n 1000 --seed 9 --out " + path("mul.jsonl"));
  EXPECT_EQ(bb.code, 0);
  const std::string gold = slurp(path("mul.jsonl"));
  EXPECT_EQ(std::count(gold.begin(), gold.end(), '\n'), 1000);
  EXPECT_EQ(run("bigbench --op POW --digits 2 --seed 1").code, 64);
  EXPECT_EQ(run("bigbench --op ADD --digits 6 --seed 1").code, 64);

  spit(path("g.jsonl"), "{\"problem\":\"3468*4046/7424\",\"ground_truth\":\"1890.0226293103449\"}\n"
                        "{\"problem\":\"1+1\",\"ground_truth\":\"2\"}\n");
  spit(path("p.jsonl"), "{\"prediction\":\"3468*4046/7424=14031528/7424=1889.901400862069\"}\n"
                        "{\"prediction\":\"1+1=2\"}\n");
  CliRun r = run("eval --json --threshold 0.01 --pred " + path("p.jsonl") + " --gold " + path("g.jsonl") + " --csv " +
              path("grid.csv"));
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["ACC"], 0.5);
  EXPECT_EQ(j["RE"], 1.0);
  EXPECT_NE(slurp(path("grid.csv")).find("op,Int,Dec,Frac,Perc,Neg"), std::string::npos);
  CliRun text = run("eval --pred " + path("p.jsonl") + " --gold " + path("g.jsonl"));
  EXPECT_NE(text.out.find("ACC"), std::string::npos);
  EXPECT_NE(text.out.find("RE"), std::string::npos);
}

TEST_F(Cli, ReconstructAndScore) {
  spit(path("ape.jsonl"), "{\"id\":\"1\",\"original_text\":\"q\",\"equation\":\"x=20-5-8\",\"ans\":\"7\"}\n");
  ASSERT_EQ(run("reconstruct --in " + path("ape.jsonl") + " --out " + path("steps.jsonl")).code, 0);
  EXPECT_TRUE(fs::exists(path("steps.jsonl") + std::string(".rejects.jsonl")));
  EXPECT_EQ(slurp(path("steps.jsonl") + std::string(".rejects.jsonl")), "");
  auto rec = nlohmann::json::parse(slurp(path("steps.jsonl")));
  EXPECT_EQ(rec["solution"], "20-5-8=15-8=7");
  EXPECT_EQ(rec["equation"], "x=20-5-8");
  spit(path("pred.jsonl"), "{\"id\":\"1\",\"prediction\":\"20-5-8=15-8=7\"}\n");
  auto j = nlohmann::json::parse(run("score-mwp --json --gold " + path("steps.jsonl") + " --pred " + path("pred.jsonl")).out);
  EXPECT_EQ(j["arithmetic_accuracy"], 1.0);
  EXPECT_EQ(j["answer_accuracy"], 1.0);
}
