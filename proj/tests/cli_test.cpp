#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "lexsched/io.hpp"

namespace fs = std::filesystem;
using lexsched::io::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LEXSCHED_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return (fs::path(LEXSCHED_SAMPLES) / name).string(); }

fs::path scratch() {
  auto dir = fs::temp_directory_path() / "lexsched_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, SolveTwelveAndTwos) {
  for (const char* method : {"bnb", "sequential", "weighting", "highest-rank"}) {
    auto r = run("solve " + sample("twelve_and_twos.json") + " --method " + method);
    ASSERT_EQ(r.code, 0) << method;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["vector"], (std::vector<long long>{12, 4, 4, 4})) << method;
    EXPECT_EQ(j["instance_id"], "twelve_and_twos");
    EXPECT_EQ(j["method"], method);
  }
}

TEST(Cli, SolveEmptyInstance) {
  auto r = run("solve " + sample("empty.json"));
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["vector"], (std::vector<long long>{0, 0, 0}));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("solve " + sample("missing.json")).code, 4);
  EXPECT_EQ(run("solve " + sample("twelve_and_twos.json") + " --method nope").code, 3);
  EXPECT_EQ(run("solve").code, 3);
  EXPECT_EQ(run("--help").code, 0);

  const auto bad = scratch() / "broken.json";
  lexsched::io::write_file(bad, "{\n  \"m\": 2,\n  \"jobs\": [\n}");
  EXPECT_EQ(run("solve " + bad.string()).code, 3);

  // a degenerate instance that cannot finish in a millisecond budget
  const auto hard = scratch() / "hard.json";
  ASSERT_EQ(run("gen --kind degenerate --m 3 --n 35 --seed 2 -o " + hard.string()).code, 0);
  EXPECT_EQ(run("solve " + hard.string() + " --method sequential --node-limit 50").code, 2);

  // every machine fails
  const auto dead = scratch() / "dead.json";
  lexsched::io::write_file(dead, R"({"init":{"m":1,"jobs":[]},"init_schedule":{"assignment":{}},
                                    "perturbations":[]})");
  EXPECT_EQ(run("recover " + dead.string()).code, 0);
  lexsched::io::write_file(dead, R"({"init":{"m":2,"jobs":[]},"init_schedule":{"assignment":{}},
                                    "perturbations":[{"kind":"machine_fail","machine":1},
                                                     {"kind":"machine_fail","machine":2}]})");
  EXPECT_EQ(run("recover " + dead.string()).code, 3);
}

TEST(Cli, ArbitraryOptimumFixtureRatios) {
  for (int m = 2; m <= 5; ++m) {
    const auto path = scratch() / ("arb_" + std::to_string(m) + ".json");
    ASSERT_EQ(run("fixture --family arbitrary-opt --m " + std::to_string(m) + " -o " + path.string()).code, 0);
    auto binding = json::parse(run("recover " + path.string()).out);
    EXPECT_EQ(binding["ratio"], std::to_string(m) + "/1");
    EXPECT_EQ(binding["holds"], true);
    auto flexible = json::parse(run("recover " + path.string() + " --strategy flexible --g 1000").out);
    EXPECT_EQ(flexible["ratio"], "1/1");
  }
}

TEST(Cli, RecoverSample) {
  auto j = json::parse(run("recover " + sample("scenario.json")).out);
  EXPECT_EQ(j["makespan"], 7);
  EXPECT_EQ(j["optimal_makespan"], 5);
  EXPECT_EQ(j["k_r"], 1);
  EXPECT_EQ(j["k_a"], 2);
  auto tight = json::parse(run("recover " + sample("scenario.json") + " --tightest 3").out);
  EXPECT_EQ(tight["f"], "1/1");
  EXPECT_EQ(run("recover " + sample("scenario.json") + " --tightest 1").code, 3);
}

TEST(Cli, UnperturbedScenarioRatioOne) {
  const auto inst = scratch() / "calm_inst.json";
  const auto sc = scratch() / "calm.json";
  ASSERT_EQ(run("gen --m 3 --n 7 --q 30 --seed 4 -o " + inst.string()).code, 0);
  ASSERT_EQ(run("gen --perturb " + inst.string() + " --dn 0 --dm 0 -o " + sc.string()).code, 0);
  auto j = json::parse(run("recover " + sc.string()).out);
  EXPECT_EQ(j["ratio"], "1/1");
}

TEST(Cli, PoolWarnsWhenShort) {
  const auto tiny = scratch() / "tiny.json";
  lexsched::io::write_file(tiny, R"({"m":2,"jobs":[{"id":"a","p":1},{"id":"b","p":1}]})");
  auto r = run("pool " + tiny.string() + " --count 50");
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["returned"], 2);
  auto fig = json::parse(run("pool " + sample("twelve_and_twos.json") + " --count 50").out);
  EXPECT_EQ(fig["schedules"][0]["vector"], (std::vector<long long>{12, 4, 4, 4}));
  bool unbalanced = false;
  for (const auto& s : fig["schedules"])
    if (s["vector"] == std::vector<long long>{12, 6, 4, 2}) unbalanced = true;
  EXPECT_TRUE(unbalanced);
}

TEST(Cli, CsvDeterminism) {
  const auto dir = scratch();
  std::string files;
  for (int s = 1; s <= 3; ++s) {
    const auto p = dir / ("det" + std::to_string(s) + ".json");
    ASSERT_EQ(run("gen --m 3 --n 7 --q 40 --dist symmetric --seed " + std::to_string(s) + " -o " + p.string()).code,
              0);
    files += " " + p.string();
  }
  auto a = run("scatter" + files + " --pool 6 --seed 9");
  auto b = run("scatter" + files + " --pool 6 --seed 9 --workers 1");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("instance,schedule,strategy,", 0), 0u);

  std::string reports;
  for (int s = 1; s <= 3; ++s)
    for (const char* m : {"bnb", "weighting"}) {
      const auto r = dir / ("rep_" + std::string(m) + std::to_string(s) + ".json");
      ASSERT_EQ(run("solve " + (dir / ("det" + std::to_string(s) + ".json")).string() + " --method " + m + " -o " +
                    r.string())
                    .code,
                0);
      reports += " " + r.string();
    }
  auto p1 = run("profile" + reports + " --metric weight");
  auto p2 = run("profile" + reports + " --metric weight");
  ASSERT_EQ(p1.code, 0);
  EXPECT_EQ(p1.out, p2.out);
  EXPECT_NE(p1.out.find("bnb,1,1/1,1,1/1"), std::string::npos);
}
