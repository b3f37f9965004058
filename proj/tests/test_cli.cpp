#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "logdrift/io.hpp"

namespace logdrift::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("logdrift_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string read(const std::string& name) {
    std::ifstream in(dir_ / name);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string templates_file() {
    return write("templates.json",
                 R"({"templates":[{"id":1,"pattern":"get user <*>"},)"
                 R"({"id":2,"pattern":"put item <*>"}],"error_keywords":["error"]})");
  }

  std::string scenario_file(double level, std::uint64_t seed) {
    json j = {{"T", 300},
              {"t_s", 151},
              {"p", level},
              {"ell", "inf"},
              {"R", 6},
              {"seed", seed},
              {"detector", {{"window", 100}, {"alpha", 0.05}, {"grace", 100}}},
              {"synthetic", {{"templates", 10}, {"lines_per_window", 200}, {"pool_size", 100}}}};
    return write("scenario_" + std::to_string(level) + ".json", j.dump());
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndParseErrors) {
  EXPECT_EQ(invoke({"--help"}).code, kOk);
  EXPECT_EQ(invoke({}).code, kInputError);
  EXPECT_EQ(invoke({"bogus"}).code, kInputError);
  EXPECT_EQ(invoke({"monitor", "--alpha", "abc"}).code, kInputError);
}

TEST_F(CliTest, TemplatesFromIdenticalLines) {
  const std::string logs = write("train.log", "a b c\na b c\n");
  const Result r = invoke({"templates", "-i", logs, "-o", path("ts.json"), "-q"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(read("ts.json"));
  ASSERT_EQ(j["templates"].size(), 1u);
  EXPECT_EQ(j["templates"][0]["pattern"], "a b c");
}

TEST_F(CliTest, TemplatesFromStdinWithReport) {
  const Result r = invoke({"templates", "-i", "-", "--report", path("report.json")},
                          "get user 1\nget user 2\n\nput item x y\n");
  ASSERT_EQ(r.code, kOk) << r.err;
  const json ts = json::parse(r.out);
  EXPECT_EQ(ts["templates"].size(), 2u);
  const json report = json::parse(read("report.json"));
  EXPECT_EQ(report["K"], 2);
  EXPECT_EQ(report["templates"][0]["lines"], 2);
}

TEST_F(CliTest, TemplatesOnEmptyCorpusIsAnInputError) {
  const std::string empty = write("empty.log", "\n   \n");
  const Result r = invoke({"templates", "-i", empty});
  EXPECT_EQ(r.code, kInputError);
  EXPECT_NE(r.err.find("EmptyCorpus"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingFileIsAnInputError) {
  EXPECT_EQ(invoke({"templates", "-i", path("nope.log")}).code, kInputError);
}

TEST_F(CliTest, VectorsFromLogs) {
  const std::string logs = write("app.log",
                                 "1970-01-01T00:00:00Z get user 1\n"
                                 "1970-01-01T00:00:05Z put item 3\n"
                                 "1970-01-01T00:00:12Z get user 2\n");
  const Result r = invoke({"vectors", "-l", logs, "--templates", templates_file(), "-o",
                           path("v.csv")});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(read("v.csv"), "t,c1,c2,c3,c4\n0,1,1,0,0\n1,1,0,0,0\n");
}

TEST_F(CliTest, VectorsTrainingCheckRejectsUnknownSlots) {
  const std::string logs = write("app.log",
                                 "1970-01-01T00:00:00Z get user 1\n"
                                 "1970-01-01T00:00:01Z an error happened\n");
  const Result r = invoke({"vectors", "-l", logs, "--templates", templates_file(), "--training"});
  EXPECT_EQ(r.code, kInvariantViolation);
}

TEST_F(CliTest, VectorsRejectUnsortedInput) {
  const std::string logs = write("app.log",
                                 "1970-01-01T00:00:09Z get user 1\n"
                                 "1970-01-01T00:00:01Z get user 2\n");
  const Result r = invoke({"vectors", "-l", logs, "--templates", templates_file()});
  EXPECT_EQ(r.code, kInputError);
  EXPECT_NE(r.err.find("UnsortedInput"), std::string::npos) << r.err;
}

TEST_F(CliTest, FitReport) {
  const std::string cs = write("c.csv", "t,c1,c2\n0,1,1\n1,2,2\n");
  const Result r = invoke({"fit", "-i", cs});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["statistic"], 0.0);
  EXPECT_EQ(j["df"], 1);
  EXPECT_EQ(j["p_value"], 1.0);
  const std::string fractional = write("f.csv", "t,c1,c2\n0,0.5,1\n1,2,2\n");
  EXPECT_EQ(invoke({"fit", "-i", fractional}).code, kInputError);
}

TEST_F(CliTest, MonitorVectorsAndHeader) {
  const std::string prior = write("prior.json", R"({"alpha":[1,1]})");
  const std::string cs = write("c.jsonl",
                               "{\"t\":0,\"counts\":[1,0]}\n{\"t\":1,\"counts\":[0,0]}\n"
                               "{\"t\":2,\"counts\":[1,1]}\n");
  const Result r = invoke({"monitor", "--prior", prior, "-i", cs});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.err.find("2.9957"), std::string::npos) << r.err;
  const auto lines = parse_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0]["t"], 1);
  EXPECT_NEAR(lines[0]["log_bf"].get<double>(), 0.0, 1e-14);
  EXPECT_EQ(lines[0]["flagged"], false);
  EXPECT_EQ(lines[1]["skipped"], true);
  EXPECT_EQ(lines[2]["t"], 3);
  EXPECT_EQ(lines[3]["first_detection"], 0);
}

std::string drifting_stream(std::size_t length, std::size_t start) {
  std::ostringstream out;
  for (std::size_t t = 0; t < length; ++t) {
    out << "{\"t\":" << t << ",\"counts\":" << (t + 1 < start ? "[5,5,0,0]" : "[5,5,3,3]")
        << "}\n";
  }
  return out.str();
}

TEST_F(CliTest, MonitorExitOnDetect) {
  const std::string prior = write("prior.json", R"({"probs":[0.5,0.5,0,0]})");
  const std::string cs = write("c.jsonl", drifting_stream(200, 120));
  const Result plain = invoke({"monitor", "--prior", prior, "-i", cs, "--kappa-prior", "10"});
  ASSERT_EQ(plain.code, kOk) << plain.err;
  const auto lines = parse_lines(plain.out);
  const std::size_t detected = lines.back()["first_detection"].get<std::size_t>();
  EXPECT_GE(detected, 120u);

  const Result stop = invoke({"monitor", "--prior", prior, "-i", cs, "--kappa-prior", "10",
                              "--exit-on-detect"});
  EXPECT_EQ(stop.code, kDetection);
  EXPECT_EQ(parse_lines(stop.out).back()["first_detection"], detected);
}

TEST_F(CliTest, MonitorCheckpointResume) {
  const std::string prior = write("prior.json", R"({"alpha":[2,1,1,1]})");
  const std::string stream = drifting_stream(60, 30);
  std::istringstream split(stream);
  std::string first;
  std::string second;
  std::string line;
  for (int i = 0; std::getline(split, line); ++i) (i < 25 ? first : second) += line + "\n";
  const Result whole = invoke({"monitor", "--prior", prior, "-i", write("all.jsonl", stream),
                               "--window", "10", "--grace", "0"});
  const Result a = invoke({"monitor", "--prior", prior, "-i", write("a.jsonl", first),
                           "--window", "10", "--grace", "0", "--checkpoint-out",
                           path("cp.json")});
  const Result b = invoke({"monitor", "-i", write("b.jsonl", second), "--checkpoint-in",
                           path("cp.json")});
  ASSERT_EQ(whole.code, kOk) << whole.err;
  ASSERT_EQ(a.code, kOk) << a.err;
  ASSERT_EQ(b.code, kOk) << b.err;
  const auto all = parse_lines(whole.out);
  const auto tail = parse_lines(b.out);
  ASSERT_EQ(tail.size(), 36u);
  for (std::size_t i = 0; i < 35; ++i) EXPECT_EQ(tail[i], all[25 + i]);
}

TEST_F(CliTest, MonitorFromRawLogs) {
  const std::string logs = write("app.log",
                                 "1970-01-01T00:00:00Z get user 1\n"
                                 "1970-01-01T00:00:11Z put item 3\n");
  const std::string prior = write("prior.json", R"({"probs":[0.5,0.5,0,0]})");
  const Result r = invoke({"monitor", "--templates", templates_file(), "--prior", prior, "-l",
                           logs, "-q"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(parse_lines(r.out).size(), 3u);
  EXPECT_TRUE(r.err.empty());
}

TEST_F(CliTest, MonitorRejectsBadWindow) {
  const std::string prior = write("prior.json", R"({"alpha":[1,1]})");
  const std::string cs = write("c.csv", "t,c1,c2\n0,1,1\n");
  EXPECT_EQ(invoke({"monitor", "--prior", prior, "-i", cs, "--window", "1"}).code, kInputError);
  EXPECT_EQ(invoke({"monitor", "--prior", prior, "-i", cs, "--window", "inf"}).code, kOk);
}

TEST_F(CliTest, EvalExample) {
  const std::string d = write("d.jsonl",
                              "{\"r\":1,\"d\":0}\n{\"r\":2,\"d\":450}\n"
                              "{\"r\":3,\"d\":520}\n{\"r\":4,\"d\":700}\n");
  const Result r = invoke({"eval", "-i", d, "--t-s", "501", "--grace", "100"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(json::parse(r.out).dump(),
            R"({"tpr":0.5,"fpr":0.25,"fnr":0.25,"runs":4,"add":109.0})");
  const std::string bad = write("bad.jsonl", "{\"r\":1,\"d\":50}\n");
  EXPECT_EQ(invoke({"eval", "-i", bad, "--t-s", "501", "--grace", "100"}).code, kInputError);
}

TEST_F(CliTest, SimulateNullScenarioRarelyDetects) {
  const Result r = invoke({"simulate", "--scenario", scenario_file(0.0, 3), "-q"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto lines = parse_lines(r.out);
  ASSERT_EQ(lines.size(), 6u);
  int zeros = 0;
  for (const auto& j : lines) zeros += j["d"] == 0;
  EXPECT_GE(zeros, 5);
}

TEST_F(CliTest, SimulateIsDeterministicAndSeedable) {
  const std::string scenario = scenario_file(0.3, 11);
  const Result a = invoke({"simulate", "--scenario", scenario, "--metrics", path("m.json")});
  const Result b = invoke({"simulate", "--scenario", scenario, "--threads", "2"});
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const json metrics = json::parse(read("m.json"));
  EXPECT_EQ(metrics["tpr"], 1.0);

  const Result traced = invoke({"simulate", "--scenario", scenario, "--emit-traces",
                                path("traces"), "-q"});
  ASSERT_EQ(traced.code, kOk) << traced.err;
  EXPECT_TRUE(fs::exists(dir_ / "traces" / "trace_r1.jsonl"));

  // Disjoint pools detect at the same window for every seed; the traces differ.
  const Result reseeded = invoke({"--seed", "12", "simulate", "--scenario", scenario,
                                  "--emit-traces", path("traces12"), "-q"});
  ASSERT_EQ(reseeded.code, kOk);
  EXPECT_NE(read("traces12/trace_r1.jsonl"), read("traces/trace_r1.jsonl"));
}

TEST_F(CliTest, ConfigFileValuesYieldToFlags) {
  const std::string prior = write("prior.json", R"({"probs":[0.5,0.5,0,0]})");
  const std::string cs = write("c.jsonl", drifting_stream(200, 120));
  const std::string config = write("config.json", R"({"monitor": {"alpha": 1e-300}})");
  const Result from_file = invoke({"--config", config, "monitor", "--prior", prior, "-i", cs,
                                   "--kappa-prior", "10", "-q"});
  ASSERT_EQ(from_file.code, kOk) << from_file.err;
  EXPECT_EQ(parse_lines(from_file.out).back()["first_detection"], 0);

  const Result overridden = invoke({"--config", config, "monitor", "--prior", prior, "-i", cs,
                                    "--kappa-prior", "10", "--alpha", "0.05", "-q"});
  ASSERT_EQ(overridden.code, kOk) << overridden.err;
  EXPECT_GE(parse_lines(overridden.out).back()["first_detection"].get<int>(), 120);
}

}  // namespace
}  // namespace logdrift::cli
