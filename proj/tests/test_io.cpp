#include <gtest/gtest.h>

#include <bit>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "logdrift/io.hpp"

namespace logdrift {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("logdrift_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<CountVector> awkward_vectors() {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CountVector> out;
  for (std::size_t t = 0; t < 20; ++t) {
    Vector v(5);
    for (Eigen::Index i = 0; i < 5; ++i) v[i] = u(gen) / 3.0;
    v[0] = 0.1;
    v[4] = 1e-300 * static_cast<double>(t);
    out.emplace_back(v, t * 3);
  }
  return out;
}

void expect_bitwise_equal(const std::vector<CountVector>& a, const std::vector<CountVector>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a[j].window_index(), b[j].window_index());
    ASSERT_EQ(a[j].size(), b[j].size());
    for (Eigen::Index i = 0; i < a[j].size(); ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a[j][i]), std::bit_cast<std::uint64_t>(b[j][i]));
    }
  }
}

TEST(CountVectorIo, RoundTripIsBitwiseExact) {
  const auto cs = awkward_vectors();
  for (VectorFormat format : {VectorFormat::kCsv, VectorFormat::kJsonl}) {
    std::stringstream buffer;
    write_count_vectors(buffer, cs, format);
    expect_bitwise_equal(cs, read_count_vectors(buffer, format));
  }
}

TEST(CountVectorIo, CsvLayout) {
  std::vector<CountVector> cs = {CountVector((Vector(3) << 1, 0, 2.5).finished(), 7)};
  std::ostringstream out;
  write_count_vectors(out, cs, VectorFormat::kCsv);
  EXPECT_EQ(out.str(), "t,c1,c2,c3\n7,1,0,2.5\n");
  std::ostringstream jsonl;
  write_count_vectors(jsonl, cs, VectorFormat::kJsonl);
  EXPECT_EQ(jsonl.str(), "{\"t\":7,\"counts\":[1.0,0.0,2.5]}\n");
}

TEST(CountVectorIo, Validation) {
  auto code_of = [](const std::string& text, VectorFormat format, VectorReadOptions options) {
    std::istringstream in(text);
    try {
      read_count_vectors(in, format, options);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  VectorReadOptions three;
  three.expected_length = 3;
  EXPECT_EQ(code_of("t,c1,c2\n0,1,2\n", VectorFormat::kCsv, three), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of("t,c1,c2\n0,1,2\n1,1\n", VectorFormat::kCsv, {}), ErrorCode::kLengthMismatch);
  VectorReadOptions integers;
  integers.require_integer = true;
  EXPECT_EQ(code_of("{\"t\":0,\"counts\":[0.5,1]}\n", VectorFormat::kJsonl, integers),
            ErrorCode::kFormat);
  EXPECT_EQ(code_of("t,c1\n0,abc\n", VectorFormat::kCsv, {}), ErrorCode::kFormat);
  EXPECT_EQ(code_of("{\"t\":0}\n", VectorFormat::kJsonl, {}), ErrorCode::kFormat);
  EXPECT_EQ(code_of("t,c1,c2\n0,-1,2\n", VectorFormat::kCsv, {}), ErrorCode::kFormat);
}

TEST(CountVectorIo, FormatFromExtension) {
  EXPECT_EQ(vector_format_for("a/b.csv"), VectorFormat::kCsv);
  EXPECT_EQ(vector_format_for("a/b.jsonl"), VectorFormat::kJsonl);
  EXPECT_EQ(log_format_for("x.jsonl"), LogFormat::kJsonl);
  EXPECT_EQ(log_format_for("x.log"), LogFormat::kText);
}

TEST(Timestamps, Parse) {
  EXPECT_EQ(parse_timestamp("1970-01-01T00:00:01Z"), 1000);
  EXPECT_EQ(parse_timestamp("2020-01-02T03:04:05.250Z"), 1577934245250);
  EXPECT_EQ(parse_timestamp("2020-01-02 03:04:05"), 1577934245000);
  EXPECT_EQ(parse_timestamp("2020-01-02T05:04:05+02:00"), 1577934245000);
  EXPECT_EQ(parse_timestamp("1577934245"), 1577934245000);
  EXPECT_EQ(parse_timestamp("1577934245250"), 1577934245250);
  EXPECT_FALSE(parse_timestamp("yesterday"));
  EXPECT_FALSE(parse_timestamp("2020-13-02T03:04:05Z"));
}

TEST(LogIo, TextLines) {
  std::istringstream in(
      "2020-01-02T03:04:05Z get user 1\n"
      "\n"
      "[2020-01-02T03:04:07Z] put item a b\n"
      "  continuation line\n");
  const auto records = read_logs(in, LogFormat::kText);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].timestamp_ms, 1577934245000);
  EXPECT_EQ(records[0].message, "get user 1");
  EXPECT_EQ(records[1].timestamp_ms, 1577934247000);
  EXPECT_EQ(records[2].timestamp_ms, 1577934247000);
}

TEST(LogIo, FirstLineNeedsTimestampWhenRequired) {
  std::istringstream in("no stamp here\n");
  EXPECT_THROW(read_logs(in, LogFormat::kText), Error);
  std::istringstream relaxed_in("no stamp here\n");
  LogReadOptions relaxed;
  relaxed.require_timestamps = false;
  const auto records = read_logs(relaxed_in, LogFormat::kText, relaxed);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].timestamp_ms, 0);
}

TEST(LogIo, JsonLines) {
  std::istringstream in(
      "{\"ts\": 1000, \"msg\": \"a\"}\n"
      "{\"ts\": \"1970-01-01T00:00:02Z\", \"msg\": \"b\"}\n");
  const auto records = read_logs(in, LogFormat::kJsonl);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].timestamp_ms, 1000);
  EXPECT_EQ(records[1].timestamp_ms, 2000);
  EXPECT_EQ(records[1].message, "b");
  std::istringstream bad("{\"ts\": 1000}\n");
  EXPECT_THROW(read_logs(bad, LogFormat::kJsonl), Error);
}

TEST(JsonDocuments, TemplateSetRoundTrip) {
  const TemplateSet ts({{1, "get user <*>"}, {2, "<TS> done"}}, {"Oops", "fail"});
  const json j = ts;
  const TemplateSet back = j.get<TemplateSet>();
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.templates()[1].pattern, "<TS> done");
  EXPECT_EQ(back.error_keywords(), ts.error_keywords());
}

TEST(JsonDocuments, DetectorConfigWindowSpellings) {
  DetectorConfig cfg;
  from_json(json::parse(R"({"window": "inf", "alpha": 0.01})"), cfg);
  EXPECT_FALSE(cfg.window);
  EXPECT_EQ(cfg.alpha_level, 0.01);
  EXPECT_EQ(cfg.grace, 100u);
  from_json(json::parse(R"({"window": 40})"), cfg);
  EXPECT_EQ(cfg.window, 40u);
  const json j = cfg;
  DetectorConfig back;
  from_json(j, back);
  EXPECT_EQ(back.window, 40u);
  EXPECT_EQ(back.alpha_level, 0.01);
}

TEST(JsonDocuments, CheckpointRoundTripContinuesIdentically) {
  DetectorConfig cfg;
  cfg.window = 5;
  cfg.kappa_count = 3.0;
  const DirichletState prior((Vector(3) << 0.2, 0.3, 0.5).finished());
  Detector a(prior, cfg);
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> count(0, 9);
  auto draw = [&] {
    Vector v(3);
    do {
      for (Eigen::Index i = 0; i < 3; ++i) v[i] = count(gen);
    } while (v.sum() == 0.0);
    return CountVector(v);
  };
  for (int i = 0; i < 8; ++i) a.observe(draw());
  const std::string text = json(a.checkpoint()).dump();
  Detector b = Detector::restore(json::parse(text).get<DetectorCheckpoint>());
  for (int i = 0; i < 20; ++i) {
    const CountVector c = draw();
    const auto x = a.observe(c);
    const auto y = b.observe(c);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(x->log_bf), std::bit_cast<std::uint64_t>(y->log_bf));
    EXPECT_EQ(x->t, y->t);
  }
}

TEST(JsonDocuments, PriorSpellings) {
  const DirichletState direct = prior_from_json(json::parse(R"({"alpha": [1, 2]})"), 9, 1e-6);
  EXPECT_EQ(direct.alpha(), (Vector(2) << 1, 2).finished());
  const DirichletState built =
      prior_from_json(json::parse(R"({"probs": [0.5, 0.5, 0]})"), 10, 1e-6);
  EXPECT_EQ(built.alpha(), (Vector(3) << 5, 5, 10 * 1e-6).finished());
  EXPECT_THROW(prior_from_json(json::parse(R"({"other": 1})"), 1, 1e-6), Error);
}

TEST(JsonDocuments, MetricsUseNullForUndefinedDelay) {
  RunMetrics m;
  m.fnr = 1.0;
  m.runs = 3;
  EXPECT_EQ(json(m).dump(), R"({"tpr":0.0,"fpr":0.0,"fnr":1.0,"runs":3,"add":null})");
}

TEST(JsonDocuments, ScenarioRoundTrip) {
  ScenarioFile s;
  s.config.windows = 600;
  s.config.start = 301;
  s.config.level = 0.1;
  s.config.length = 150;
  s.config.seed = 7;
  s.synthetic = SyntheticPoolSpec{};
  s.synthetic->templates = 8;
  const ScenarioFile back = scenario_from_json(scenario_to_json(s));
  EXPECT_EQ(back.config.windows, 600u);
  EXPECT_EQ(back.config.start, 301u);
  EXPECT_EQ(back.config.level, 0.1);
  EXPECT_EQ(back.config.length, 150u);
  EXPECT_EQ(back.config.seed, 7u);
  ASSERT_TRUE(back.synthetic);
  EXPECT_EQ(back.synthetic->templates, 8u);
}

TEST(JsonDocuments, BundledScenariosAreValid) {
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(LOGDRIFT_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const ScenarioFile s = scenario_from_json(read_json_file(entry.path()));
    EXPECT_NO_THROW(s.config.validate()) << entry.path();
    EXPECT_TRUE(s.synthetic) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 5u);
}

TEST(AtomicFileTest, CommitReplacesTarget) {
  TempDir dir;
  const fs::path target = dir.path() / "out.txt";
  {
    std::ofstream(target) << "old";
  }
  {
    AtomicFile f(target);
    f.stream() << "new";
    f.commit();
  }
  std::ifstream in(target);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text, "new");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator()), 1);
}

TEST(AtomicFileTest, FailureLeavesNoPartialOutput) {
  TempDir dir;
  const fs::path target = dir.path() / "out.txt";
  try {
    AtomicFile f(target);
    f.stream() << "partial";
    throw std::runtime_error("interrupted");
  } catch (const std::runtime_error&) {
  }
  EXPECT_FALSE(fs::exists(target));
  EXPECT_TRUE(fs::is_empty(dir.path()));
}

}  // namespace
}  // namespace logdrift
