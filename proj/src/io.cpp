#include "logdrift/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <regex>
#include <sstream>

namespace logdrift {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, hit == std::string_view::npos ? hit : hit - pos)));
    if (hit == std::string_view::npos) return out;
    pos = hit + 1;
  }
}

[[noreturn]] void format_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    format_error(line_no, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::size_t parse_index(std::string_view text, std::size_t line_no) {
  std::size_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    format_error(line_no, "window index must be a nonnegative integer: '" + std::string(text) + "'");
  }
  return value;
}

CountVector make_vector(Vector values, std::size_t t, std::size_t line_no,
                        std::optional<std::size_t>& expected, const VectorReadOptions& options) {
  if (!expected) expected = static_cast<std::size_t>(values.size());
  if (static_cast<std::size_t>(values.size()) != *expected) {
    throw Error(ErrorCode::kLengthMismatch, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(*expected) + " counts, got " +
                                                std::to_string(values.size()));
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      format_error(line_no, "counts must be finite and nonnegative");
    }
    if (options.require_integer && values[i] != std::floor(values[i])) {
      format_error(line_no, "expected raw integer counts, found " + format_double(values[i]));
    }
  }
  return CountVector(std::move(values), t);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::optional<std::size_t> optional_count(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "unbounded") return std::nullopt;
    throw Error(ErrorCode::kFormat, "expected an integer or \"inf\", got \"" + s + "\"");
  }
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw Error(ErrorCode::kFormat, "expected a nonnegative integer or \"inf\"");
  }
  return j.get<std::size_t>();
}

json optional_count_json(const std::optional<std::size_t>& v) {
  return v ? json(*v) : json("inf");
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kFormat, "expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::kFormat, "expected a numeric array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

VectorFormat vector_format_for(const fs::path& path) {
  return path.extension() == ".csv" ? VectorFormat::kCsv : VectorFormat::kJsonl;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

CountVectorReader::CountVectorReader(std::istream& in, VectorFormat format,
                                     VectorReadOptions options)
    : in_(in), format_(format), options_(options), expected_(options.expected_length) {}

std::optional<CountVector> CountVectorReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (format_ == VectorFormat::kCsv) {
      const auto fields = split(text, ',');
      if (!have_header_) {
        if (fields.front() != "t") format_error(line_no_, "CSV header must start with 't'");
        if (fields.size() < 2) format_error(line_no_, "CSV header has no count columns");
        const std::size_t columns = fields.size() - 1;
        if (expected_ && *expected_ != columns) {
          throw Error(ErrorCode::kLengthMismatch,
                      "CSV has " + std::to_string(columns) + " count columns, expected " +
                          std::to_string(*expected_));
        }
        expected_ = columns;
        have_header_ = true;
        continue;
      }
      Vector values(static_cast<Eigen::Index>(fields.size() - 1));
      for (std::size_t i = 1; i < fields.size(); ++i) {
        values[static_cast<Eigen::Index>(i - 1)] = parse_double(fields[i], line_no_);
      }
      ++rows_;
      return make_vector(std::move(values), parse_index(fields.front(), line_no_), line_no_,
                         expected_, options_);
    }
    json record;
    try {
      record = json::parse(text);
    } catch (const json::exception& e) {
      format_error(line_no_, e.what());
    }
    if (!record.is_object() || !record.contains("counts")) {
      format_error(line_no_, "expected {\"t\": int, \"counts\": [...]}");
    }
    std::size_t t = rows_;
    if (record.contains("t")) {
      if (!record["t"].is_number_unsigned()) {
        format_error(line_no_, "t must be a nonnegative integer");
      }
      t = record["t"].get<std::size_t>();
    }
    Vector values;
    try {
      values = vector_from_json(record["counts"]);
    } catch (const Error& e) {
      format_error(line_no_, e.what());
    }
    ++rows_;
    return make_vector(std::move(values), t, line_no_, expected_, options_);
  }
  return std::nullopt;
}

std::vector<CountVector> read_count_vectors(std::istream& in, VectorFormat format,
                                            const VectorReadOptions& options) {
  CountVectorReader reader(in, format, options);
  std::vector<CountVector> out;
  while (auto c = reader.next()) out.push_back(std::move(*c));
  return out;
}

std::vector<CountVector> read_count_vectors(const fs::path& path,
                                            const VectorReadOptions& options) {
  auto in = open_input(path);
  return read_count_vectors(in, vector_format_for(path), options);
}

void write_count_vectors(std::ostream& out, std::span<const CountVector> cs,
                         VectorFormat format) {
  if (format == VectorFormat::kCsv) {
    const Eigen::Index k = cs.empty() ? 0 : cs.front().size();
    out << 't';
    for (Eigen::Index i = 1; i <= k; ++i) out << ",c" << i;
    out << '\n';
    for (const auto& c : cs) {
      out << c.window_index();
      for (Eigen::Index i = 0; i < c.size(); ++i) out << ',' << format_double(c[i]);
      out << '\n';
    }
    return;
  }
  for (const auto& c : cs) {
    json record = {{"t", c.window_index()}, {"counts", vector_to_json(c.values())}};
    out << record.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

LogFormat log_format_for(const fs::path& path) {
  const auto ext = path.extension();
  return ext == ".jsonl" || ext == ".json" || ext == ".ndjson" ? LogFormat::kJsonl
                                                                : LogFormat::kText;
}

std::string LogReadOptions::default_timestamp_regex() {
  return R"(^\s*\[?(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(?:[.,]\d+)?(?:Z|[+-]\d{2}:?\d{2})?|\d{13}|\d{10})\]?(?:\s+|$))";
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (std::all_of(text.begin(), text.end(),
                  [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc()) return std::nullopt;
    return text.size() >= 13 ? value : value * 1000;
  }
  static const std::regex kIso(
      R"((\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(?:[.,](\d+))?(Z|z|[+-]\d{2}:?\d{2})?)");
  std::cmatch m;
  if (!std::regex_match(text.data(), text.data() + text.size(), m, kIso)) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(m[1].str())}, month{static_cast<unsigned>(std::stoi(m[2].str()))},
                           day{static_cast<unsigned>(std::stoi(m[3].str()))}};
  if (!ymd.ok()) return std::nullopt;
  const int hh = std::stoi(m[4].str()), mm = std::stoi(m[5].str()), ss = std::stoi(m[6].str());
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  std::int64_t ms = duration_cast<milliseconds>(sys_days{ymd}.time_since_epoch()).count() +
                    ((hh * 60LL + mm) * 60LL + ss) * 1000LL;
  if (m[7].matched) {
    std::string frac = m[7].str().substr(0, 3);
    while (frac.size() < 3) frac.push_back('0');
    ms += std::stoi(frac);
  }
  if (m[8].matched) {
    const std::string tz = m[8].str();
    if (tz != "Z" && tz != "z") {
      const int sign = tz[0] == '-' ? -1 : 1;
      const int off_h = std::stoi(tz.substr(1, 2));
      const int off_m = std::stoi(tz.substr(tz.size() - 2));
      ms -= sign * (off_h * 60LL + off_m) * 60LL * 1000LL;
    }
  }
  return ms;
}

LogReader::LogReader(std::istream& in, LogFormat format, LogReadOptions options)
    : in_(in), format_(format), options_(std::move(options)) {
  if (format_ == LogFormat::kText) {
    try {
      leading_ = std::regex(options_.timestamp_regex, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad timestamp regex: ") + e.what());
    }
  }
}

std::optional<LogRecord> LogReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    LogRecord record;
    std::optional<std::int64_t> ts;
    if (format_ == LogFormat::kJsonl) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        format_error(line_no_, e.what());
      }
      if (!j.is_object() || !j.contains("msg") || !j["msg"].is_string()) {
        format_error(line_no_, "expected {\"ts\": ..., \"msg\": string}");
      }
      record.message = j["msg"].get<std::string>();
      if (j.contains("ts")) {
        const json& t = j["ts"];
        if (t.is_number_integer()) {
          ts = t.get<std::int64_t>();
        } else if (t.is_string()) {
          ts = parse_timestamp(t.get<std::string>());
          if (!ts) format_error(line_no_, "unparseable timestamp '" + t.get<std::string>() + "'");
        } else {
          format_error(line_no_, "ts must be epoch milliseconds or an RFC 3339 string");
        }
      }
    } else {
      std::smatch m;
      if (std::regex_search(line, m, leading_, std::regex_constants::match_continuous)) {
        const std::string stamp = m.size() > 1 && m[1].matched ? m[1].str() : m[0].str();
        ts = parse_timestamp(stamp);
        if (!ts) format_error(line_no_, "unparseable timestamp '" + stamp + "'");
        record.message = line.substr(static_cast<std::size_t>(m.length(0)));
      } else {
        record.message = line;
      }
    }
    if (!ts) {
      if (options_.require_timestamps && !previous_) {
        format_error(line_no_, "first record has no timestamp");
      }
      ts = previous_.value_or(0);
    }
    if (*ts < 0) format_error(line_no_, "negative timestamp");
    record.timestamp_ms = *ts;
    previous_ = ts;
    return record;
  }
  return std::nullopt;
}

std::vector<LogRecord> read_logs(std::istream& in, LogFormat format,
                                 const LogReadOptions& options) {
  LogReader reader(in, format, options);
  std::vector<LogRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

std::vector<LogRecord> read_logs(const fs::path& path, const LogReadOptions& options) {
  auto in = open_input(path);
  return read_logs(in, log_format_for(path), options);
}

// ---------------------------------------------------------------------------

void to_json(json& j, const TemplateSet& ts) {
  json templates = json::array();
  for (const auto& t : ts.templates()) templates.push_back({{"id", t.id}, {"pattern", t.pattern}});
  j = {{"templates", templates}, {"error_keywords", ts.error_keywords()}};
}

void from_json(const json& j, TemplateSet& ts) {
  try {
    std::vector<Template> templates;
    for (const auto& t : j.at("templates")) {
      templates.push_back({t.at("id").get<int>(), t.at("pattern").get<std::string>()});
    }
    std::vector<std::string> keywords = default_error_keywords();
    read_if(j, "error_keywords", keywords);
    ts = TemplateSet(std::move(templates), std::move(keywords));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("template set: ") + e.what());
  }
}

TemplateSet read_template_set(const fs::path& path) {
  return read_json_file(path).get<TemplateSet>();
}

void to_json(json& j, const DetectorConfig& cfg) {
  j = {{"window", optional_count_json(cfg.window)},
       {"kappa_count", cfg.kappa_count},
       {"kappa_prior", cfg.kappa_prior},
       {"epsilon", cfg.epsilon},
       {"alpha", cfg.alpha_level},
       {"grace", cfg.grace},
       {"b0", cfg.log_prior_odds},
       {"lag_compat", cfg.lag_compat}};
}

void from_json(const json& j, DetectorConfig& cfg) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "detector config must be an object");
  try {
    if (j.contains("window")) cfg.window = optional_count(j["window"]);
    read_if(j, "kappa_count", cfg.kappa_count);
    read_if(j, "kappa_prior", cfg.kappa_prior);
    read_if(j, "epsilon", cfg.epsilon);
    read_if(j, "alpha", cfg.alpha_level);
    read_if(j, "grace", cfg.grace);
    read_if(j, "b0", cfg.log_prior_odds);
    read_if(j, "lag_compat", cfg.lag_compat);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("detector config: ") + e.what());
  }
}

void to_json(json& j, const DetectorCheckpoint& cp) {
  json window = json::array();
  for (const auto& v : cp.window) window.push_back(vector_to_json(v));
  j = {{"config", cp.config},
       {"prior", {{"alpha", vector_to_json(cp.prior.alpha())}}},
       {"window", window},
       {"t", cp.t},
       {"last_log_bf", cp.last_log_bf}};
}

void from_json(const json& j, DetectorCheckpoint& cp) {
  try {
    DetectorConfig config;
    from_json(j.at("config"), config);
    cp.config = config;
    cp.prior = DirichletState(vector_from_json(j.at("prior").at("alpha")));
    cp.window.clear();
    for (const auto& v : j.at("window")) cp.window.push_back(vector_from_json(v));
    cp.t = j.at("t").get<std::size_t>();
    cp.last_log_bf = j.at("last_log_bf").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("checkpoint: ") + e.what());
  }
}

DirichletState prior_from_json(const json& j, double kappa_prior, double epsilon) {
  if (j.contains("alpha")) return DirichletState(vector_from_json(j["alpha"]));
  if (j.contains("probs")) {
    return build_prior(ProbabilityVector(vector_from_json(j["probs"])), kappa_prior, epsilon);
  }
  throw Error(ErrorCode::kFormat, "prior file needs an \"alpha\" or \"probs\" array");
}

void to_json(json& j, const FitReport& report) {
  j = {{"statistic", report.statistic},
       {"df", report.degrees_of_freedom},
       {"p_value", report.p_value},
       {"included_slots", report.included_slots}};
}

void to_json(json& j, const SdDiagnostic& diag) {
  j = json::array();
  for (const auto& d : diag) {
    j.push_back({{"observed_sd", d.observed_sd}, {"theoretical_sd", d.theoretical_sd}});
  }
}

void to_json(json& j, const RunMetrics& m) {
  j = {{"tpr", m.tpr}, {"fpr", m.fpr}, {"fnr", m.fnr}, {"runs", m.runs}};
  j["add"] = m.add ? json(*m.add) : json(nullptr);
}

void to_json(json& j, const SyntheticPoolSpec& s) {
  j = {{"templates", s.templates},
       {"lines_per_window", s.lines_per_window},
       {"pool_size", s.pool_size},
       {"overlap", s.overlap},
       {"seed", s.seed}};
}

void from_json(const json& j, SyntheticPoolSpec& s) {
  read_if(j, "templates", s.templates);
  read_if(j, "lines_per_window", s.lines_per_window);
  read_if(j, "pool_size", s.pool_size);
  read_if(j, "overlap", s.overlap);
  read_if(j, "seed", s.seed);
}

ScenarioFile scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "scenario must be a JSON object");
  ScenarioFile out;
  ScenarioConfig& cfg = out.config;
  try {
    read_if(j, "T", cfg.windows);
    read_if(j, "t_s", cfg.start);
    read_if(j, "p", cfg.level);
    if (j.contains("ell")) cfg.length = optional_count(j["ell"]);
    read_if(j, "R", cfg.repetitions);
    read_if(j, "seed", cfg.seed);
    if (j.contains("detector")) from_json(j["detector"], cfg.detector);
    if (j.contains("synthetic")) out.synthetic = j["synthetic"].get<SyntheticPoolSpec>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("scenario: ") + e.what());
  }
  return out;
}

json scenario_to_json(const ScenarioFile& scenario) {
  const ScenarioConfig& cfg = scenario.config;
  json j = {{"T", cfg.windows},
            {"t_s", cfg.start},
            {"p", cfg.level},
            {"ell", optional_count_json(cfg.length)},
            {"R", cfg.repetitions},
            {"seed", cfg.seed},
            {"detector", cfg.detector}};
  if (scenario.synthetic) j["synthetic"] = *scenario.synthetic;
  return j;
}

json read_json_file(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

AtomicFile::AtomicFile(fs::path path) : path_(std::move(path)) {
  tmp_ = path_;
  tmp_ += ".tmp." + std::to_string(::getpid());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kIo, "cannot write " + tmp_.string());
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    fs::remove(tmp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "write failed for " + tmp_.string());
  out_.close();
  std::error_code ec;
  fs::rename(tmp_, path_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path_.string() + ": " + ec.message());
  committed_ = true;
}

}  // namespace logdrift
