#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "logdrift/core.hpp"
#include "logdrift/detector.hpp"
#include "logdrift/multinomial.hpp"
#include "logdrift/simulator.hpp"
#include "logdrift/templater.hpp"

namespace logdrift {

/// Insertion-ordered so emitted records keep their documented key order.
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Count vectors: CSV `t,c1,...,c{K+2}` or JSONL `{"t": int, "counts": [...]}`.

enum class VectorFormat { kCsv, kJsonl };

/// `.csv` selects CSV; anything else is JSONL.
VectorFormat vector_format_for(const std::filesystem::path& path);

struct VectorReadOptions {
  /// Usually TemplateSet::vector_length(); otherwise the first row fixes it.
  std::optional<std::size_t> expected_length;
  /// Reject fractional values (the fit test needs raw counts).
  bool require_integer = false;
};

/// Incremental reader, one vector per next() call.
class CountVectorReader {
 public:
  CountVectorReader(std::istream& in, VectorFormat format, VectorReadOptions options = {});

  /// nullopt at end of input.
  std::optional<CountVector> next();

 private:
  std::istream& in_;
  VectorFormat format_;
  VectorReadOptions options_;
  std::optional<std::size_t> expected_;
  std::size_t line_no_ = 0;
  std::size_t rows_ = 0;
  bool have_header_ = false;
};

std::vector<CountVector> read_count_vectors(std::istream& in, VectorFormat format,
                                            const VectorReadOptions& options = {});
std::vector<CountVector> read_count_vectors(const std::filesystem::path& path,
                                            const VectorReadOptions& options = {});

void write_count_vectors(std::ostream& out, std::span<const CountVector> cs,
                         VectorFormat format);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// Raw logs: text lines with a leading timestamp, or JSONL {"ts": ..., "msg": ...}.

enum class LogFormat { kText, kJsonl };

LogFormat log_format_for(const std::filesystem::path& path);

struct LogReadOptions {
  /// Leading-timestamp pattern for text logs; capture group 1 (or the whole
  /// match) is the timestamp, the rest of the line the message.
  std::string timestamp_regex = default_timestamp_regex();
  /// When false, lines without a timestamp are accepted with timestamp 0 (or
  /// the previous line's). When true the first line must carry one.
  bool require_timestamps = true;

  static std::string default_timestamp_regex();
};

class LogReader {
 public:
  LogReader(std::istream& in, LogFormat format, LogReadOptions options = {});

  std::optional<LogRecord> next();

 private:
  std::istream& in_;
  LogFormat format_;
  LogReadOptions options_;
  std::regex leading_;
  std::optional<std::int64_t> previous_;
  std::size_t line_no_ = 0;
};

std::vector<LogRecord> read_logs(std::istream& in, LogFormat format,
                                 const LogReadOptions& options = {});
std::vector<LogRecord> read_logs(const std::filesystem::path& path,
                                 const LogReadOptions& options = {});

/// RFC 3339 / ISO-8601 date-time, or epoch digits (13 digits: ms, else s).
std::optional<std::int64_t> parse_timestamp(std::string_view text);

// ---------------------------------------------------------------------------
// JSON documents.

void to_json(json& j, const TemplateSet& ts);
void from_json(const json& j, TemplateSet& ts);
TemplateSet read_template_set(const std::filesystem::path& path);

void to_json(json& j, const DetectorConfig& cfg);
/// Missing keys keep the values already in `cfg`. `window` accepts an integer,
/// "inf" or null.
void from_json(const json& j, DetectorConfig& cfg);

void to_json(json& j, const DetectorCheckpoint& cp);
void from_json(const json& j, DetectorCheckpoint& cp);

/// {"alpha": [...]} is taken as-is; {"probs": [...]} goes through build_prior.
DirichletState prior_from_json(const json& j, double kappa_prior, double epsilon);

void to_json(json& j, const FitReport& report);
void to_json(json& j, const SdDiagnostic& diag);
void to_json(json& j, const RunMetrics& metrics);
void to_json(json& j, const SyntheticPoolSpec& spec);
void from_json(const json& j, SyntheticPoolSpec& spec);

struct ScenarioFile {
  ScenarioConfig config;
  std::optional<SyntheticPoolSpec> synthetic;
};

/// Keys: T, t_s, p, ell (integer, "inf" or null), R, seed, detector, synthetic.
ScenarioFile scenario_from_json(const json& j);
json scenario_to_json(const ScenarioFile& scenario);

json read_json_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

/// Writes to a sibling temporary file that replaces `path` only on commit().
/// An uncommitted file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace logdrift
