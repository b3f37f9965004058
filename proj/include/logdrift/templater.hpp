#pragma once

#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logdrift/core.hpp"

namespace logdrift {

inline constexpr std::string_view kWildcard = "<*>";
inline constexpr std::string_view kTimestampToken = "<TS>";

struct LogRecord {
  std::int64_t timestamp_ms = 0;
  std::string message;
};

struct WindowSpec {
  double width_seconds = 10.0;
};

/// Cleaning rules applied before mining and matching.
class Preprocessor {
 public:
  /// Default timestamp masks: ISO-8601 date-times, HH:MM:SS clock times and
  /// 10/13-digit epoch integers.
  static std::vector<std::string> default_timestamp_patterns();

  explicit Preprocessor(std::vector<std::string> prefix_patterns = {},
                        std::vector<std::string> timestamp_patterns =
                            default_timestamp_patterns());

  /// Strips prefixes, masks timestamps with <TS> and collapses whitespace.
  /// Returns nullopt for lines that end up empty.
  std::optional<std::string> operator()(std::string_view raw) const;

 private:
  std::vector<std::regex> prefixes_;
  std::vector<std::regex> timestamps_;
};

std::optional<std::string> preprocess(std::string_view raw);

std::vector<std::string> tokenize(std::string_view line);

struct MiningResult {
  TemplateSet templates;
  /// Training lines assigned to each template, indexed by id - 1.
  std::vector<std::size_t> line_counts;
};

/// Groups lines by token count, then greedily clusters each group: a line joins
/// the most similar existing cluster when the fraction of positions holding an
/// identical literal token is >= similarity_threshold; disagreeing positions
/// become <*>. Clusters ending with identical patterns are merged. Ids follow
/// first appearance.
MiningResult mine_templates_with_report(
    std::span<const std::string> lines, double similarity_threshold = 0.5,
    std::vector<std::string> error_keywords = default_error_keywords());

TemplateSet mine_templates(std::span<const std::string> lines,
                           double similarity_threshold = 0.5,
                           std::vector<std::string> error_keywords = default_error_keywords());

/// Precompiled template lookup. `<*>` matches exactly one whitespace-delimited
/// token when it stands alone, or any run of non-space characters inside a token.
class TemplateMatcher {
 public:
  explicit TemplateMatcher(TemplateSet templates);

  /// 1-based slot: lowest matching template id, else K+1 if an error keyword
  /// occurs (case-insensitive), else K+2.
  std::size_t match(std::string_view line) const;

  const TemplateSet& templates() const noexcept { return templates_; }

 private:
  struct Compiled {
    std::size_t id;
    std::vector<std::string> tokens;
  };

  TemplateSet templates_;
  // grouped by token count, each group sorted by id
  std::vector<std::vector<Compiled>> by_length_;
};

std::size_t match_template(std::string_view line, const TemplateSet& templates);

/// Accumulates time-ordered records into per-window count vectors. Windows are
/// half-open intervals anchored at the first record; empty intervals emit
/// nothing. window_index is the interval number counted from the anchor.
class WindowCounter {
 public:
  WindowCounter(const TemplateMatcher& matcher, const Preprocessor& preprocessor,
                WindowSpec spec);

  /// Returns the vector of a window that this record closes, if any. Throws
  /// kUnsortedInput when the timestamp regresses.
  std::optional<CountVector> push(const LogRecord& record);

  /// Flushes the window in progress.
  std::optional<CountVector> finish();

  std::size_t dropped() const noexcept { return dropped_; }

 private:
  const TemplateMatcher& matcher_;
  const Preprocessor& preprocessor_;
  std::int64_t width_ms_;
  std::optional<std::int64_t> anchor_;
  std::int64_t last_ts_ = 0;
  std::int64_t current_window_ = 0;
  Vector counts_;
  std::size_t dropped_ = 0;
};

std::vector<CountVector> window_counts(std::span<const LogRecord> records,
                                       const TemplateSet& templates, WindowSpec spec = {},
                                       const Preprocessor& preprocessor = Preprocessor());

}  // namespace logdrift
