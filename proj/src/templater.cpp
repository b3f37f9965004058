#include "logdrift/templater.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

namespace logdrift {
namespace {

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::regex compile(const std::string& pattern) {
  try {
    return std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "bad regex '" + pattern + "': " + e.what());
  }
}

// `<*>` embedded in a token matches any (possibly empty) run of characters.
bool glob_token_match(std::string_view pattern, std::string_view token) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = pattern.find(kWildcard, pos);
    if (hit == std::string_view::npos) {
      parts.push_back(pattern.substr(pos));
      break;
    }
    parts.push_back(pattern.substr(pos, hit - pos));
    pos = hit + kWildcard.size();
  }
  if (parts.size() == 1) return pattern == token;
  const std::string_view head = parts.front();
  const std::string_view tail = parts.back();
  if (token.size() < head.size() + tail.size()) return false;
  if (token.substr(0, head.size()) != head) return false;
  if (token.substr(token.size() - tail.size()) != tail) return false;
  std::string_view middle = token.substr(head.size(), token.size() - head.size() - tail.size());
  for (std::size_t i = 1; i + 1 < parts.size(); ++i) {
    const std::size_t hit = middle.find(parts[i]);
    if (hit == std::string_view::npos) return false;
    middle.remove_prefix(hit + parts[i].size());
  }
  return true;
}

bool token_matches(const std::string& pattern, const std::string& token) {
  if (pattern == kWildcard) return true;
  if (pattern.find(kWildcard) == std::string::npos) return pattern == token;
  return glob_token_match(pattern, token);
}

struct Cluster {
  std::vector<std::string> tokens;
  std::size_t lines = 0;
};

double similarity(const std::vector<std::string>& cluster,
                  const std::vector<std::string>& line) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (cluster[i] != kWildcard && cluster[i] == line[i]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(line.size());
}

}  // namespace

std::vector<std::string> Preprocessor::default_timestamp_patterns() {
  return {
      R"(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(?:[.,]\d+)?(?:Z|[+-]\d{2}:?\d{2})?)",
      R"(\b\d{1,2}:\d{2}:\d{2}(?:[.,]\d+)?\b)",
      R"(\b\d{13}\b|\b\d{10}\b)",
  };
}

Preprocessor::Preprocessor(std::vector<std::string> prefix_patterns,
                           std::vector<std::string> timestamp_patterns) {
  for (const auto& p : prefix_patterns) prefixes_.push_back(compile(p));
  for (const auto& p : timestamp_patterns) timestamps_.push_back(compile(p));
}

std::optional<std::string> Preprocessor::operator()(std::string_view raw) const {
  std::size_t begin = 0;
  while (begin < raw.size() && is_space(raw[begin])) ++begin;
  std::string line(raw.substr(begin));
  for (const auto& prefix : prefixes_) {
    std::smatch m;
    if (std::regex_search(line, m, prefix, std::regex_constants::match_continuous)) {
      line.erase(0, static_cast<std::size_t>(m.length(0)));
    }
  }
  for (const auto& ts : timestamps_) {
    line = std::regex_replace(line, ts, std::string(kTimestampToken));
  }
  std::string cleaned = join(tokenize(line));
  if (cleaned.empty()) return std::nullopt;
  return cleaned;
}

std::optional<std::string> preprocess(std::string_view raw) {
  static const Preprocessor kDefault;
  return kDefault(raw);
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

MiningResult mine_templates_with_report(std::span<const std::string> lines,
                                        double similarity_threshold,
                                        std::vector<std::string> error_keywords) {
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "similarity threshold must lie in (0, 1]");
  }
  std::vector<Cluster> clusters;
  std::map<std::size_t, std::vector<std::size_t>> groups;  // token count -> cluster indices

  for (const auto& line : lines) {
    std::vector<std::string> tokens = tokenize(line);
    if (tokens.empty()) continue;
    auto& group = groups[tokens.size()];
    std::size_t best = clusters.size();
    double best_sim = -1.0;
    for (std::size_t idx : group) {
      const double sim = similarity(clusters[idx].tokens, tokens);
      if (sim >= similarity_threshold && sim > best_sim) {
        best = idx;
        best_sim = sim;
      }
    }
    if (best == clusters.size()) {
      group.push_back(clusters.size());
      clusters.push_back({std::move(tokens), 1});
      continue;
    }
    Cluster& cluster = clusters[best];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (cluster.tokens[i] != tokens[i]) cluster.tokens[i] = std::string(kWildcard);
    }
    ++cluster.lines;
  }
  if (clusters.empty()) throw Error(ErrorCode::kEmptyCorpus, "no non-empty training lines");

  std::vector<Template> templates;
  std::vector<std::size_t> counts;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& cluster : clusters) {
    std::string pattern = join(cluster.tokens);
    auto [it, inserted] = seen.try_emplace(pattern, templates.size());
    if (inserted) {
      templates.push_back({static_cast<int>(templates.size()) + 1, std::move(pattern)});
      counts.push_back(cluster.lines);
    } else {
      counts[it->second] += cluster.lines;
    }
  }
  return {TemplateSet(std::move(templates), std::move(error_keywords)), std::move(counts)};
}

TemplateSet mine_templates(std::span<const std::string> lines, double similarity_threshold,
                           std::vector<std::string> error_keywords) {
  return mine_templates_with_report(lines, similarity_threshold, std::move(error_keywords))
      .templates;
}

TemplateMatcher::TemplateMatcher(TemplateSet templates) : templates_(std::move(templates)) {
  for (const auto& t : templates_.templates()) {
    std::vector<std::string> tokens = tokenize(t.pattern);
    if (tokens.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template " + std::to_string(t.id) + " has no tokens");
    }
    if (by_length_.size() <= tokens.size()) by_length_.resize(tokens.size() + 1);
    // templates() is sorted by id, so each group stays sorted
    by_length_[tokens.size()].push_back({static_cast<std::size_t>(t.id), std::move(tokens)});
  }
}

std::size_t TemplateMatcher::match(std::string_view line) const {
  const std::vector<std::string> tokens = tokenize(line);
  if (tokens.size() < by_length_.size()) {
    for (const auto& candidate : by_length_[tokens.size()]) {
      bool ok = true;
      for (std::size_t i = 0; ok && i < tokens.size(); ++i) {
        ok = token_matches(candidate.tokens[i], tokens[i]);
      }
      if (ok) return candidate.id;
    }
  }
  const std::string lowered = to_lower(line);
  for (const auto& kw : templates_.error_keywords()) {
    if (lowered.find(kw) != std::string::npos) return templates_.unk_error_slot();
  }
  return templates_.unk_normal_slot();
}

std::size_t match_template(std::string_view line, const TemplateSet& templates) {
  return TemplateMatcher(templates).match(line);
}

WindowCounter::WindowCounter(const TemplateMatcher& matcher, const Preprocessor& preprocessor,
                             WindowSpec spec)
    : matcher_(matcher),
      preprocessor_(preprocessor),
      width_ms_(std::llround(spec.width_seconds * 1000.0)),
      counts_(Vector::Zero(static_cast<Eigen::Index>(matcher.templates().vector_length()))) {
  if (!(spec.width_seconds > 0.0) || width_ms_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "window width must be at least 1 ms");
  }
}

std::optional<CountVector> WindowCounter::push(const LogRecord& record) {
  if (record.timestamp_ms < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative timestamp");
  }
  if (!anchor_) {
    anchor_ = record.timestamp_ms;
  } else if (record.timestamp_ms < last_ts_) {
    throw Error(ErrorCode::kUnsortedInput,
                "timestamp " + std::to_string(record.timestamp_ms) + " precedes " +
                    std::to_string(last_ts_));
  }
  last_ts_ = record.timestamp_ms;

  std::optional<CountVector> closed;
  const std::int64_t window = (record.timestamp_ms - *anchor_) / width_ms_;
  if (window != current_window_) {
    closed = finish();
    current_window_ = window;
  }
  if (auto line = preprocessor_(record.message)) {
    counts_[static_cast<Eigen::Index>(matcher_.match(*line)) - 1] += 1.0;
  } else {
    ++dropped_;
  }
  return closed;
}

std::optional<CountVector> WindowCounter::finish() {
  if (counts_.sum() == 0.0) return std::nullopt;
  CountVector out(counts_, static_cast<std::size_t>(current_window_));
  counts_.setZero();
  return out;
}

std::vector<CountVector> window_counts(std::span<const LogRecord> records,
                                       const TemplateSet& templates, WindowSpec spec,
                                       const Preprocessor& preprocessor) {
  const TemplateMatcher matcher(templates);
  WindowCounter counter(matcher, preprocessor, spec);
  std::vector<CountVector> out;
  for (const auto& r : records) {
    if (auto v = counter.push(r)) out.push_back(std::move(*v));
  }
  if (auto v = counter.finish()) out.push_back(std::move(*v));
  return out;
}

}  // namespace logdrift
