#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json_config.hpp"
#include "logdrift/core.hpp"
#include "logdrift/detector.hpp"
#include "logdrift/io.hpp"
#include "logdrift/multinomial.hpp"
#include "logdrift/simulator.hpp"
#include "logdrift/templater.hpp"

namespace logdrift::cli {
namespace {

namespace fs = std::filesystem;

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool verbose = false;
};

// Destination that is either the caller's stream or an atomically replaced file.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(&fallback) {
    if (!path.empty() && path != "-") file_ = std::make_unique<AtomicFile>(path);
  }
  std::ostream& stream() { return file_ ? file_->stream() : *fallback_; }
  bool is_file() const { return file_ != nullptr; }
  void commit() {
    if (file_) {
      file_->commit();
    } else {
      fallback_->flush();
    }
  }

 private:
  std::unique_ptr<AtomicFile> file_;
  std::ostream* fallback_;
};

// Input that is either the caller's stream ("-") or an opened file.
class Input {
 public:
  Input(const std::string& path, std::istream& fallback) : stream_(&fallback) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::kIo, "cannot open " + path);
      stream_ = &file_;
    }
  }
  std::istream& stream() { return *stream_; }

 private:
  std::ifstream file_;
  std::istream* stream_;
};

VectorFormat vector_format(const std::string& path, const std::string& explicit_format) {
  if (explicit_format == "csv") return VectorFormat::kCsv;
  if (explicit_format == "jsonl") return VectorFormat::kJsonl;
  if (path.empty() || path == "-") return VectorFormat::kJsonl;
  return vector_format_for(path);
}

LogFormat log_format(const std::string& path, const std::string& explicit_format) {
  if (explicit_format == "text") return LogFormat::kText;
  if (explicit_format == "jsonl") return LogFormat::kJsonl;
  if (path == "-") return LogFormat::kText;
  return log_format_for(path);
}

std::optional<std::size_t> parse_window(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "unbounded") return std::nullopt;
  std::size_t value = 0;
  std::size_t used = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw Error(ErrorCode::kInvalidArgument, "--window must be an integer >= 2 or \"inf\"");
  }
  return value;
}

std::vector<std::string> split_keywords(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string kw;
    while (std::getline(ss, kw, ',')) {
      if (!kw.empty()) out.push_back(kw);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct LogInputOptions {
  std::string format;
  std::vector<std::string> prefix_regex;
  std::string timestamp_regex = LogReadOptions::default_timestamp_regex();
  std::vector<std::string> mask_regex;
  bool default_masks = true;

  Preprocessor preprocessor() const {
    std::vector<std::string> masks = default_masks ? Preprocessor::default_timestamp_patterns()
                                                   : std::vector<std::string>{};
    masks.insert(masks.end(), mask_regex.begin(), mask_regex.end());
    return Preprocessor(prefix_regex, masks);
  }
};

void add_log_input_options(CLI::App* cmd, LogInputOptions& o) {
  cmd->add_option("--log-format", o.format, "Raw log format (default: by extension)")
      ->check(CLI::IsMember({"text", "jsonl"}));
  cmd->add_option("--prefix-regex", o.prefix_regex,
                  "Regex stripped from the start of each message (repeatable)");
  cmd->add_option("--timestamp-regex", o.timestamp_regex,
                  "Leading timestamp pattern for text logs (group 1 = timestamp)");
  cmd->add_option("--mask-regex", o.mask_regex,
                  "Additional pattern replaced by <TS> inside messages (repeatable)");
}

// ---------------------------------------------------------------------------

struct TemplatesOptions {
  std::string input;
  std::string output;
  std::string report;
  double threshold = 0.5;
  std::vector<std::string> keywords;
  LogInputOptions logs;
};

int cmd_templates(const TemplatesOptions& o, const GlobalOptions& g, Streams io) {
  Input input(o.input, io.in);
  LogReadOptions read_opts;
  read_opts.timestamp_regex = o.logs.timestamp_regex;
  read_opts.require_timestamps = false;
  LogReader reader(input.stream(), log_format(o.input, o.logs.format), read_opts);

  const Preprocessor preprocess = o.logs.preprocessor();
  std::vector<std::string> lines;
  std::size_t dropped = 0;
  while (auto record = reader.next()) {
    if (auto line = preprocess(record->message)) {
      lines.push_back(std::move(*line));
    } else {
      ++dropped;
    }
  }
  if (lines.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no usable log lines in " + o.input);
  }
  auto keywords = o.keywords.empty() ? default_error_keywords() : split_keywords(o.keywords);
  const MiningResult mined = mine_templates_with_report(lines, o.threshold, keywords);

  json report = {{"K", mined.templates.size()},
                 {"lines", lines.size()},
                 {"dropped", dropped},
                 {"templates", json::array()}};
  for (const auto& t : mined.templates.templates()) {
    report["templates"].push_back(
        {{"id", t.id},
         {"pattern", t.pattern},
         {"lines", mined.line_counts[static_cast<std::size_t>(t.id - 1)]}});
  }

  Output out(o.output, io.out);
  out.stream() << json(mined.templates).dump(2) << '\n';
  if (!o.report.empty()) {
    Output rep(o.report, io.err);
    rep.stream() << report.dump(2) << '\n';
    rep.commit();
  } else if (!g.quiet) {
    io.err << "mined K=" << mined.templates.size() << " templates from " << lines.size()
           << " lines (" << dropped << " dropped)\n";
    if (g.verbose) {
      for (const auto& t : report["templates"]) {
        io.err << "  " << t["id"].get<int>() << "\t" << t["lines"].get<std::size_t>() << "\t"
               << t["pattern"].get<std::string>() << '\n';
      }
    }
  }
  out.commit();
  return kOk;
}

// ---------------------------------------------------------------------------

struct VectorsOptions {
  std::string logs;
  std::string templates;
  std::string output;
  std::string output_format;
  double width = 10.0;
  bool training = false;
  LogInputOptions log_input;
};

int cmd_vectors(const VectorsOptions& o, const GlobalOptions& g, Streams io) {
  const TemplateSet templates = read_template_set(o.templates);
  const TemplateMatcher matcher(templates);
  const Preprocessor preprocess = o.log_input.preprocessor();
  WindowCounter counter(matcher, preprocess, WindowSpec{o.width});

  Input input(o.logs, io.in);
  LogReadOptions read_opts;
  read_opts.timestamp_regex = o.log_input.timestamp_regex;
  LogReader reader(input.stream(), log_format(o.logs, o.log_input.format), read_opts);

  std::vector<CountVector> vectors;
  while (auto record = reader.next()) {
    if (auto v = counter.push(*record)) vectors.push_back(std::move(*v));
  }
  if (auto v = counter.finish()) vectors.push_back(std::move(*v));

  if (o.training) {
    const auto unk_error = static_cast<Eigen::Index>(templates.unk_error_slot()) - 1;
    for (const auto& v : vectors) {
      if (v[unk_error] != 0.0 || v[unk_error + 1] != 0.0) {
        throw Error(ErrorCode::kInvariantViolation,
                    "training window " + std::to_string(v.window_index()) +
                        " has unmatched lines (unk_error=" + format_double(v[unk_error]) +
                        ", unk_normal=" + format_double(v[unk_error + 1]) + ")");
      }
    }
  }

  Output out(o.output, io.out);
  write_count_vectors(out.stream(), vectors, vector_format(o.output, o.output_format));
  out.commit();
  if (!g.quiet) {
    io.err << "wrote " << vectors.size() << " count vectors (K=" << templates.size() << ", "
           << counter.dropped() << " empty messages dropped)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string format;
  std::string templates;
  std::string output;
  bool sd = false;
  double sd_n = 1.0;
};

int cmd_fit(const FitOptions& o, const GlobalOptions&, Streams io) {
  VectorReadOptions read_opts;
  read_opts.require_integer = true;
  if (!o.templates.empty()) read_opts.expected_length = read_template_set(o.templates).vector_length();
  Input input(o.input, io.in);
  const auto cs = read_count_vectors(input.stream(), vector_format(o.input, o.format), read_opts);

  json result = chi_squared_fit(cs);
  if (o.sd) {
    std::vector<CountVector> normalized;
    normalized.reserve(cs.size());
    for (const auto& c : cs) normalized.push_back(normalize(c));
    const ProbabilityVector p = elementwise_mean(normalized);
    result["sd_diagnostic"] = sd_diagnostic(normalized, p, o.sd_n);
  }
  Output out(o.output, io.out);
  out.stream() << result.dump() << '\n';
  out.commit();
  return kOk;
}

// ---------------------------------------------------------------------------

struct MonitorOptions {
  std::string templates;
  std::string prior;
  std::string baseline;
  std::string input;
  std::string logs;
  std::string format;
  std::string output;
  std::string checkpoint_in;
  std::string checkpoint_out;
  std::string window = "100";
  double kappa_count = 1.0;
  double kappa_prior = 1.0;
  double epsilon = 1e-6;
  double alpha = 0.05;
  std::size_t grace = 100;
  double b0 = 0.0;
  bool lag_compat = false;
  bool exit_on_detect = false;
  double width = 10.0;
  LogInputOptions log_input;

  // set after parsing: which detector flags were given explicitly
  std::vector<std::string> explicit_flags;
};

DetectorConfig detector_config(const MonitorOptions& o) {
  DetectorConfig cfg;
  cfg.window = parse_window(o.window);
  cfg.kappa_count = o.kappa_count;
  cfg.kappa_prior = o.kappa_prior;
  cfg.epsilon = o.epsilon;
  cfg.alpha_level = o.alpha;
  cfg.grace = o.grace;
  cfg.log_prior_odds = o.b0;
  cfg.lag_compat = o.lag_compat;
  cfg.validate();
  return cfg;
}

bool given(const MonitorOptions& o, const std::string& flag) {
  return std::find(o.explicit_flags.begin(), o.explicit_flags.end(), flag) !=
         o.explicit_flags.end();
}

Detector make_detector(const MonitorOptions& o, std::optional<std::size_t> expected_length) {
  const DetectorConfig flags = detector_config(o);
  if (!o.checkpoint_in.empty()) {
    DetectorCheckpoint cp = read_json_file(o.checkpoint_in).get<DetectorCheckpoint>();
    if (given(o, "window")) cp.config.window = flags.window;
    if (given(o, "kappa-count")) cp.config.kappa_count = flags.kappa_count;
    if (given(o, "alpha")) cp.config.alpha_level = flags.alpha_level;
    if (given(o, "grace")) cp.config.grace = flags.grace;
    if (given(o, "b0")) cp.config.log_prior_odds = flags.log_prior_odds;
    if (given(o, "lag-compat")) cp.config.lag_compat = flags.lag_compat;
    if (cp.config.window && cp.window.size() > *cp.config.window) {
      cp.window.erase(cp.window.begin(),
                      cp.window.end() - static_cast<std::ptrdiff_t>(*cp.config.window));
    }
    return Detector::restore(cp);
  }
  std::optional<DirichletState> prior;
  if (!o.prior.empty()) {
    prior = prior_from_json(read_json_file(o.prior), flags.kappa_prior, flags.epsilon);
  } else if (!o.baseline.empty()) {
    VectorReadOptions read_opts;
    read_opts.expected_length = expected_length;
    const auto baseline = read_count_vectors(o.baseline, read_opts);
    std::vector<CountVector> normalized;
    for (const auto& c : baseline) {
      if (c.total() > 0.0) normalized.push_back(normalize(c));
    }
    prior = build_prior(elementwise_mean(normalized), flags.kappa_prior, flags.epsilon);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "monitor needs --prior, --baseline or --checkpoint-in");
  }
  if (expected_length && static_cast<std::size_t>(prior->size()) != *expected_length) {
    throw Error(ErrorCode::kLengthMismatch,
                "prior has " + std::to_string(prior->size()) + " slots, templates imply " +
                    std::to_string(*expected_length));
  }
  return Detector(*prior, flags);
}

int cmd_monitor(const MonitorOptions& o, const GlobalOptions& g, Streams io) {
  if (o.input.empty() == o.logs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "monitor needs exactly one of --input or --logs");
  }
  if (!o.logs.empty() && o.templates.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--logs requires --templates");
  }
  std::optional<TemplateSet> templates;
  if (!o.templates.empty()) templates = read_template_set(o.templates);
  const std::optional<std::size_t> expected =
      templates ? std::optional<std::size_t>(templates->vector_length()) : std::nullopt;

  Detector detector = make_detector(o, expected);
  const DetectorConfig& cfg = detector.config();
  if (!g.quiet) {
    io.err << "# logdrift monitor: threshold c = ln(1/alpha) = " << std::fixed
           << std::setprecision(4) << cfg.threshold() << std::defaultfloat
           << " (alpha=" << cfg.alpha_level << ", window="
           << (cfg.window ? std::to_string(*cfg.window) : std::string("inf"))
           << ", grace=" << cfg.grace << ", slots=" << detector.prior().size() << ")\n";
  }

  Output out(o.output, io.out);
  std::size_t first = 0;
  auto emit = [&](const CountVector& c) -> bool {
    const auto entry = detector.observe(c);
    json line;
    if (entry) {
      line = {{"t", entry->t}, {"log_bf", entry->log_bf}, {"flagged", entry->flagged}};
      if (entry->flagged && first == 0) first = entry->t;
    } else {
      line = {{"t", detector.t()}, {"skipped", true}};
    }
    out.stream() << line.dump() << '\n';
    if (!out.is_file()) out.stream().flush();
    return entry && entry->flagged && o.exit_on_detect;
  };

  bool stop = false;
  if (!o.input.empty()) {
    Input input(o.input, io.in);
    VectorReadOptions read_opts;
    read_opts.expected_length = expected ? expected
                                         : std::optional<std::size_t>(detector.prior().size());
    CountVectorReader reader(input.stream(), vector_format(o.input, o.format), read_opts);
    while (!stop) {
      auto c = reader.next();
      if (!c) break;
      stop = emit(*c);
    }
  } else {
    const TemplateMatcher matcher(*templates);
    const Preprocessor preprocess = o.log_input.preprocessor();
    WindowCounter counter(matcher, preprocess, WindowSpec{o.width});
    Input input(o.logs, io.in);
    LogReadOptions read_opts;
    read_opts.timestamp_regex = o.log_input.timestamp_regex;
    LogReader reader(input.stream(), log_format(o.logs, o.log_input.format), read_opts);
    while (!stop) {
      auto record = reader.next();
      if (!record) {
        if (auto c = counter.finish()) stop = emit(*c);
        break;
      }
      if (auto c = counter.push(*record)) stop = emit(*c);
    }
  }

  out.stream() << json{{"first_detection", first}}.dump() << '\n';
  if (!o.checkpoint_out.empty()) {
    Output cp(o.checkpoint_out, io.err);
    cp.stream() << json(detector.checkpoint()).dump() << '\n';
    cp.commit();
  }
  out.commit();
  return stop ? kDetection : kOk;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string scenario;
  std::string pool_n;
  std::string pool_a;
  std::string output;
  std::string metrics;
  std::string emit_traces;
  bool synthetic = false;
  std::optional<std::size_t> synthetic_templates;
  std::optional<std::size_t> synthetic_lines;
  std::optional<std::size_t> synthetic_pool_size;
  std::optional<double> synthetic_overlap;
  unsigned threads = 0;
};

int cmd_simulate(const SimulateOptions& o, const GlobalOptions& g, Streams io) {
  ScenarioFile scenario = scenario_from_json(read_json_file(o.scenario));
  if (g.seed) scenario.config.seed = *g.seed;
  scenario.config.validate();

  std::vector<CountVector> normal;
  std::vector<CountVector> anomalous;
  if (!o.pool_n.empty() || !o.pool_a.empty()) {
    if (o.pool_n.empty() || o.pool_a.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--pool-n and --pool-a go together");
    }
    normal = read_count_vectors(o.pool_n);
    anomalous = read_count_vectors(o.pool_a);
  } else if (o.synthetic || scenario.synthetic) {
    SyntheticPoolSpec spec = scenario.synthetic.value_or(SyntheticPoolSpec{});
    if (o.synthetic_templates) spec.templates = *o.synthetic_templates;
    if (o.synthetic_lines) spec.lines_per_window = *o.synthetic_lines;
    if (o.synthetic_pool_size) spec.pool_size = *o.synthetic_pool_size;
    if (o.synthetic_overlap) spec.overlap = *o.synthetic_overlap;
    SyntheticPools pools = make_synthetic_pools(spec);
    normal = std::move(pools.normal);
    anomalous = std::move(pools.anomalous);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "simulate needs --pool-n/--pool-a, --synthetic or a \"synthetic\" scenario section");
  }

  const auto runs = run_scenario(scenario.config, normal, anomalous, o.threads);

  if (!o.emit_traces.empty()) {
    fs::create_directories(o.emit_traces);
    for (const auto& run : runs) {
      Output trace((fs::path(o.emit_traces) / ("trace_r" + std::to_string(run.repetition) +
                                               ".jsonl")).string(),
                   io.err);
      for (const auto& e : run.trace.entries) {
        trace.stream() << json{{"t", e.t}, {"log_bf", e.log_bf}, {"flagged", e.flagged}}.dump()
                       << '\n';
      }
      trace.commit();
    }
  }

  std::vector<std::size_t> detections;
  Output out(o.output, io.out);
  for (const auto& run : runs) {
    detections.push_back(run.detection);
    out.stream() << json{{"r", run.repetition}, {"d", run.detection}}.dump() << '\n';
  }
  const RunMetrics metrics =
      evaluate(detections, scenario.config.start, scenario.config.detector.grace);
  if (!o.metrics.empty()) {
    Output m(o.metrics, io.err);
    m.stream() << json(metrics).dump() << '\n';
    m.commit();
  }
  out.commit();
  if (!g.quiet) io.err << "metrics: " << json(metrics).dump() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string input;
  std::string output;
  std::string scenario;
  std::optional<std::size_t> start;
  std::optional<std::size_t> grace;
};

int cmd_eval(const EvalOptions& o, const GlobalOptions&, Streams io) {
  std::optional<std::size_t> start = o.start;
  std::optional<std::size_t> grace = o.grace;
  if (!o.scenario.empty()) {
    const ScenarioFile scenario = scenario_from_json(read_json_file(o.scenario));
    if (!start) start = scenario.config.start;
    if (!grace) grace = scenario.config.detector.grace;
  }
  if (!start) throw Error(ErrorCode::kInvalidArgument, "eval needs --t-s or --scenario");
  if (!grace) grace = DetectorConfig{}.grace;

  Input input(o.input, io.in);
  std::vector<std::size_t> detections;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input.stream(), line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("d") || !record["d"].is_number_unsigned()) {
      throw Error(ErrorCode::kFormat,
                  "line " + std::to_string(line_no) + ": expected {\"r\": int, \"d\": int}");
    }
    detections.push_back(record["d"].get<std::size_t>());
  }
  const RunMetrics metrics = evaluate(detections, *start, *grace);
  Output out(o.output, io.out);
  out.stream() << json(metrics).dump() << '\n';
  out.commit();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Streams io{in, out, err};
  CLI::App app{"logdrift: log template count vectors and Bayes Factor drift monitoring",
               "logdrift"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; flags override file values");

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Override the RNG seed of stochastic subcommands");
  app.add_flag("-q,--quiet", global.quiet, "Suppress diagnostics on stderr");
  app.add_flag("-v,--verbose", global.verbose, "Extra diagnostics on stderr");

  TemplatesOptions templates;
  auto* t = app.add_subcommand("templates", "Mine a TemplateSet from training logs");
  t->add_option("-i,--input", templates.input, "Raw log file ('-' for stdin)")->required();
  t->add_option("-o,--output", templates.output, "TemplateSet JSON (default stdout)");
  t->add_option("--report", templates.report, "Mining report JSON (K, per-template counts)");
  t->add_option("--threshold", templates.threshold, "Token agreement threshold in (0,1]")
      ->check(CLI::Range(0.0, 1.0))
      ->check(CLI::PositiveNumber);
  t->add_option("--error-keywords", templates.keywords, "Comma-separated error keywords");
  add_log_input_options(t, templates.logs);

  VectorsOptions vectors;
  auto* v = app.add_subcommand("vectors", "Convert raw logs into windowed count vectors");
  v->add_option("-l,--logs", vectors.logs, "Raw log file ('-' for stdin)")->required();
  v->add_option("--templates", vectors.templates, "TemplateSet JSON")->required();
  v->add_option("-o,--output", vectors.output, "Output file (.csv or .jsonl; default stdout)");
  v->add_option("--output-format", vectors.output_format, "Force csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  v->add_option("--width", vectors.width, "Window width in seconds")->check(CLI::PositiveNumber);
  v->add_flag("--training", vectors.training,
              "Fail with exit 3 if any line is unmatched (training data)");
  add_log_input_options(v, vectors.log_input);

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Chi-squared test for a shared multinomial parameter");
  f->add_option("-i,--input", fit.input, "Raw integer count vectors ('-' for stdin)")->required();
  f->add_option("--format", fit.format, "csv or jsonl (default: by extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  f->add_option("--templates", fit.templates, "TemplateSet JSON used to validate lengths");
  f->add_option("-o,--output", fit.output, "FitReport JSON (default stdout)");
  f->add_flag("--sd", fit.sd, "Add the elementwise SD diagnostic on normalized vectors");
  f->add_option("--sd-n", fit.sd_n, "Multinomial size n for the theoretical SD")
      ->check(CLI::PositiveNumber);

  MonitorOptions monitor;
  auto* m = app.add_subcommand("monitor", "Run the windowed Bayes Factor detector");
  m->add_option("--templates", monitor.templates, "TemplateSet JSON");
  m->add_option("--prior", monitor.prior, "Prior JSON: {\"alpha\": [...]} or {\"probs\": [...]}");
  m->add_option("--baseline", monitor.baseline, "Baseline count vectors; prior from their mean");
  m->add_option("-i,--input", monitor.input, "Count vectors to monitor ('-' for stdin)");
  m->add_option("-l,--logs", monitor.logs, "Raw logs to monitor (needs --templates)");
  m->add_option("--format", monitor.format, "Vector input format: csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  m->add_option("-o,--output", monitor.output, "JSONL trace (default stdout)");
  m->add_option("--checkpoint-in", monitor.checkpoint_in, "Resume from a checkpoint JSON");
  m->add_option("--checkpoint-out", monitor.checkpoint_out, "Write the final detector state");
  m->add_option("--window", monitor.window, "Evidence window (integer >= 2 or inf)");
  m->add_option("--kappa-count", monitor.kappa_count, "Rescaled mass of each window")
      ->check(CLI::PositiveNumber);
  m->add_option("--kappa-prior", monitor.kappa_prior, "Prior strength")->check(CLI::PositiveNumber);
  m->add_option("--epsilon", monitor.epsilon, "Prior weight of unseen slots")
      ->check(CLI::PositiveNumber);
  m->add_option("--alpha", monitor.alpha, "Level; threshold is ln(1/alpha)")
      ->check(CLI::Range(0.0, 1.0))
      ->check(CLI::PositiveNumber);
  m->add_option("--grace", monitor.grace, "Detections before this step are ignored");
  m->add_option("--b0", monitor.b0, "Log prior odds added to every log-BF");
  m->add_flag("--lag-compat", monitor.lag_compat, "Score before appending (one-step lag)");
  m->add_flag("--exit-on-detect", monitor.exit_on_detect, "Stop with exit 4 at first detection");
  m->add_option("--width", monitor.width, "Window width in seconds for --logs")
      ->check(CLI::PositiveNumber);
  add_log_input_options(m, monitor.log_input);

  SimulateOptions simulate;
  auto* s = app.add_subcommand("simulate", "Run a contamination scenario");
  s->add_option("--scenario", simulate.scenario, "Scenario JSON")->required();
  s->add_option("--pool-n", simulate.pool_n, "Normal pool count vectors");
  s->add_option("--pool-a", simulate.pool_a, "Anomalous pool count vectors");
  s->add_flag("--synthetic", simulate.synthetic, "Generate synthetic multinomial pools");
  s->add_option("--synthetic-templates", simulate.synthetic_templates, "Synthetic K");
  s->add_option("--synthetic-lines", simulate.synthetic_lines, "Lines per synthetic window");
  s->add_option("--synthetic-pool-size", simulate.synthetic_pool_size, "Vectors per pool");
  s->add_option("--synthetic-overlap", simulate.synthetic_overlap,
                "Anomalous mass on baseline templates")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("-o,--output", simulate.output, "Detections JSONL (default stdout)");
  s->add_option("--metrics", simulate.metrics, "Also write RunMetrics JSON");
  s->add_option("--emit-traces", simulate.emit_traces, "Directory for per-run trace JSONL");
  s->add_option("--threads", simulate.threads, "Worker threads (0 = hardware)");

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Compute TPR/FPR/FNR/ADD from detections");
  e->add_option("-i,--input", eval.input, "Detections JSONL ('-' for stdin)")->required();
  e->add_option("-o,--output", eval.output, "RunMetrics JSON (default stdout)");
  e->add_option("--scenario", eval.scenario, "Take t_s and grace from a scenario file");
  e->add_option("--t-s", eval.start, "Contamination start window");
  e->add_option("--grace", eval.grace, "Grace period");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kInputError;
  }

  for (const char* name : {"window", "kappa-count", "alpha", "grace", "b0", "lag-compat"}) {
    if (m->count(std::string("--") + name) > 0) monitor.explicit_flags.emplace_back(name);
  }

  try {
    if (*t) return cmd_templates(templates, global, io);
    if (*v) return cmd_vectors(vectors, global, io);
    if (*f) return cmd_fit(fit, global, io);
    if (*m) return cmd_monitor(monitor, global, io);
    if (*s) return cmd_simulate(simulate, global, io);
    if (*e) return cmd_eval(eval, global, io);
  } catch (const Error& ex) {
    err << "logdrift: " << ex.what() << '\n';
    return ex.code() == ErrorCode::kInvariantViolation ? kInvariantViolation : kInputError;
  } catch (const std::exception& ex) {
    err << "logdrift: internal error: " << ex.what() << '\n';
    return kInternalError;
  }
  return kInputError;
}

}  // namespace logdrift::cli
