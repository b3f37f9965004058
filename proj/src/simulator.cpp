#include "logdrift/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace logdrift {
namespace {

void check_pool(std::span<const CountVector> pool, const char* name) {
  if (pool.empty()) throw Error(ErrorCode::kEmptyPool, std::string(name) + " pool is empty");
  check_uniform_length(pool, pool.front().size());
  for (const auto& c : pool) {
    if (!(c.total() > 0.0)) {
      throw Error(ErrorCode::kAllZeroVector,
                  std::string(name) + " pool contains an all-zero vector");
    }
  }
}

ScenarioRun run_repetition(const ScenarioConfig& cfg, const DirichletState& prior,
                           std::span<const CountVector> normal_pool,
                           std::span<const CountVector> anomalous_pool, std::size_t r) {
  Rng rng(cfg.seed ^ static_cast<std::uint64_t>(r));
  Detector detector(prior, cfg.detector);
  ScenarioRun out;
  out.repetition = r;
  out.trace.entries.reserve(cfg.windows);
  for (std::size_t t = 1; t <= cfg.windows; ++t) {
    const CountVector c =
        sim_drift(normal_pool, anomalous_pool, contamination_profile(t, cfg), rng);
    if (auto entry = detector.observe(c)) {
      out.trace.entries.push_back(*entry);
    } else {
      out.trace.skipped.push_back(t);
    }
  }
  out.detection = first_detection(out.trace, cfg.detector);
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(start > 1 && start <= windows)) {
    throw Error(ErrorCode::kInvalidArgument, "contamination start must satisfy 1 < t_s <= T");
  }
  if (!(level >= 0.0 && level <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "contamination level must lie in [0, 1]");
  }
  if (length && *length == 0) {
    throw Error(ErrorCode::kInvalidArgument, "contamination length must be positive");
  }
  if (repetitions == 0) throw Error(ErrorCode::kInvalidArgument, "repetitions must be positive");
  detector.validate();
}

CountVector sim_drift(std::span<const CountVector> normal_pool,
                      std::span<const CountVector> anomalous_pool, double p, Rng& rng) {
  if (normal_pool.empty() || anomalous_pool.empty()) {
    throw Error(ErrorCode::kEmptyPool, "sim_drift needs two non-empty pools");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "contamination level must lie in [0, 1]");
  }
  const CountVector& normal = normal_pool[rng.uniform_index(normal_pool.size())];
  const CountVector& anomalous = anomalous_pool[rng.uniform_index(anomalous_pool.size())];
  if (normal.size() != anomalous.size()) {
    throw Error(ErrorCode::kLengthMismatch, "pools have different vector lengths");
  }
  const Vector mixed =
      p * normalize(anomalous).values() + (1.0 - p) * normalize(normal).values();
  return CountVector(mixed);
}

double contamination_profile(std::size_t t, const ScenarioConfig& cfg) {
  if (t < cfg.start) return 0.0;
  if (!cfg.length) return cfg.level;
  return t <= cfg.start + *cfg.length - 1 ? cfg.level : 0.0;
}

DirichletState scenario_prior(std::span<const CountVector> normal_pool,
                              const DetectorConfig& detector) {
  check_pool(normal_pool, "normal");
  std::vector<CountVector> normalized;
  normalized.reserve(normal_pool.size());
  for (const auto& c : normal_pool) normalized.push_back(normalize(c));
  return build_prior(elementwise_mean(normalized), detector.kappa_prior, detector.epsilon);
}

std::vector<ScenarioRun> run_scenario(const ScenarioConfig& cfg,
                                      std::span<const CountVector> normal_pool,
                                      std::span<const CountVector> anomalous_pool,
                                      unsigned threads) {
  cfg.validate();
  check_pool(normal_pool, "normal");
  check_pool(anomalous_pool, "anomalous");
  if (normal_pool.front().size() != anomalous_pool.front().size()) {
    throw Error(ErrorCode::kLengthMismatch, "pools have different vector lengths");
  }
  const DirichletState prior = scenario_prior(normal_pool, cfg.detector);

  std::vector<ScenarioRun> runs(cfg.repetitions);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.repetitions));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        runs[i] = run_repetition(cfg, prior, normal_pool, anomalous_pool, i + 1);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

RunMetrics evaluate(std::span<const std::size_t> detections, std::size_t start,
                    std::size_t grace) {
  if (detections.empty()) throw Error(ErrorCode::kEmptySample, "no detections to evaluate");
  std::size_t true_pos = 0, false_pos = 0, false_neg = 0, delay = 0;
  for (std::size_t d : detections) {
    if (d > 0 && d < grace) {
      throw Error(ErrorCode::kInvalidDetection,
                  "detection " + std::to_string(d) + " falls inside the grace period");
    }
    if (d == 0) {
      ++false_neg;
    } else if (d >= start) {
      ++true_pos;
      delay += d - start;
    } else {
      ++false_pos;
    }
  }
  const double runs = static_cast<double>(detections.size());
  RunMetrics m;
  m.runs = detections.size();
  m.tpr = static_cast<double>(true_pos) / runs;
  m.fpr = static_cast<double>(false_pos) / runs;
  m.fnr = static_cast<double>(false_neg) / runs;
  if (true_pos > 0) m.add = static_cast<double>(delay) / static_cast<double>(true_pos);
  return m;
}

CountVector sample_multinomial(const ProbabilityVector& p, std::size_t n, Rng& rng,
                               std::size_t window_index) {
  const Eigen::Index k = p.size();
  Vector cdf(k);
  double acc = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += p[i];
    cdf[i] = acc;
    if (p[i] > 0.0) last_positive = i;
  }
  Vector counts = Vector::Zero(k);
  for (std::size_t draw = 0; draw < n; ++draw) {
    const double u = rng.uniform01() * acc;
    Eigen::Index slot = 0;
    while (slot < last_positive && (cdf[slot] <= u || p[slot] == 0.0)) ++slot;
    counts[slot] += 1.0;
  }
  return CountVector(counts, window_index);
}

SyntheticPools make_synthetic_pools(const SyntheticPoolSpec& spec) {
  if (spec.templates == 0 || spec.lines_per_window == 0 || spec.pool_size == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic pools need positive templates, lines and pool size");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "overlap must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  const auto k = static_cast<Eigen::Index>(spec.templates);

  Vector normal = Vector::Zero(k + 2);
  for (Eigen::Index i = 0; i < k; ++i) normal[i] = 0.5 + rng.uniform01();
  normal /= normal.sum();

  Vector anomalous = Vector::Zero(k + 2);
  if (spec.overlap > 0.0) {
    Vector shared(k);
    for (Eigen::Index i = 0; i < k; ++i) shared[i] = 0.5 + rng.uniform01();
    anomalous.head(k) = spec.overlap * shared / shared.sum();
  }
  const double unk_error = 0.5 + rng.uniform01();
  const double unk_normal = 0.5 + rng.uniform01();
  anomalous[k] = (1.0 - spec.overlap) * unk_error / (unk_error + unk_normal);
  anomalous[k + 1] = (1.0 - spec.overlap) * unk_normal / (unk_error + unk_normal);

  SyntheticPools pools{ProbabilityVector(normal), ProbabilityVector(anomalous / anomalous.sum()),
                       {}, {}};
  pools.normal.reserve(spec.pool_size);
  pools.anomalous.reserve(spec.pool_size);
  for (std::size_t i = 0; i < spec.pool_size; ++i) {
    pools.normal.push_back(sample_multinomial(pools.p_normal, spec.lines_per_window, rng, i));
  }
  for (std::size_t i = 0; i < spec.pool_size; ++i) {
    pools.anomalous.push_back(
        sample_multinomial(pools.p_anomalous, spec.lines_per_window, rng, i));
  }
  return pools;
}

}  // namespace logdrift
