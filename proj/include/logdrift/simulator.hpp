#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "logdrift/core.hpp"
#include "logdrift/detector.hpp"
#include "logdrift/random.hpp"

namespace logdrift {

/// One contamination experiment: `repetitions` independent streams of
/// `windows` simulated vectors, contaminated at `level` from window
/// `start` for `length` windows (nullopt: until the end).
struct ScenarioConfig {
  std::size_t windows = 1000;
  std::size_t start = 501;
  double level = 0.3;
  std::optional<std::size_t> length;
  std::size_t repetitions = 50;
  std::uint64_t seed = 0;
  DetectorConfig detector;

  void validate() const;
};

struct RunMetrics {
  double tpr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  /// Average detection delay over true positives; nullopt when there are none.
  std::optional<double> add;
  std::size_t runs = 0;
};

struct ScenarioRun {
  std::size_t repetition = 0;  // 1-based
  BfTrace trace;
  std::size_t detection = 0;
};

/// Draws one vector from each pool and returns p E(C_A) + (1 - p) E(C_N).
/// The normal pool is drawn first.
CountVector sim_drift(std::span<const CountVector> normal_pool,
                      std::span<const CountVector> anomalous_pool, double p, Rng& rng);

/// Contamination level at window t (1-based).
double contamination_profile(std::size_t t, const ScenarioConfig& cfg);

/// Baseline prior for a scenario: build_prior over the elementwise mean of
/// the normalized normal pool.
DirichletState scenario_prior(std::span<const CountVector> normal_pool,
                              const DetectorConfig& detector);

/// Runs every repetition r = 1..R with Rng(seed ^ r). `threads` = 0 uses the
/// hardware concurrency; results do not depend on the thread count.
std::vector<ScenarioRun> run_scenario(const ScenarioConfig& cfg,
                                      std::span<const CountVector> normal_pool,
                                      std::span<const CountVector> anomalous_pool,
                                      unsigned threads = 0);

/// TPR/FPR/FNR/ADD over first-detection times d_r in {0} U [g, T].
RunMetrics evaluate(std::span<const std::size_t> detections, std::size_t start,
                    std::size_t grace);

/// Draws `n` categorical items with probabilities p.
CountVector sample_multinomial(const ProbabilityVector& p, std::size_t n, Rng& rng,
                               std::size_t window_index = 0);

/// Parameters for generating synthetic stand-ins for collected pools.
struct SyntheticPoolSpec {
  std::size_t templates = 20;
  std::size_t lines_per_window = 200;
  std::size_t pool_size = 200;
  /// Fraction of anomalous mass placed on baseline templates; the rest goes to
  /// the two unknown slots. 0 gives disjoint supports.
  double overlap = 0.0;
  std::uint64_t seed = 1;
};

struct SyntheticPools {
  ProbabilityVector p_normal;
  ProbabilityVector p_anomalous;
  std::vector<CountVector> normal;
  std::vector<CountVector> anomalous;
};

/// Normal vectors ~ M(P_N, n) over templates only (unknown slots stay zero);
/// anomalous vectors ~ M(P_A, n).
SyntheticPools make_synthetic_pools(const SyntheticPoolSpec& spec);

}  // namespace logdrift
