#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "logdrift/core.hpp"
#include "logdrift/special_functions.hpp"

namespace logdrift {

/// Log of the multivariate Beta function, sum_i lnG(x_i) - lnG(sum_i x_i).
/// This is the Dirichlet normalizer; every element must be strictly positive.
template <typename Derived>
double lg(const Eigen::MatrixBase<Derived>& x) {
  double acc = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = static_cast<double>(x(i));
    if (!(xi > 0.0)) {
      throw Error(ErrorCode::kNonPositiveInput, "lg requires strictly positive input");
    }
    acc += log_gamma(xi);
    total += xi;
  }
  return acc - log_gamma(total);
}

struct DetectorConfig {
  /// Evidence window length (>= 2); nullopt keeps the full history.
  std::optional<std::size_t> window = 100;
  /// Each observation is rescaled to sum to this before entering the window.
  double kappa_count = 1.0;
  /// Prior strength: alpha0 = kappa_prior * P_N.
  double kappa_prior = 1.0;
  /// Prior weight for slots that never occur in the baseline.
  double epsilon = 1e-6;
  double alpha_level = 0.05;
  std::size_t grace = 100;
  /// B0, added to every log-BF.
  double log_prior_odds = 0.0;
  /// Score each window before appending the current observation (one-step
  /// lag) instead of after.
  bool lag_compat = false;

  /// c = ln(1 / alpha_level)
  double threshold() const { return std::log(1.0 / alpha_level); }

  /// Throws kInvalidArgument on any out-of-range field.
  void validate() const;
};

struct BfEntry {
  std::size_t t = 0;
  double log_bf = 0.0;
  bool flagged = false;
};

struct BfTrace {
  std::vector<BfEntry> entries;
  /// Input positions (1-based) that were all-zero and produced no entry.
  std::vector<std::size_t> skipped;
};

/// alpha0[i] = kappa_prior * (p_n[i] > 0 ? p_n[i] : epsilon). No renormalization.
DirichletState build_prior(const ProbabilityVector& p_n, double kappa_prior,
                           double epsilon);

/// Serializable snapshot of a running detector.
struct DetectorCheckpoint {
  DetectorConfig config;
  DirichletState prior;
  std::vector<Vector> window;
  std::size_t t = 0;
  double last_log_bf = 0.0;
};

/// Windowed Bayes Factor drift detector for one stream. Compares a Dirichlet
/// posterior, updated with the last `window` normalized count vectors, against
/// the fixed baseline theta0 = E(alpha0). Single owner; not thread-safe.
class Detector {
 public:
  Detector(DirichletState prior, DetectorConfig config);

  /// Advances t by one. Returns nullopt (and leaves the window untouched) for an
  /// all-zero window; throws kLengthMismatch on a wrongly sized vector.
  std::optional<BfEntry> observe(const CountVector& c);

  std::size_t t() const noexcept { return t_; }
  double last_log_bf() const noexcept { return last_log_bf_; }
  const DirichletState& prior() const noexcept { return prior_; }
  const ProbabilityVector& theta0() const noexcept { return theta0_; }
  const DetectorConfig& config() const noexcept { return config_; }
  const std::deque<Vector>& window() const noexcept { return window_; }

  DetectorCheckpoint checkpoint() const;
  static Detector restore(const DetectorCheckpoint& cp);

 private:
  double window_log_bf() const;
  void push(Vector v);

  DetectorConfig config_;
  DirichletState prior_;
  ProbabilityVector theta0_;
  Vector log_theta0_;
  double lg_prior_ = 0.0;
  std::deque<Vector> window_;
  std::size_t t_ = 0;
  double last_log_bf_ = 0.0;
};

/// Feeds every vector through a fresh detector.
BfTrace run(const DirichletState& prior, std::span<const CountVector> cs,
            const DetectorConfig& config);

/// Smallest t >= grace with log_bf > c, or 0.
std::size_t first_detection(const BfTrace& trace, const DetectorConfig& config);

}  // namespace logdrift
