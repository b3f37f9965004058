#include "logdrift/detector.hpp"

#include <string>

namespace logdrift {

void DetectorConfig::validate() const {
  if (window && *window < 2) {
    throw Error(ErrorCode::kInvalidArgument, "window must be >= 2 or unbounded");
  }
  if (!(kappa_count > 0.0) || !std::isfinite(kappa_count)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa_count must be positive");
  }
  if (!(kappa_prior > 0.0) || !std::isfinite(kappa_prior)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa_prior must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  }
  if (!(alpha_level > 0.0 && alpha_level <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  }
  if (!std::isfinite(log_prior_odds)) {
    throw Error(ErrorCode::kInvalidArgument, "log prior odds must be finite");
  }
}

DirichletState build_prior(const ProbabilityVector& p_n, double kappa_prior,
                           double epsilon) {
  if (!(kappa_prior > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa_prior must be positive");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  Vector alpha = p_n.probs().unaryExpr([epsilon](double p) { return p > 0.0 ? p : epsilon; });
  return DirichletState(kappa_prior * alpha);
}

Detector::Detector(DirichletState prior, DetectorConfig config)
    : config_(config), prior_(std::move(prior)), theta0_(prior_.mean()) {
  config_.validate();
  log_theta0_ = theta0_.probs().array().log().matrix();
  lg_prior_ = lg(prior_.alpha());
}

void Detector::push(Vector v) {
  if (config_.window && window_.size() >= *config_.window) window_.pop_front();
  window_.push_back(std::move(v));
}

// B0 + sum_i [ lg(W_S[i] + W[i]) - lg(W_S[i]) - W[i] . ln(theta0) ], with the
// cumulative sums W_S restarted from alpha0 over the current window.
double Detector::window_log_bf() const {
  Vector cumulative = prior_.alpha();
  double lg_before = lg_prior_;
  double sum = 0.0;
  for (const Vector& w : window_) {
    cumulative += w;
    const double lg_after = lg(cumulative);
    sum += lg_after - lg_before - w.dot(log_theta0_);
    lg_before = lg_after;
  }
  return config_.log_prior_odds + sum;
}

std::optional<BfEntry> Detector::observe(const CountVector& c) {
  if (c.size() != prior_.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "count vector has " + std::to_string(c.size()) + " slots, prior has " +
                    std::to_string(prior_.size()));
  }
  ++t_;
  if (!(c.total() > 0.0)) return std::nullopt;

  Vector scaled = normalize(c, config_.kappa_count).values();
  double log_bf = 0.0;
  if (config_.lag_compat) {
    log_bf = window_log_bf();
    push(std::move(scaled));
  } else {
    push(std::move(scaled));
    log_bf = window_log_bf();
  }
  last_log_bf_ = log_bf;
  return BfEntry{t_, log_bf, log_bf > config_.threshold() && t_ >= config_.grace};
}

DetectorCheckpoint Detector::checkpoint() const {
  return DetectorCheckpoint{config_, prior_, {window_.begin(), window_.end()}, t_,
                            last_log_bf_};
}

Detector Detector::restore(const DetectorCheckpoint& cp) {
  Detector d(cp.prior, cp.config);
  if (cp.config.window && cp.window.size() > *cp.config.window) {
    throw Error(ErrorCode::kInvalidArgument, "checkpoint window exceeds configured size");
  }
  for (const auto& v : cp.window) {
    if (v.size() != d.prior_.size() || (v.array() < 0.0).any()) {
      throw Error(ErrorCode::kInvalidArgument, "checkpoint window vector is malformed");
    }
    d.window_.push_back(v);
  }
  d.t_ = cp.t;
  d.last_log_bf_ = cp.last_log_bf;
  return d;
}

BfTrace run(const DirichletState& prior, std::span<const CountVector> cs,
            const DetectorConfig& config) {
  if (cs.empty()) throw Error(ErrorCode::kEmptySample, "no count vectors to monitor");
  Detector detector(prior, config);
  BfTrace trace;
  trace.entries.reserve(cs.size());
  for (const auto& c : cs) {
    if (auto entry = detector.observe(c)) {
      trace.entries.push_back(*entry);
    } else {
      trace.skipped.push_back(detector.t());
    }
  }
  return trace;
}

std::size_t first_detection(const BfTrace& trace, const DetectorConfig& config) {
  const double c = config.threshold();
  for (const auto& e : trace.entries) {
    if (e.t >= config.grace && e.log_bf > c) return e.t;
  }
  return 0;
}

}  // namespace logdrift
