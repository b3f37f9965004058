#include "logdrift/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace logdrift {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAllZeroVector: return "AllZeroVector";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroTotal: return "ZeroTotal";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kNonPositiveInput: return "NonPositiveInput";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kUnsortedInput: return "UnsortedInput";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kInvalidDetection: return "InvalidDetection";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

CountVector::CountVector(Vector values, std::size_t window_index)
    : values_(std::move(values)), window_index_(window_index) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "count vector element " + std::to_string(i + 1) +
                      " is negative or not finite");
    }
  }
}

ProbabilityVector::ProbabilityVector(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty probability vector");
  }
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0 && probs_[i] <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "probability " + std::to_string(i + 1) + " outside [0,1]");
    }
  }
  if (std::abs(probs_.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities do not sum to 1");
  }
}

DirichletState::DirichletState(Vector alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty Dirichlet vector");
  }
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
    if (!(alpha_[i] > 0.0) || !std::isfinite(alpha_[i])) {
      throw Error(ErrorCode::kNonPositiveInput,
                  "Dirichlet concentration " + std::to_string(i + 1) +
                      " must be strictly positive");
    }
  }
}

ProbabilityVector DirichletState::mean() const {
  return ProbabilityVector(alpha_ / alpha_.sum());
}

TemplateSet::TemplateSet(std::vector<Template> templates,
                         std::vector<std::string> error_keywords)
    : templates_(std::move(templates)), error_keywords_(std::move(error_keywords)) {
  if (templates_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "template set is empty");
  }
  std::sort(templates_.begin(), templates_.end(),
            [](const Template& a, const Template& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    if (templates_[i].id != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template ids must be unique and contiguous from 1");
    }
    if (templates_[i].pattern.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "template " + std::to_string(templates_[i].id) + " has an empty pattern");
    }
  }
  for (auto& kw : error_keywords_) {
    std::transform(kw.begin(), kw.end(), kw.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  }
  error_keywords_.erase(
      std::remove_if(error_keywords_.begin(), error_keywords_.end(),
                     [](const std::string& kw) { return kw.empty(); }),
      error_keywords_.end());
}

CountVector normalize(const CountVector& c, double kappa_count) {
  if (!(kappa_count > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa_count must be positive");
  }
  const double total = c.total();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kAllZeroVector,
                "window " + std::to_string(c.window_index()) + " has no counts");
  }
  return CountVector(kappa_count * (c.values() / total), c.window_index());
}

void check_uniform_length(std::span<const CountVector> cs, Eigen::Index expected) {
  for (const auto& c : cs) {
    if (c.size() != expected) {
      throw Error(ErrorCode::kLengthMismatch,
                  "expected length " + std::to_string(expected) + ", got " +
                      std::to_string(c.size()));
    }
  }
}

ProbabilityVector elementwise_mean(std::span<const CountVector> cs) {
  if (cs.empty()) {
    throw Error(ErrorCode::kEmptySample, "no vectors to average");
  }
  check_uniform_length(cs, cs.front().size());
  Vector acc = Vector::Zero(cs.front().size());
  for (const auto& c : cs) acc += c.values();
  acc /= static_cast<double>(cs.size());
  if (std::abs(acc.sum() - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "elementwise_mean expects normalized vectors");
  }
  // absorb accumulated rounding
  return ProbabilityVector(acc / acc.sum());
}

}  // namespace logdrift
