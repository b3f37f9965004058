#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "logdrift/error.hpp"

namespace logdrift {

using Vector = Eigen::VectorXd;

/// Per-window template frequencies. Layout: templates 1..K in id order, then
/// unk_error (K+1) and unk_normal (K+2). Elements are nonnegative.
class CountVector {
 public:
  CountVector() = default;
  explicit CountVector(Vector values, std::size_t window_index = 0);

  const Vector& values() const noexcept { return values_; }
  std::size_t window_index() const noexcept { return window_index_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double total() const { return values_.sum(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
  std::size_t window_index_ = 0;
};

/// Nonnegative entries summing to one (1e-9 absolute).
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(Vector probs);

  const Vector& probs() const noexcept { return probs_; }
  Eigen::Index size() const noexcept { return probs_.size(); }
  double operator[](Eigen::Index i) const { return probs_[i]; }

 private:
  Vector probs_;
};

/// Dirichlet concentration vector; every element strictly positive.
class DirichletState {
 public:
  DirichletState() = default;
  explicit DirichletState(Vector alpha);

  const Vector& alpha() const noexcept { return alpha_; }
  Eigen::Index size() const noexcept { return alpha_.size(); }

  /// alpha / sum(alpha)
  ProbabilityVector mean() const;

 private:
  Vector alpha_;
};

struct Template {
  int id = 0;
  std::string pattern;
};

inline const std::vector<std::string>& default_error_keywords() {
  static const std::vector<std::string> kKeywords = {
      "error", "exception", "fail", "failed", "failure", "fatal", "panic"};
  return kKeywords;
}

/// Ordered template universe. Ids are contiguous 1..K; keywords are lowercase.
class TemplateSet {
 public:
  TemplateSet() = default;
  TemplateSet(std::vector<Template> templates,
              std::vector<std::string> error_keywords = default_error_keywords());

  const std::vector<Template>& templates() const noexcept { return templates_; }
  const std::vector<std::string>& error_keywords() const noexcept {
    return error_keywords_;
  }
  std::size_t size() const noexcept { return templates_.size(); }
  /// K + 2
  std::size_t vector_length() const noexcept { return templates_.size() + 2; }
  std::size_t unk_error_slot() const noexcept { return templates_.size() + 1; }
  std::size_t unk_normal_slot() const noexcept { return templates_.size() + 2; }

 private:
  std::vector<Template> templates_;
  std::vector<std::string> error_keywords_;
};

/// Returns kappa_count * c / sum(c). Throws kAllZeroVector when sum(c) == 0.
CountVector normalize(const CountVector& c, double kappa_count = 1.0);

/// Elementwise average of vectors that each sum to one.
ProbabilityVector elementwise_mean(std::span<const CountVector> cs);

/// Throws kLengthMismatch unless every vector has `expected` elements.
void check_uniform_length(std::span<const CountVector> cs, Eigen::Index expected);

}  // namespace logdrift
