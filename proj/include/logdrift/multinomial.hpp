#pragma once

#include <span>
#include <vector>

#include "logdrift/core.hpp"

namespace logdrift {

/// Chi-squared goodness-of-fit result for a sample of count vectors.
struct FitReport {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  /// Slots with a nonzero pooled estimate (the m in the df formula).
  int included_slots = 0;
};

struct SdPair {
  double observed_sd = 0.0;
  double theoretical_sd = 0.0;
};

using SdDiagnostic = std::vector<SdPair>;

/// Pooled multinomial MLE: column sums over the grand total.
ProbabilityVector mle(std::span<const CountVector> cs);

/// Survival function of the chi-squared distribution, Q(df/2, x/2).
double chi_squared_sf(double x, int df);

/// Tests whether raw integer count vectors share one multinomial parameter.
/// Slots whose pooled estimate is zero are dropped from both the statistic and
/// the degrees of freedom.
FitReport chi_squared_fit(std::span<const CountVector> cs);

/// Observed sample SD of each slot versus the multinomial SD sqrt(n p (1-p)).
SdDiagnostic sd_diagnostic(std::span<const CountVector> cs, const ProbabilityVector& p,
                           double n);

}  // namespace logdrift
