#include "logdrift/multinomial.hpp"

#include <cmath>
#include <string>

#include "logdrift/special_functions.hpp"

namespace logdrift {

ProbabilityVector mle(std::span<const CountVector> cs) {
  if (cs.empty()) throw Error(ErrorCode::kEmptySample, "mle needs at least one vector");
  check_uniform_length(cs, cs.front().size());
  Vector column_sums = Vector::Zero(cs.front().size());
  for (const auto& c : cs) column_sums += c.values();
  const double grand_total = column_sums.sum();
  if (!(grand_total > 0.0)) throw Error(ErrorCode::kZeroTotal, "all vectors are zero");
  return ProbabilityVector(column_sums / grand_total);
}

double chi_squared_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::kInvalidArgument, "df must be positive");
  if (!(x >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "statistic must be >= 0");
  return gamma_q(0.5 * df, 0.5 * x);
}

FitReport chi_squared_fit(std::span<const CountVector> cs) {
  if (cs.size() < 2) {
    throw Error(ErrorCode::kDegenerateSample, "fit test needs at least two vectors");
  }
  for (const auto& c : cs) {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (c[i] != std::floor(c[i])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "fit test requires raw integer counts, not normalized vectors");
      }
    }
    if (!(c.total() > 0.0)) {
      throw Error(ErrorCode::kDegenerateSample,
                  "window " + std::to_string(c.window_index()) + " has zero total");
    }
  }
  const ProbabilityVector p = mle(cs);

  FitReport report;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) ++report.included_slots;
  }
  if (report.included_slots < 2) {
    throw Error(ErrorCode::kDegenerateSample, "fewer than two slots have nonzero mass");
  }

  double statistic = 0.0;
  for (const auto& c : cs) {
    const double n = c.total();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) continue;
      const double expected = p[i] * n;
      const double diff = c[i] - expected;
      statistic += diff * diff / expected;
    }
  }
  report.statistic = statistic;
  report.degrees_of_freedom =
      (report.included_slots - 1) * (static_cast<int>(cs.size()) - 1);
  report.p_value = chi_squared_sf(statistic, report.degrees_of_freedom);
  return report;
}

SdDiagnostic sd_diagnostic(std::span<const CountVector> cs, const ProbabilityVector& p,
                           double n) {
  if (cs.size() < 2) {
    throw Error(ErrorCode::kDegenerateSample, "sd diagnostic needs at least two vectors");
  }
  if (!(n > 0.0)) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
  check_uniform_length(cs, p.size());

  Vector mean = Vector::Zero(p.size());
  for (const auto& c : cs) mean += c.values();
  mean /= static_cast<double>(cs.size());
  Vector sq = Vector::Zero(p.size());
  for (const auto& c : cs) sq += (c.values() - mean).array().square().matrix();
  sq /= static_cast<double>(cs.size() - 1);

  SdDiagnostic out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out[static_cast<std::size_t>(i)] = {std::sqrt(sq[i]),
                                        std::sqrt(n * p[i] * (1.0 - p[i]))};
  }
  return out;
}

}  // namespace logdrift
