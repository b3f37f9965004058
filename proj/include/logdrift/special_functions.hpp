#pragma once

namespace logdrift {

/// ln Gamma(x) for x > 0 (Lanczos, g = 671/128, 14 terms; relative error
/// around 1e-15). Implemented in-tree so results are identical on every
/// platform, unlike the system libm.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x). Uses the power
/// series for x < a + 1 and a Lentz continued fraction otherwise.
double gamma_q(double a, double x);

}  // namespace logdrift
