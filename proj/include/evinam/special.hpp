#pragma once

namespace evinam::special {

/// Digamma function for x > 0 (recurrence up to x >= 10, then the
/// asymptotic series). Absolute error below 1e-12 on (0, 1e6).
double digamma(double x);

/// Trigamma function for x > 0, same scheme as digamma.
double trigamma(double x);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace evinam::special
