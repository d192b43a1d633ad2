#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evinam {

struct LowessConfig {
  /// Share of points in each local neighbourhood.
  double fraction = 0.3;
  /// Robustness reweighting passes after the initial fit.
  std::size_t iterations = 1;

  void validate() const;
};

/// Locally weighted linear regression with tricube distance weights and
/// bisquare robustness weights. x need not be sorted; the result is aligned
/// with the input order. Points with tied x share one fitted value.
std::vector<double> lowess(std::span<const double> x, std::span<const double> y,
                           const LowessConfig& config = {});

}  // namespace evinam
