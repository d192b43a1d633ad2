#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "evinam/lowess.hpp"
#include "evinam/model.hpp"

namespace evinam {

struct ExplainOptions {
  std::size_t grid_size = 100;
  bool smooth = false;
  LowessConfig lowess;
  /// Report the regression aleatoric band in raw target units.
  bool denormalize_aleatoric = false;
};

/// Shape function of one encoded feature over its training range, with the
/// uncertainty implied by that feature alone and the training density.
struct ShapeCurve {
  std::string feature;
  std::size_t feature_index = 0;
  /// Strictly increasing, raw feature units.
  std::vector<double> grid;
  std::vector<double> grid_normalized;
  std::vector<std::string> parameter_names;
  /// Link-space intercept term per parameter (1 per class for classification).
  std::vector<double> bias_terms;
  /// contributions[k][g]: link term of parameter k at grid point g.
  std::vector<std::vector<double>> contributions;
  std::vector<double> aleatoric;
  std::vector<double> epistemic;
  /// Filled only when smoothing is requested.
  std::vector<double> aleatoric_smoothed;
  std::vector<double> epistemic_smoothed;
  /// Training histogram in raw feature units.
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;

  /// Regression: contributions to gamma. Classification: evidence for class 0.
  const std::vector<double>& mean_contribution() const { return contributions.front(); }
};

/// Requires a forwarded-link model with stored feature summaries and grid_size >= 2.
ShapeCurve explain_feature(const EviNamModel& model, std::size_t feature,
                           const ExplainOptions& options = {});

nlohmann::json to_json(const ShapeCurve& curve);

/// One row per grid point: grid, contributions, bands (and smoothed bands).
std::string to_csv(const ShapeCurve& curve);

}  // namespace evinam
