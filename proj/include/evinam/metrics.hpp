#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evinam/heads.hpp"
#include "evinam/uncertainty.hpp"

namespace evinam {

/// Named metric values in insertion order plus the sample count they cover.
struct MetricReport {
  std::vector<std::pair<std::string, double>> values;
  std::size_t count = 0;

  void set(const std::string& name, double value);
  double get(const std::string& name) const;
  bool has(const std::string& name) const;
};

double mae(std::span<const double> y, std::span<const double> gamma);

/// Closed-form CRPS of a location-scale Student-t. Requires dof > 1.
double crps_student_t(double y, const PredictiveDist& dist);

double nll_metric(std::span<const double> y, std::span<const NigParams> params);

double r_squared(std::span<const double> y, std::span<const double> gamma);

/// Mean CRPS over a batch.
double mean_crps(std::span<const double> y, std::span<const NigParams> params);

/// mae, nll, crps (and r2 when the target has spread) on the normalized scale.
MetricReport regression_metrics(std::span<const double> y, std::span<const NigParams> params);

/// probs is row-major [N x C]. Ties in argmax resolve to the lowest index.
double accuracy(std::span<const double> labels, std::span<const double> probs, std::size_t classes);

/// Mean over samples of sum_c (p_c - y_c)^2.
double brier(std::span<const double> labels, std::span<const double> probs, std::size_t classes);

/// Mann-Whitney AUROC for binary labels (1 = positive) with mid-ranks for ties.
double binary_auroc(std::span<const int> positive, std::span<const double> scores);

/// One-vs-rest macro average. Classes lacking positives or negatives are skipped;
/// throws InvalidInput when no class qualifies.
double auroc(std::span<const double> labels, std::span<const double> probs, std::size_t classes);

/// Top-label expected calibration error over `bins` equal-width confidence bins.
double ece(std::span<const double> labels, std::span<const double> probs, std::size_t classes,
           std::size_t bins = 10);

MetricReport classification_metrics(std::span<const double> labels, std::span<const double> probs,
                                    std::size_t classes);

}  // namespace evinam
