#include "evinam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "evinam/errors.hpp"
#include "evinam/losses.hpp"

namespace evinam {

void MetricReport::set(const std::string& name, double value) {
  for (auto& [key, v] : values) {
    if (key == name) {
      v = value;
      return;
    }
  }
  values.emplace_back(name, value);
}

double MetricReport::get(const std::string& name) const {
  for (const auto& [key, v] : values) {
    if (key == name) return v;
  }
  throw InvalidInput("metric '" + name + "' not present");
}

bool MetricReport::has(const std::string& name) const {
  return std::any_of(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
}

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a == 0 || a != b) {
    throw InvalidInput(std::string(what) + ": inputs must be non-empty and of equal length");
  }
}

std::size_t check_label(double label, std::size_t classes) {
  if (!(label >= 0.0) || label >= static_cast<double>(classes) || label != std::floor(label)) {
    throw InvalidInput("class label out of range");
  }
  return static_cast<std::size_t>(label);
}

std::size_t check_probs(std::span<const double> labels, std::span<const double> probs,
                        std::size_t classes) {
  if (classes == 0) throw InvalidInput("classification metrics need at least one class");
  const std::size_t n = labels.size();
  if (n == 0 || probs.size() != n * classes) {
    throw InvalidInput("probability matrix does not match label count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = probs[i * classes + c];
      if (!std::isfinite(p) || p < 0.0) throw InvalidInput("probabilities must be finite and >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) throw InvalidInput("probability rows must sum to 1");
    check_label(labels[i], classes);
  }
  return n;
}

std::size_t argmax_row(std::span<const double> probs, std::size_t row, std::size_t classes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (probs[row * classes + c] > probs[row * classes + best]) best = c;
  }
  return best;
}

}  // namespace

double mae(std::span<const double> y, std::span<const double> gamma) {
  check_aligned(y.size(), gamma.size(), "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += std::abs(y[i] - gamma[i]);
  return total / static_cast<double>(y.size());
}

double crps_student_t(double y, const PredictiveDist& dist) {
  const double nu = dist.dof;
  if (!(nu > 1.0)) throw DomainError("crps_student_t: dof must exceed 1");
  if (!(dist.scale > 0.0) || !std::isfinite(dist.scale) || !std::isfinite(dist.location) ||
      !std::isfinite(y)) {
    throw DomainError("crps_student_t: invalid distribution or target");
  }
  const boost::math::students_t_distribution<double> t(nu);
  const double z = (y - dist.location) / dist.scale;
  const double cdf = boost::math::cdf(t, z);
  const double pdf = boost::math::pdf(t, z);
  const double b_half = boost::math::beta(0.5, nu / 2.0);
  const double tail = 2.0 * std::sqrt(nu) * boost::math::beta(0.5, nu - 0.5) /
                      ((nu - 1.0) * b_half * b_half);
  const double value =
      z * (2.0 * cdf - 1.0) + 2.0 * pdf * (nu + z * z) / (nu - 1.0) - tail;
  return dist.scale * std::max(value, 0.0);
}

double nll_metric(std::span<const double> y, std::span<const NigParams> params) {
  check_aligned(y.size(), params.size(), "nll_metric");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += nig_nll(y[i], params[i]);
  return total / static_cast<double>(y.size());
}

double mean_crps(std::span<const double> y, std::span<const NigParams> params) {
  check_aligned(y.size(), params.size(), "mean_crps");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += crps_student_t(y[i], PredictiveDist::from_nig(params[i]));
  }
  return total / static_cast<double>(y.size());
}

double r_squared(std::span<const double> y, std::span<const double> gamma) {
  check_aligned(y.size(), gamma.size(), "r_squared");
  if (y.size() < 2) throw InvalidInput("r_squared: need at least two samples");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - gamma[i]) * (y[i] - gamma[i]);
  }
  if (!(ss_tot > 0.0)) throw DomainError("r_squared: target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

MetricReport regression_metrics(std::span<const double> y, std::span<const NigParams> params) {
  check_aligned(y.size(), params.size(), "regression_metrics");
  std::vector<double> gamma;
  gamma.reserve(params.size());
  for (const auto& p : params) gamma.push_back(p.gamma);
  MetricReport report;
  report.count = y.size();
  report.set("mae", mae(y, gamma));
  report.set("nll", nll_metric(y, params));
  report.set("crps", mean_crps(y, params));
  const bool spread = std::any_of(y.begin(), y.end(), [&](double v) { return v != y.front(); });
  if (y.size() >= 2 && spread) report.set("r2", r_squared(y, gamma));
  return report;
}

double accuracy(std::span<const double> labels, std::span<const double> probs,
                std::size_t classes) {
  const std::size_t n = check_probs(labels, probs, classes);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (argmax_row(probs, i, classes) == check_label(labels[i], classes)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double brier(std::span<const double> labels, std::span<const double> probs, std::size_t classes) {
  const std::size_t n = check_probs(labels, probs, classes);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = check_label(labels[i], classes);
    for (std::size_t c = 0; c < classes; ++c) {
      const double d = probs[i * classes + c] - (c == label ? 1.0 : 0.0);
      total += d * d;
    }
  }
  return total / static_cast<double>(n);
}

double binary_auroc(std::span<const int> positive, std::span<const double> scores) {
  check_aligned(positive.size(), scores.size(), "binary_auroc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    // ranks i+1 .. j+1 share their mean
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (positive[order[k]] != 0) {
        rank_sum += mid;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidInput("binary_auroc: need both classes present");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double auroc(std::span<const double> labels, std::span<const double> probs, std::size_t classes) {
  const std::size_t n = check_probs(labels, probs, classes);
  double total = 0.0;
  std::size_t used = 0;
  std::vector<int> positive(n);
  std::vector<double> scores(n);
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      positive[i] = check_label(labels[i], classes) == c ? 1 : 0;
      n_pos += static_cast<std::size_t>(positive[i]);
      scores[i] = probs[i * classes + c];
    }
    if (n_pos == 0 || n_pos == n) continue;
    total += binary_auroc(positive, scores);
    ++used;
    // Binary problems are symmetric; one class suffices.
    if (classes == 2) break;
  }
  if (used == 0) throw InvalidInput("auroc: no class has both positives and negatives");
  return total / static_cast<double>(used);
}

double ece(std::span<const double> labels, std::span<const double> probs, std::size_t classes,
           std::size_t bins) {
  const std::size_t n = check_probs(labels, probs, classes);
  if (bins == 0) throw InvalidInput("ece: bin count must be positive");
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<double> hit_sum(bins, 0.0);
  std::vector<std::size_t> counts(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pred = argmax_row(probs, i, classes);
    const double conf = probs[i * classes + pred];
    auto bin = static_cast<std::size_t>(conf * static_cast<double>(bins));
    bin = std::min(bin, bins - 1);
    conf_sum[bin] += conf;
    hit_sum[bin] += pred == check_label(labels[i], classes) ? 1.0 : 0.0;
    ++counts[bin];
  }
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    total += std::abs(hit_sum[b] - conf_sum[b]);
  }
  return total / static_cast<double>(n);
}

MetricReport classification_metrics(std::span<const double> labels, std::span<const double> probs,
                                    std::size_t classes) {
  const std::size_t n = check_probs(labels, probs, classes);
  MetricReport report;
  report.count = n;
  report.set("accuracy", accuracy(labels, probs, classes));
  report.set("brier", brier(labels, probs, classes));
  report.set("auroc", auroc(labels, probs, classes));
  report.set("ece", ece(labels, probs, classes));
  return report;
}

}  // namespace evinam
