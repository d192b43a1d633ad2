#include "evinam/explain.hpp"

#include <charconv>

#include "evinam/errors.hpp"
#include "evinam/heads.hpp"
#include "evinam/uncertainty.hpp"

namespace evinam {

using diff::Tensor;

ShapeCurve explain_feature(const EviNamModel& model, std::size_t feature,
                           const ExplainOptions& options) {
  if (model.link_mode != LinkMode::forwarded) {
    throw InvalidInput("shape curves require a model with forwarded links");
  }
  if (feature >= model.n_features()) {
    throw InvalidInput("feature index " + std::to_string(feature) + " out of range");
  }
  if (options.grid_size < 2) throw InvalidInput("grid_size must be at least 2");
  if (model.feature_summaries.size() != model.n_features()) {
    throw InvalidInput("model carries no training-range summary");
  }
  const FeatureSummary& summary = model.feature_summaries[feature];
  if (!(summary.max > summary.min)) {
    throw InvalidInput("feature has no spread on the training set");
  }
  const bool encoded = model.encoder.width() == model.n_features();

  ShapeCurve curve;
  curve.feature = model.feature_names()[feature];
  curve.feature_index = feature;
  curve.parameter_names = model.parameter_names();
  const std::size_t G = options.grid_size;
  for (std::size_t g = 0; g < G; ++g) {
    const double t = static_cast<double>(g) / static_cast<double>(G - 1);
    const double v = g + 1 == G ? summary.max : summary.min + t * (summary.max - summary.min);
    curve.grid_normalized.push_back(v);
    curve.grid.push_back(encoded ? model.encoder.denormalize_feature(feature, v) : v);
  }
  for (double edge : summary.bin_edges) {
    curve.bin_edges.push_back(encoded ? model.encoder.denormalize_feature(feature, edge) : edge);
  }
  curve.counts = summary.counts;

  const Tensor raw = shape_forward(model.nets[feature], curve.grid_normalized);
  const std::size_t K = model.n_outputs();
  curve.contributions.assign(K, std::vector<double>(G));
  if (model.task == TaskKind::regression) {
    for (std::size_t k = 0; k < K; ++k) {
      curve.bias_terms.push_back(LinkBundle::apply(k, model.biases[k]));
      for (std::size_t g = 0; g < G; ++g) curve.contributions[k][g] = LinkBundle::apply(k, raw.at(g, k));
    }
    const double scale = options.denormalize_aleatoric ? model.encoder.normalizer.target_std : 1.0;
    for (const UncertaintyPair& u : per_feature_uncertainty(model, feature, curve.grid_normalized)) {
      curve.aleatoric.push_back(u.aleatoric * scale);
      curve.epistemic.push_back(u.epistemic);
    }
  } else {
    curve.bias_terms.assign(K, 1.0);
    for (std::size_t c = 0; c < K; ++c) {
      for (std::size_t g = 0; g < G; ++g) {
        curve.contributions[c][g] = evidence_link(model.evidence_link, raw.at(g, c));
      }
    }
    for (const auto& u : per_feature_dirichlet_uncertainty(model, feature, curve.grid_normalized)) {
      curve.aleatoric.push_back(u.aleatoric);
      curve.epistemic.push_back(u.epistemic);
    }
  }

  if (options.smooth) {
    curve.aleatoric_smoothed = lowess(curve.grid, curve.aleatoric, options.lowess);
    curve.epistemic_smoothed = lowess(curve.grid, curve.epistemic, options.lowess);
  }
  return curve;
}

nlohmann::json to_json(const ShapeCurve& curve) {
  nlohmann::json contributions = nlohmann::json::object();
  for (std::size_t k = 0; k < curve.parameter_names.size(); ++k) {
    contributions[curve.parameter_names[k]] = curve.contributions[k];
  }
  nlohmann::json bias = nlohmann::json::object();
  for (std::size_t k = 0; k < curve.parameter_names.size(); ++k) {
    bias[curve.parameter_names[k]] = curve.bias_terms[k];
  }
  nlohmann::json out = {{"feature", curve.feature},
                        {"feature_index", curve.feature_index},
                        {"grid", curve.grid},
                        {"grid_normalized", curve.grid_normalized},
                        {"bias_terms", bias},
                        {"mean_contribution", curve.mean_contribution()},
                        {"contributions", contributions},
                        {"aleatoric", curve.aleatoric},
                        {"epistemic", curve.epistemic},
                        {"histogram", {{"bin_edges", curve.bin_edges}, {"counts", curve.counts}}}};
  if (!curve.aleatoric_smoothed.empty()) {
    out["aleatoric_smoothed"] = curve.aleatoric_smoothed;
    out["epistemic_smoothed"] = curve.epistemic_smoothed;
  }
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string to_csv(const ShapeCurve& curve) {
  std::string out = "grid";
  for (const auto& name : curve.parameter_names) out += ",contribution_" + name;
  out += ",aleatoric,epistemic";
  const bool smoothed = !curve.aleatoric_smoothed.empty();
  if (smoothed) out += ",aleatoric_smoothed,epistemic_smoothed";
  out += '\n';
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    append_number(out, curve.grid[g]);
    for (const auto& column : curve.contributions) {
      out += ',';
      append_number(out, column[g]);
    }
    out += ',';
    append_number(out, curve.aleatoric[g]);
    out += ',';
    append_number(out, curve.epistemic[g]);
    if (smoothed) {
      out += ',';
      append_number(out, curve.aleatoric_smoothed[g]);
      out += ',';
      append_number(out, curve.epistemic_smoothed[g]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace evinam
