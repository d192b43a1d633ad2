#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evinam/data.hpp"
#include "evinam/graph.hpp"
#include "evinam/heads.hpp"
#include "evinam/shape_net.hpp"

namespace evinam {

/// Range and density of one encoded feature on the training set (normalized units).
struct FeatureSummary {
  double min = 0.0;
  double max = 0.0;
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
};

std::vector<FeatureSummary> summarize_features(const EncodedData& train, std::size_t bins = 20);

/// Evidential neural additive model: one shape net per encoded feature plus
/// per-parameter intercepts, combined by a distributional head.
struct EviNamModel {
  TaskKind task = TaskKind::regression;
  LinkMode link_mode = LinkMode::forwarded;
  EvidenceLink evidence_link = EvidenceLink::softplus;
  ShapeNetConfig net_config;
  std::vector<ShapeNet> nets;
  /// [4] raw intercepts for regression; empty for classification.
  diff::Tensor biases;
  Encoder encoder;
  std::vector<FeatureSummary> feature_summaries;

  std::size_t n_features() const noexcept { return nets.size(); }
  std::size_t n_outputs() const noexcept { return net_config.n_outputs; }
  std::size_t n_classes() const noexcept {
    return task == TaskKind::classification ? net_config.n_outputs : 0;
  }
  std::vector<std::string> feature_names() const;
  std::vector<std::string> parameter_names() const;
};

struct ModelSpec {
  TaskKind task = TaskKind::regression;
  std::size_t n_features = 1;
  /// Ignored for regression.
  std::size_t n_classes = 2;
  std::vector<std::size_t> hidden_sizes{64, 32};
  Activation activation = Activation::relu;
  bool separate_nets = false;
  LinkMode link_mode = LinkMode::forwarded;
  EvidenceLink evidence_link = EvidenceLink::softplus;
  std::uint64_t seed = 0;
};

/// Fresh model with zero intercepts. Feature names default to x0, x1, ...
/// until an encoder is attached.
EviNamModel make_model(const ModelSpec& spec);

/// Trainable (or frozen) view of a model on a graph.
struct BoundModel {
  std::vector<BoundShapeNet> nets;
  diff::Var biases;
  bool has_biases = false;
};

/// Registration order: intercepts, then nets in feature order.
BoundModel bind(diff::Graph& graph, const EviNamModel& model, bool trainable);
std::vector<diff::Tensor*> parameter_slots(EviNamModel& model);

/// x: [B x J] -> one [B x K] raw output per feature.
std::vector<diff::Var> feature_outputs(const BoundModel& model, const diff::Var& x);

NigVars forward_nig(const EviNamModel& model, const BoundModel& bound, const diff::Var& x);
std::vector<diff::Var> forward_dirichlet(const EviNamModel& model, const BoundModel& bound,
                                         const diff::Var& x);

/// Eager inference over a batch [B x J].
std::vector<NigParams> predict_nig(const EviNamModel& model, const diff::Tensor& x);
std::vector<DirichletParams> predict_dirichlet(const EviNamModel& model, const diff::Tensor& x);

/// Raw per-feature outputs [J x K] for one sample.
diff::Tensor raw_outputs(const EviNamModel& model, std::span<const double> x);

/// Width check for a design matrix or single row.
void check_width(const EviNamModel& model, std::size_t width);

}  // namespace evinam
