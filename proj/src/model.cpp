#include "evinam/model.hpp"

#include <algorithm>
#include <cmath>

#include "evinam/errors.hpp"

namespace evinam {

using diff::Tensor;
using diff::Var;

std::vector<FeatureSummary> summarize_features(const EncodedData& train, std::size_t bins) {
  if (train.rows() == 0) throw InvalidInput("cannot summarize an empty training set");
  if (bins == 0) throw InvalidInput("histogram needs at least one bin");
  const std::size_t n = train.rows();
  const std::size_t width = train.features();
  std::vector<FeatureSummary> out(width);
  for (std::size_t j = 0; j < width; ++j) {
    FeatureSummary& s = out[j];
    s.min = s.max = train.x.at(0, j);
    for (std::size_t i = 1; i < n; ++i) {
      s.min = std::min(s.min, train.x.at(i, j));
      s.max = std::max(s.max, train.x.at(i, j));
    }
    s.bin_edges.resize(bins + 1);
    const double span = s.max - s.min;
    for (std::size_t b = 0; b <= bins; ++b) {
      s.bin_edges[b] = s.min + span * static_cast<double>(b) / static_cast<double>(bins);
    }
    s.bin_edges[bins] = s.max;
    s.counts.assign(bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = train.x.at(i, j);
      std::size_t b = 0;
      if (span > 0.0) {
        b = static_cast<std::size_t>((v - s.min) / span * static_cast<double>(bins));
        b = std::min(b, bins - 1);
      }
      ++s.counts[b];
    }
  }
  return out;
}

std::vector<std::string> EviNamModel::feature_names() const {
  if (encoder.feature_names.size() == nets.size()) return encoder.feature_names;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < nets.size(); ++j) names.push_back("x" + std::to_string(j));
  return names;
}

std::vector<std::string> EviNamModel::parameter_names() const {
  std::vector<std::string> names;
  if (task == TaskKind::regression) {
    names.assign(kNigNames.begin(), kNigNames.end());
  } else {
    for (std::size_t c = 0; c < n_outputs(); ++c) {
      names.push_back(c < encoder.class_names.size() ? "alpha[" + encoder.class_names[c] + "]"
                                                     : "alpha[" + std::to_string(c) + "]");
    }
  }
  return names;
}

EviNamModel make_model(const ModelSpec& spec) {
  if (spec.n_features == 0) throw ConfigError("model needs at least one feature");
  if (spec.task == TaskKind::classification && spec.n_classes < 2) {
    throw ConfigError("classification needs at least two classes");
  }
  EviNamModel model;
  model.task = spec.task;
  model.link_mode = spec.link_mode;
  model.evidence_link = spec.evidence_link;
  model.net_config.hidden_sizes = spec.hidden_sizes;
  model.net_config.activation = spec.activation;
  model.net_config.separate_nets = spec.separate_nets;
  model.net_config.init_seed = spec.seed;
  model.net_config.n_outputs = spec.task == TaskKind::regression ? kNigParams : spec.n_classes;
  model.net_config.validate();
  for (std::size_t j = 0; j < spec.n_features; ++j) {
    model.nets.push_back(init_shape_net(model.net_config, j));
  }
  if (spec.task == TaskKind::regression) model.biases = Tensor::zeros({kNigParams});
  else model.biases = Tensor::zeros({0});
  return model;
}

BoundModel bind(diff::Graph& graph, const EviNamModel& model, bool trainable) {
  BoundModel bound;
  if (model.task == TaskKind::regression) {
    bound.biases = trainable ? graph.parameter(model.biases) : graph.constant(model.biases);
    bound.has_biases = true;
  }
  bound.nets.reserve(model.nets.size());
  for (const ShapeNet& net : model.nets) bound.nets.push_back(bind(graph, net, trainable));
  return bound;
}

std::vector<Tensor*> parameter_slots(EviNamModel& model) {
  std::vector<Tensor*> slots;
  if (model.task == TaskKind::regression) slots.push_back(&model.biases);
  for (ShapeNet& net : model.nets) {
    const auto more = parameter_slots(net);
    slots.insert(slots.end(), more.begin(), more.end());
  }
  return slots;
}

std::vector<Var> feature_outputs(const BoundModel& model, const Var& x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || xv.cols() != model.nets.size()) {
    throw InvalidInput("design matrix has " + std::to_string(xv.rank() == 2 ? xv.cols() : 0) +
                       " columns, model expects " + std::to_string(model.nets.size()));
  }
  std::vector<Var> outs;
  outs.reserve(model.nets.size());
  for (std::size_t j = 0; j < model.nets.size(); ++j) {
    outs.push_back(shape_forward(model.nets[j], diff::column(x, j)));
  }
  return outs;
}

NigVars forward_nig(const EviNamModel& model, const BoundModel& bound, const Var& x) {
  if (model.task != TaskKind::regression) throw KindMismatch("model is not a regression model");
  const auto outs = feature_outputs(bound, x);
  return assemble_nig(outs, bound.biases, model.link_mode);
}

std::vector<Var> forward_dirichlet(const EviNamModel& model, const BoundModel& bound,
                                   const Var& x) {
  if (model.task != TaskKind::classification) {
    throw KindMismatch("model is not a classification model");
  }
  const auto outs = feature_outputs(bound, x);
  return assemble_dirichlet(outs, model.n_outputs(), model.link_mode, model.evidence_link);
}

void check_width(const EviNamModel& model, std::size_t width) {
  if (width != model.n_features()) {
    throw InvalidInput("input has " + std::to_string(width) + " encoded features, model expects " +
                       std::to_string(model.n_features()));
  }
}

namespace {

void check_batch(const EviNamModel& model, const Tensor& x) {
  if (x.rank() != 2) throw InvalidInput("design matrix must be rank 2");
  check_width(model, x.cols());
  if (!x.all_finite()) throw DomainError("design matrix contains non-finite values");
}

}  // namespace

std::vector<NigParams> predict_nig(const EviNamModel& model, const Tensor& x) {
  check_batch(model, x);
  if (x.rows() == 0) return {};
  diff::Graph graph;
  const BoundModel bound = bind(graph, model, false);
  const NigVars p = forward_nig(model, bound, graph.constant(x));
  std::vector<NigParams> out(x.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {p.gamma.value()[i], p.nu.value()[i], p.alpha.value()[i], p.beta.value()[i]};
  }
  return out;
}

std::vector<DirichletParams> predict_dirichlet(const EviNamModel& model, const Tensor& x) {
  check_batch(model, x);
  if (x.rows() == 0) return {};
  diff::Graph graph;
  const BoundModel bound = bind(graph, model, false);
  const auto alphas = forward_dirichlet(model, bound, graph.constant(x));
  std::vector<DirichletParams> out(x.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].alpha.resize(alphas.size());
    for (std::size_t c = 0; c < alphas.size(); ++c) out[i].alpha[c] = alphas[c].value()[i];
  }
  return out;
}

Tensor raw_outputs(const EviNamModel& model, std::span<const double> x) {
  check_width(model, x.size());
  const std::size_t K = model.n_outputs();
  std::vector<double> raw;
  raw.reserve(model.n_features() * K);
  for (std::size_t j = 0; j < model.n_features(); ++j) {
    const Tensor out = shape_forward(model.nets[j], x.subspan(j, 1));
    raw.insert(raw.end(), out.data().begin(), out.data().end());
  }
  return Tensor::matrix(model.n_features(), K, std::move(raw));
}

}  // namespace evinam
