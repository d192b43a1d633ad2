#include "evinam/shape_net.hpp"

#include <cmath>
#include <random>

#include "evinam/errors.hpp"

namespace evinam {

using diff::Tensor;
using diff::Var;

std::string to_string(Activation activation) {
  return activation == Activation::relu ? "relu" : "gelu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "gelu") return Activation::gelu;
  throw ConfigError("unknown activation '" + name + "' (expected relu or gelu)");
}

void ShapeNetConfig::validate() const {
  if (hidden_sizes.empty()) throw ConfigError("shape net needs at least one hidden layer");
  for (std::size_t width : hidden_sizes) {
    if (width == 0) throw ConfigError("shape net hidden widths must be positive");
  }
  if (n_outputs == 0) throw ConfigError("shape net needs at least one output");
}

std::size_t ShapeNet::parameter_count() const {
  std::size_t total = 0;
  for (const auto& trunk : trunks) {
    for (const DenseLayer& layer : trunk) total += layer.weight.size() + layer.bias.size();
  }
  return total;
}

namespace {

std::vector<DenseLayer> make_trunk(const ShapeNetConfig& config, std::size_t outputs,
                                   std::mt19937_64& rng) {
  std::vector<DenseLayer> layers;
  std::size_t fan_in = 1;
  for (std::size_t width : config.hidden_sizes) {
    const double w_bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    const double b_bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> w_dist(-w_bound, w_bound);
    std::uniform_real_distribution<double> b_dist(-b_bound, b_bound);
    std::vector<double> w(fan_in * width);
    for (double& v : w) v = w_dist(rng);
    std::vector<double> b(width);
    for (double& v : b) v = b_dist(rng);
    layers.push_back({Tensor::matrix(fan_in, width, std::move(w)), Tensor::vector(std::move(b))});
    fan_in = width;
  }
  layers.push_back({Tensor::zeros({fan_in, outputs}), Tensor::zeros({outputs})});
  return layers;
}

}  // namespace

ShapeNet init_shape_net(const ShapeNetConfig& config, std::size_t feature_index) {
  config.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(config.init_seed),
                    static_cast<std::uint32_t>(config.init_seed >> 32),
                    static_cast<std::uint32_t>(feature_index), 0x5eedu};
  std::mt19937_64 rng(seq);

  ShapeNet net;
  net.config = config;
  net.feature_index = feature_index;
  if (config.separate_nets) {
    for (std::size_t k = 0; k < config.n_outputs; ++k) net.trunks.push_back(make_trunk(config, 1, rng));
  } else {
    net.trunks.push_back(make_trunk(config, config.n_outputs, rng));
  }
  return net;
}

BoundShapeNet bind(diff::Graph& graph, const ShapeNet& net, bool trainable) {
  BoundShapeNet bound;
  bound.activation = net.config.activation;
  for (const auto& trunk : net.trunks) {
    auto& layers = bound.trunks.emplace_back();
    for (const DenseLayer& layer : trunk) {
      if (trainable) {
        Var w = graph.parameter(layer.weight);
        Var b = graph.parameter(layer.bias);
        layers.push_back({w, b});
      } else {
        Var w = graph.constant(layer.weight);
        Var b = graph.constant(layer.bias);
        layers.push_back({w, b});
      }
    }
  }
  return bound;
}

std::vector<Tensor*> parameter_slots(ShapeNet& net) {
  std::vector<Tensor*> slots;
  for (auto& trunk : net.trunks) {
    for (DenseLayer& layer : trunk) {
      slots.push_back(&layer.weight);
      slots.push_back(&layer.bias);
    }
  }
  return slots;
}

Var shape_forward(const BoundShapeNet& net, const Var& x) {
  const std::size_t batch = x.value().size();
  const Var input = diff::reshape(x, {batch, 1});
  std::vector<Var> heads;
  heads.reserve(net.trunks.size());
  for (const auto& trunk : net.trunks) {
    Var h = input;
    for (std::size_t l = 0; l < trunk.size(); ++l) {
      h = diff::add_row(diff::matmul(h, trunk[l].weight), trunk[l].bias);
      if (l + 1 < trunk.size()) {
        h = net.activation == Activation::relu ? diff::relu(h) : diff::gelu(h);
      }
    }
    heads.push_back(h);
  }
  if (heads.size() == 1) return heads.front();
  return diff::concat_columns(heads);
}

Tensor shape_forward(const ShapeNet& net, std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("shape_forward: non-finite feature value");
  }
  diff::Graph graph;
  const BoundShapeNet bound = bind(graph, net, false);
  const Var input = graph.constant(Tensor::vector({x.begin(), x.end()}));
  return shape_forward(bound, input).value();
}

}  // namespace evinam
