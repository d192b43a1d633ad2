#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evinam/graph.hpp"
#include "evinam/tensor.hpp"

namespace evinam {

enum class Activation { relu, gelu };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

struct ShapeNetConfig {
  std::vector<std::size_t> hidden_sizes{64, 32};
  Activation activation = Activation::relu;
  /// One raw output per distributional parameter (4 for NIG, C for Dirichlet).
  std::size_t n_outputs = 4;
  std::uint64_t init_seed = 0;
  /// One independent trunk per output instead of a shared trunk with n_outputs heads.
  bool separate_nets = false;

  void validate() const;
};

/// Affine layer y = x W + b with W stored [in x out].
struct DenseLayer {
  diff::Tensor weight;
  diff::Tensor bias;
};

/// Univariate subnetwork mapping one encoded feature to n_outputs raw values.
struct ShapeNet {
  ShapeNetConfig config;
  std::size_t feature_index = 0;
  /// A single trunk, or n_outputs single-output trunks when separate_nets is set.
  std::vector<std::vector<DenseLayer>> trunks;

  std::size_t parameter_count() const;
};

/// Hidden layers Kaiming-uniform (biases uniform in +-1/sqrt(fan_in)); the
/// output layer starts at exactly zero so an untrained net outputs 0.
ShapeNet init_shape_net(const ShapeNetConfig& config, std::size_t feature_index = 0);

/// A ShapeNet whose tensors have been placed on a graph.
struct BoundShapeNet {
  struct Layer {
    diff::Var weight;
    diff::Var bias;
  };
  Activation activation = Activation::relu;
  std::vector<std::vector<Layer>> trunks;
};

/// Places every weight on `graph`, as parameters when `trainable`, else as constants.
/// Parameter registration order: trunk by trunk, layer by layer, weight then bias.
BoundShapeNet bind(diff::Graph& graph, const ShapeNet& net, bool trainable);

/// Mutable views of the net's tensors in the same order as bind().
std::vector<diff::Tensor*> parameter_slots(ShapeNet& net);

/// x: [B] feature values -> [B x n_outputs] raw outputs.
diff::Var shape_forward(const BoundShapeNet& net, const diff::Var& x);

/// Eager convenience wrapper; throws DomainError on non-finite input.
diff::Tensor shape_forward(const ShapeNet& net, std::span<const double> x);

}  // namespace evinam
