#pragma once

// Reverse-mode automatic differentiation over evinam::diff::Tensor.
//
// A Graph owns every node created while evaluating an expression. Nodes are
// appended in evaluation order, so the node list is already a topological
// order and backward() is a single reverse sweep. A node only records its
// pullback when at least one input requires gradients; graphs built purely
// from constants therefore behave like an eager evaluator.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "evinam/tensor.hpp"

namespace evinam::diff {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while its graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Accumulates the incoming adjoint of a node into its inputs' gradient buffers.
/// `input_grads[k]` is null when input k does not require gradients.
using Pullback = std::function<void(std::span<const double> upstream,
                                    std::span<std::vector<double>* const> input_grads)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var constant(double value) { return constant(Tensor::scalar(value)); }

  /// Leaf that receives a gradient from backward(). Registration order is
  /// the order of the returned gradient list.
  Var parameter(Tensor value);

  /// Appends a computed node. The pullback is dropped when no input requires grad.
  Var record(Tensor value, std::vector<Var> inputs, Pullback pullback);

  const Tensor& value(const Var& v) const { return nodes_[v.id()].value; }
  bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t parameter_count() const noexcept { return parameters_.size(); }

  /// d(loss)/d(parameter) for every registered parameter, in registration order.
  /// Parameters the loss does not depend on get zero tensors.
  std::vector<Tensor> backward(const Var& loss) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    Pullback pullback;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::vector<std::size_t> parameters_;
};

// Elementwise arithmetic. Operands must share a shape, or one of them must be
// a single-element tensor which is broadcast against the other.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);

Var add(const Var& a, double c);
Var mul(const Var& a, double c);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator+(const Var& a, double c) { return add(a, c); }
inline Var operator+(double c, const Var& a) { return add(a, c); }
inline Var operator-(const Var& a, double c) { return add(a, -c); }
inline Var operator*(const Var& a, double c) { return mul(a, c); }
inline Var operator*(double c, const Var& a) { return mul(a, c); }
inline Var operator-(double c, const Var& a) { return add(neg(a), c); }
Var operator/(double c, const Var& a);

/// [m x k] @ [k x n] -> [m x n]; [m x k] @ [k] -> [m].
Var matmul(const Var& a, const Var& b);

Var abs(const Var& a);
/// x^p for a constant exponent. Negative bases need an integral exponent.
Var pow(const Var& a, double exponent);
Var sqrt(const Var& a);
Var log(const Var& a);
Var exp(const Var& a);
/// log(1 + e^x), evaluated as max(x, 0) + log1p(e^-|x|).
Var softplus(const Var& a);
Var lgamma(const Var& a);
Var digamma(const Var& a);
/// max(x, c) elementwise; the gradient flows where x > c.
Var maximum(const Var& a, double c);
Var relu(const Var& a);
Var gelu(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);

/// Shape-only view change; element count must match.
Var reshape(const Var& a, Shape shape);
/// [B x H] + [H] with the row vector added to every row.
Var add_row(const Var& matrix, const Var& row);
/// Column `col` of a [B x K] matrix as a [B] vector.
Var column(const Var& matrix, std::size_t col);
/// Stacks [B] vectors or [B x k_i] matrices side by side.
Var concat_columns(std::span<const Var> parts);
/// Element `index` of a rank-1 tensor as a scalar.
Var element(const Var& vector, std::size_t index);

// Plain scalar kernels shared with the non-graph code paths.
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

}  // namespace evinam::diff
