#include "evinam/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "evinam/errors.hpp"
#include "evinam/special.hpp"

namespace evinam::diff {

const Tensor& Var::value() const { return graph_->value(*this); }
bool Var::requires_grad() const { return graph_->requires_grad(*this); }

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true});
  parameters_.push_back(nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::vector<Var> inputs, Pullback pullback) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.graph() != this) throw InvalidInput("operands belong to different graphs");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.pullback = std::move(pullback);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::vector<Tensor> Graph::backward(const Var& loss) const {
  if (&loss.graph() != this) throw InvalidInput("loss belongs to a different graph");
  const Node& root = nodes_[loss.id()];
  if (root.value.size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + shape_string(root.value.shape()));
  }

  std::vector<std::vector<double>> grads(loss.id() + 1);
  grads[loss.id()] = {1.0};
  std::vector<std::vector<double>*> input_grads;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.requires_grad || !node.pullback || grads[i].empty()) continue;
    input_grads.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const std::size_t in = node.inputs[k];
      if (!nodes_[in].requires_grad) continue;
      if (grads[in].empty()) grads[in].assign(nodes_[in].value.size(), 0.0);
      input_grads[k] = &grads[in];
    }
    node.pullback(grads[i], input_grads);
    // Interior adjoints are dead once propagated.
    if (!node.inputs.empty()) std::vector<double>().swap(grads[i]);
  }

  std::vector<Tensor> out;
  out.reserve(parameters_.size());
  for (std::size_t id : parameters_) {
    const Shape& shape = nodes_[id].value.shape();
    if (id < grads.size() && !grads[id].empty()) {
      out.emplace_back(shape, std::move(grads[id]));
    } else {
      out.push_back(Tensor::zeros(shape));
    }
  }
  return out;
}

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  std::ostringstream msg;
  msg << op << ": incompatible shapes " << shape_string(a.shape()) << " and "
      << shape_string(b.shape());
  throw ShapeError(msg.str());
}

// Shape of an elementwise binary result with scalar broadcasting.
Shape broadcast_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return a.shape();
  if (a.size() == 1) return b.shape();
  if (b.size() == 1) return a.shape();
  shape_mismatch(op, a, b);
}

// f(x, y) elementwise with partials dfx(x, y, out), dfy(x, y, out).
template <class F, class Dx, class Dy>
Var binary(const char* op, const Var& a, const Var& b, F f, Dx dfx, Dy dfy) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Shape shape = broadcast_shape(op, av, bv);
  const std::size_t n = shape_size(shape);
  const bool a_scalar = av.size() == 1;
  const bool b_scalar = bv.size() == 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = f(av[a_scalar ? 0 : i], bv[b_scalar ? 0 : i]);
  }
  Var result = a.graph().record(
      Tensor(std::move(shape), out), {a, b},
      [a, b, a_scalar, b_scalar, dfx, dfy, out](std::span<const double> up,
                                                std::span<std::vector<double>* const> g) {
        const Tensor& av = a.value();
        const Tensor& bv = b.value();
        for (std::size_t i = 0; i < up.size(); ++i) {
          const double x = av[a_scalar ? 0 : i];
          const double y = bv[b_scalar ? 0 : i];
          if (g[0]) (*g[0])[a_scalar ? 0 : i] += up[i] * dfx(x, y, out[i]);
          if (g[1]) (*g[1])[b_scalar ? 0 : i] += up[i] * dfy(x, y, out[i]);
        }
      });
  return result;
}

// f(x) elementwise with derivative df(x, out).
template <class F, class D>
Var unary(const Var& a, F f, D df) {
  const Tensor& av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  std::vector<double> keep = out;
  return a.graph().record(Tensor(av.shape(), std::move(out)), {a},
                          [a, df, keep = std::move(keep)](
                              std::span<const double> up, std::span<std::vector<double>* const> g) {
                            const Tensor& av = a.value();
                            for (std::size_t i = 0; i < up.size(); ++i) {
                              (*g[0])[i] += up[i] * df(av[i], keep[i]);
                            }
                          });
}

void require_positive(const Tensor& t, const char* op) {
  for (double v : t.data()) {
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << op << ": argument must be positive, got " << v;
      throw DomainError(msg.str());
    }
  }
}

}  // namespace

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var add(const Var& a, const Var& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Var div(const Var& a, const Var& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double out) { return -out / y; });
}

Var neg(const Var& a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var add(const Var& a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var mul(const Var& a, double c) {
  return unary(a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

Var operator/(double c, const Var& a) { return div(a.graph().constant(c), a); }

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || (bv.rank() != 1 && bv.rank() != 2) || av.cols() != bv.rows()) {
    shape_mismatch("matmul", av, bv);
  }
  const std::size_t m = av.rows();
  const std::size_t k = av.cols();
  const std::size_t n = bv.cols();
  std::vector<double> out(m * n, 0.0);
  const double* A = av.data().data();
  const double* B = bv.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  Shape shape = bv.rank() == 1 ? Shape{m} : Shape{m, n};
  return a.graph().record(
      Tensor(std::move(shape), std::move(out)), {a, b},
      [a, b, m, k, n](std::span<const double> up, std::span<std::vector<double>* const> g) {
        const double* A = a.value().data().data();
        const double* B = b.value().data().data();
        if (g[0]) {
          // dA = up @ B^T
          double* dA = g[0]->data();
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const double* brow = B + p * n;
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) acc += up[i * n + j] * brow[j];
              dA[i * k + p] += acc;
            }
          }
        }
        if (g[1]) {
          // dB = A^T @ up
          double* dB = g[1]->data();
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = A[i * k + p];
              double* drow = dB + p * n;
              for (std::size_t j = 0; j < n; ++j) drow[j] += aip * up[i * n + j];
            }
          }
        }
      });
}

Var abs(const Var& a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var pow(const Var& a, double exponent) {
  if (exponent != std::floor(exponent)) {
    for (double v : a.value().data()) {
      if (v < 0.0) throw DomainError("pow: negative base with a non-integral exponent");
    }
  }
  return unary(
      a, [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) {
        // Subgradient 0 at the origin when the true derivative is unbounded.
        if (x == 0.0 && exponent < 1.0) return 0.0;
        return exponent * std::pow(x, exponent - 1.0);
      });
}

Var sqrt(const Var& a) {
  for (double v : a.value().data()) {
    if (v < 0.0) throw DomainError("sqrt: negative argument");
  }
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double out) { return out > 0.0 ? 0.5 / out : 0.0; });
}

Var log(const Var& a) {
  require_positive(a.value(), "log");
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double out) { return out; });
}

Var softplus(const Var& a) {
  return unary(
      a, [](double x) { return softplus(x); }, [](double x, double) { return sigmoid(x); });
}

Var lgamma(const Var& a) {
  require_positive(a.value(), "lgamma");
  return unary(
      a, [](double x) { return special::log_gamma(x); },
      [](double x, double) { return special::digamma(x); });
}

Var digamma(const Var& a) {
  require_positive(a.value(), "digamma");
  return unary(
      a, [](double x) { return special::digamma(x); },
      [](double x, double) { return special::trigamma(x); });
}

Var maximum(const Var& a, double c) {
  return unary(
      a, [c](double x) { return x > c ? x : c; },
      [c](double x, double) { return x > c ? 1.0 : 0.0; });
}

Var relu(const Var& a) { return maximum(a, 0.0); }

Var gelu(const Var& a) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return unary(
      a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x, double) {
        return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return a.graph().record(Tensor::scalar(total), {a},
                          [](std::span<const double> up, std::span<std::vector<double>* const> g) {
                            for (double& v : *g[0]) v += up[0];
                          });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const double scale = 1.0 / static_cast<double>(n);
  return a.graph().record(Tensor::scalar(total * scale), {a},
                          [scale](std::span<const double> up,
                                  std::span<std::vector<double>* const> g) {
                            for (double& v : *g[0]) v += up[0] * scale;
                          });
}

Var reshape(const Var& a, Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                     shape_string(shape));
  }
  std::vector<double> data(a.value().data().begin(), a.value().data().end());
  return a.graph().record(Tensor(std::move(shape), std::move(data)), {a},
                          [](std::span<const double> up, std::span<std::vector<double>* const> g) {
                            for (std::size_t i = 0; i < up.size(); ++i) (*g[0])[i] += up[i];
                          });
}

Var add_row(const Var& matrix, const Var& row) {
  const Tensor& mv = matrix.value();
  const Tensor& rv = row.value();
  if (mv.rank() != 2 || rv.rank() != 1 || rv.size() != mv.cols()) {
    shape_mismatch("add_row", mv, rv);
  }
  const std::size_t rows = mv.rows();
  const std::size_t cols = mv.cols();
  std::vector<double> out(mv.data().begin(), mv.data().end());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] += rv[j];
  }
  return matrix.graph().record(
      Tensor(mv.shape(), std::move(out)), {matrix, row},
      [rows, cols](std::span<const double> up, std::span<std::vector<double>* const> g) {
        if (g[0]) {
          for (std::size_t i = 0; i < up.size(); ++i) (*g[0])[i] += up[i];
        }
        if (g[1]) {
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) (*g[1])[j] += up[i * cols + j];
          }
        }
      });
}

Var column(const Var& matrix, std::size_t col) {
  const Tensor& mv = matrix.value();
  if (mv.rank() != 2 || col >= mv.cols()) {
    throw ShapeError("column: index " + std::to_string(col) + " out of range for " +
                     shape_string(mv.shape()));
  }
  const std::size_t rows = mv.rows();
  const std::size_t cols = mv.cols();
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = mv[i * cols + col];
  return matrix.graph().record(
      Tensor::vector(std::move(out)), {matrix},
      [rows, cols, col](std::span<const double> up, std::span<std::vector<double>* const> g) {
        for (std::size_t i = 0; i < rows; ++i) (*g[0])[i * cols + col] += up[i];
      });
}

Var concat_columns(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_columns: no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (v.rank() > 2 || v.rank() == 0 || v.rows() != rows) {
      shape_mismatch("concat_columns", parts[0].value(), v);
    }
    widths.push_back(v.cols());
    total += v.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor& v = parts[p].value();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < widths[p]; ++j) out[i * total + offset + j] = v[i * widths[p] + j];
    }
    offset += widths[p];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].graph().record(
      Tensor::matrix(rows, total, std::move(out)), std::move(inputs),
      [rows, total, widths](std::span<const double> up, std::span<std::vector<double>* const> g) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < widths.size(); ++p) {
          if (g[p]) {
            for (std::size_t i = 0; i < rows; ++i) {
              for (std::size_t j = 0; j < widths[p]; ++j) {
                (*g[p])[i * widths[p] + j] += up[i * total + offset + j];
              }
            }
          }
          offset += widths[p];
        }
      });
}

Var element(const Var& vector, std::size_t index) {
  const Tensor& v = vector.value();
  if (v.rank() != 1 || index >= v.size()) {
    throw ShapeError("element: index " + std::to_string(index) + " out of range for " +
                     shape_string(v.shape()));
  }
  return vector.graph().record(
      Tensor::scalar(v[index]), {vector},
      [index](std::span<const double> up, std::span<std::vector<double>* const> g) {
        (*g[0])[index] += up[0];
      });
}

}  // namespace evinam::diff
