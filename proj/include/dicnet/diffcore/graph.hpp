#pragma once

#include "dicnet/diffcore/tensor.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dicnet {

class Graph;

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,            // A * B
  kMatMulTransposed,  // A * B^T
  kTranspose,
  kAdd,
  kAddRowBroadcast,   // A + 1 * b, b is 1 x cols
  kSub,
  kMul,
  kDiv,
  kScale,
  kAddScalar,
  kRelu,
  kSigmoid,
  kLog,
  kExp,
  kClamp,
  kSum,
  kMean,
  kSumRows,           // n x k -> n x 1
  kSumCols,           // n x k -> 1 x k
  kRowL2Norm,         // n x k -> n x 1
  kRowNormalize,      // each row divided by its L2 norm, zero rows stay zero
};

std::string_view op_name(OpKind kind);

/// Handle to a node of a Graph. Cheap to copy; only valid while the graph
/// that created it is alive.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  Shape shape() const;
  /// Forward value; the graph must have been evaluated through this node.
  const Matrix& value() const;
  /// Scalar value of a 1 x 1 node.
  double item() const;

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run expression DAG over dense matrices.
///
/// Ops are recorded in creation order, which is a topological order. Shapes
/// are checked when an op is recorded; values are computed by forward().
/// backward() accumulates gradients of a scalar root into every node that
/// depends on a parameter. Constants never receive gradients.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var parameter(const std::string& name, Matrix value);

  /// Evaluates every node up to and including root. Idempotent.
  const Matrix& forward(Var root);
  /// Reverse accumulation from a scalar root. Requires forward(root).
  void backward(Var root);

  const Matrix& value(Var v) const;
  /// Gradient of the last backward root w.r.t. v. Nodes that do not depend
  /// on any parameter have no gradient.
  const Matrix& grad(Var v) const;
  bool has_grad(Var v) const;
  /// Gradients for every parameter recorded in this graph.
  GradientMap parameter_gradients() const;

  Shape shape(Var v) const { return node(v).shape; }
  std::size_t size() const { return nodes_.size(); }
  /// Zero-norm rows met by kRowNormalize / kRowL2Norm during forward().
  std::size_t degenerate_rows() const { return degenerate_rows_; }

  // Op recording; prefer the free functions below.
  Var record(OpKind kind, std::array<std::size_t, 2> inputs, std::size_t arity,
             Shape shape, double a = 0.0, double b = 0.0);

 private:
  struct Node {
    OpKind kind = OpKind::kConstant;
    std::array<std::size_t, 2> inputs{};
    std::size_t arity = 0;
    Shape shape;
    double a = 0.0;  // scalar attributes (scale factor, clamp bounds)
    double b = 0.0;
    bool needs_grad = false;
    bool evaluated = false;
    std::string name;  // parameters only
    Matrix value;
    Matrix grad;
  };

  const Node& node(Var v) const;
  void evaluate(Node& n);
  void propagate(const Node& n);

  std::vector<Node> nodes_;
  std::size_t evaluated_through_ = 0;  // count of evaluated prefix
  std::size_t degenerate_rows_ = 0;
  bool has_backward_ = false;
};

// Linear algebra.
Var matmul(Var a, Var b);
Var matmul_transposed(Var a, Var b);  // a * b^T
Var transpose(Var a);

// Elementwise binary ops; operands must have equal shapes.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
/// a + bias on every row; bias is 1 x a.cols.
Var add_row(Var a, Var bias);

// Scalars.
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
inline Var operator*(double factor, Var a) { return scale(a, factor); }

// Elementwise unary ops.
Var relu(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var exp(Var a);
Var clamp(Var a, double lo, double hi);

// Reductions.
Var sum(Var a);
Var mean(Var a);
Var sum_rows(Var a);
Var sum_cols(Var a);
Var row_l2_norm(Var a);
Var row_normalize(Var a);

}  // namespace dicnet
