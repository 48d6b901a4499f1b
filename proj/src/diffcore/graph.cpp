#include "dicnet/diffcore/graph.hpp"

#include "dicnet/core/error.hpp"

#include <cmath>
#include <utility>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "diffcore";

[[noreturn]] void shape_mismatch(OpKind kind, Shape a, Shape b) {
  throw ShapeError(kModule, std::string(op_name(kind)) + ": operand shapes " +
                                to_string(a) + " and " + to_string(b) +
                                " are incompatible");
}

Graph& common_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) {
    throw ValidationError(kModule, "operands belong to different graphs");
  }
  return a.graph();
}

Var binary_same_shape(OpKind kind, Var a, Var b) {
  Graph& g = common_graph(a, b);
  if (a.shape() != b.shape()) shape_mismatch(kind, a.shape(), b.shape());
  return g.record(kind, {a.id(), b.id()}, 2, a.shape());
}

Var unary(OpKind kind, Var a, Shape out, double p = 0.0, double q = 0.0) {
  return a.graph().record(kind, {a.id(), 0}, 1, out, p, q);
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kMatMulTransposed: return "matmul_transposed";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAdd: return "add";
    case OpKind::kAddRowBroadcast: return "add_row";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kLog: return "log";
    case OpKind::kExp: return "exp";
    case OpKind::kClamp: return "clamp";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kSumRows: return "sum_rows";
    case OpKind::kSumCols: return "sum_cols";
    case OpKind::kRowL2Norm: return "row_l2_norm";
    case OpKind::kRowNormalize: return "row_normalize";
  }
  return "unknown";
}

Shape Var::shape() const { return graph_->shape(*this); }
const Matrix& Var::value() const { return graph_->value(*this); }

double Var::item() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError(kModule, "item() on non-scalar " + to_string(shape_of(v)));
  }
  return v(0, 0);
}

Var Graph::constant(Matrix value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.shape = shape_of(value);
  n.value = std::move(value);
  n.evaluated = true;
  if (!n.value.allFinite()) {
    throw NumericError(kModule, "constant contains non-finite entries");
  }
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::parameter(const std::string& name, Matrix value) {
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::kParameter && n.name == name) {
      throw ValidationError(kModule, "parameter '" + name + "' bound twice");
    }
  }
  if (!value.allFinite()) {
    throw NumericError(kModule, "parameter '" + name + "' has non-finite entries");
  }
  Node n;
  n.kind = OpKind::kParameter;
  n.shape = shape_of(value);
  n.value = std::move(value);
  n.name = name;
  n.evaluated = true;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::record(OpKind kind, std::array<std::size_t, 2> inputs,
                  std::size_t arity, Shape shape, double a, double b) {
  Node n;
  n.kind = kind;
  n.inputs = inputs;
  n.arity = arity;
  n.shape = shape;
  n.a = a;
  n.b = b;
  for (std::size_t i = 0; i < arity; ++i) {
    n.needs_grad = n.needs_grad || nodes_.at(inputs[i]).needs_grad;
  }
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

const Graph::Node& Graph::node(Var v) const {
  if (&v.graph() != this || v.id() >= nodes_.size()) {
    throw ValidationError(kModule, "variable does not belong to this graph");
  }
  return nodes_[v.id()];
}

const Matrix& Graph::value(Var v) const {
  const Node& n = node(v);
  if (!n.evaluated) {
    throw ValidationError(kModule, "value of node " + std::to_string(v.id()) +
                                       " read before forward()");
  }
  return n.value;
}

const Matrix& Graph::forward(Var root) {
  node(root);
  for (std::size_t i = evaluated_through_; i <= root.id(); ++i) {
    if (!nodes_[i].evaluated) evaluate(nodes_[i]);
  }
  evaluated_through_ = std::max(evaluated_through_, root.id() + 1);
  return nodes_[root.id()].value;
}

void Graph::evaluate(Node& n) {
  const Matrix& x = nodes_[n.inputs[0]].value;
  const Matrix& y = nodes_[n.inputs[n.arity > 1 ? 1 : 0]].value;
  switch (n.kind) {
    case OpKind::kConstant:
    case OpKind::kParameter:
      break;
    case OpKind::kMatMul:
      n.value.noalias() = x * y;
      break;
    case OpKind::kMatMulTransposed:
      n.value.noalias() = x * y.transpose();
      break;
    case OpKind::kTranspose:
      n.value = x.transpose();
      break;
    case OpKind::kAdd:
      n.value = x + y;
      break;
    case OpKind::kAddRowBroadcast:
      n.value = x.rowwise() + y.row(0);
      break;
    case OpKind::kSub:
      n.value = x - y;
      break;
    case OpKind::kMul:
      n.value = x.cwiseProduct(y);
      break;
    case OpKind::kDiv:
      n.value = x.cwiseQuotient(y);
      break;
    case OpKind::kScale:
      n.value = x * n.a;
      break;
    case OpKind::kAddScalar:
      n.value = x.array() + n.a;
      break;
    case OpKind::kRelu:
      n.value = x.cwiseMax(0.0);
      break;
    case OpKind::kSigmoid:
      n.value = x.unaryExpr([](double t) {
        // Split by sign so exp never overflows.
        if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
        const double e = std::exp(t);
        return e / (1.0 + e);
      });
      break;
    case OpKind::kLog:
      n.value = x.array().log();
      break;
    case OpKind::kExp:
      n.value = x.array().exp();
      break;
    case OpKind::kClamp:
      n.value = x.cwiseMax(n.a).cwiseMin(n.b);
      break;
    case OpKind::kSum:
      n.value = Matrix::Constant(1, 1, x.sum());
      break;
    case OpKind::kMean:
      n.value = Matrix::Constant(1, 1, x.mean());
      break;
    case OpKind::kSumRows:
      n.value = x.rowwise().sum();
      break;
    case OpKind::kSumCols:
      n.value = x.colwise().sum();
      break;
    case OpKind::kRowL2Norm:
      n.value = x.rowwise().norm();
      for (Eigen::Index i = 0; i < n.value.rows(); ++i) {
        if (n.value(i, 0) == 0.0) ++degenerate_rows_;
      }
      break;
    case OpKind::kRowNormalize: {
      n.value.resize(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double norm = x.row(i).norm();
        if (norm > 0.0) {
          n.value.row(i) = x.row(i) / norm;
        } else {
          // Degenerate embedding: similarity with it is defined as 0.
          n.value.row(i).setZero();
          ++degenerate_rows_;
        }
      }
      break;
    }
  }
  if (!n.value.allFinite()) {
    throw NumericError(kModule, "non-finite result in op " +
                                    std::string(op_name(n.kind)));
  }
  n.evaluated = true;
}

void Graph::backward(Var root) {
  const Node& r = node(root);
  if (!r.evaluated || root.id() >= evaluated_through_) {
    throw ValidationError(kModule, "backward() called before forward()");
  }
  if (r.shape != Shape{1, 1}) {
    throw ShapeError(kModule, "backward() root must be 1 x 1, got " +
                                  to_string(r.shape));
  }
  for (std::size_t i = 0; i <= root.id(); ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad) {
      n.grad = Matrix::Zero(n.shape.rows, n.shape.cols);
    } else {
      n.grad.resize(0, 0);
    }
  }
  for (std::size_t i = root.id() + 1; i < nodes_.size(); ++i) {
    nodes_[i].grad.resize(0, 0);
  }
  if (!r.needs_grad) {
    has_backward_ = true;
    return;
  }
  nodes_[root.id()].grad(0, 0) = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.needs_grad && n.arity > 0) propagate(n);
  }
  has_backward_ = true;
}

void Graph::propagate(const Node& n) {
  const Matrix& g = n.grad;
  Node& in0 = nodes_[n.inputs[0]];
  Node& in1 = nodes_[n.inputs[n.arity > 1 ? 1 : 0]];
  const bool d0 = in0.needs_grad;
  const bool d1 = n.arity > 1 && in1.needs_grad;
  const Matrix& x = in0.value;
  const Matrix& y = in1.value;

  switch (n.kind) {
    case OpKind::kConstant:
    case OpKind::kParameter:
      break;
    case OpKind::kMatMul:
      if (d0) in0.grad.noalias() += g * y.transpose();
      if (d1) in1.grad.noalias() += x.transpose() * g;
      break;
    case OpKind::kMatMulTransposed:
      if (d0) in0.grad.noalias() += g * y;
      if (d1) in1.grad.noalias() += g.transpose() * x;
      break;
    case OpKind::kTranspose:
      if (d0) in0.grad += g.transpose();
      break;
    case OpKind::kAdd:
      if (d0) in0.grad += g;
      if (d1) in1.grad += g;
      break;
    case OpKind::kAddRowBroadcast:
      if (d0) in0.grad += g;
      if (d1) in1.grad += g.colwise().sum();
      break;
    case OpKind::kSub:
      if (d0) in0.grad += g;
      if (d1) in1.grad -= g;
      break;
    case OpKind::kMul:
      if (d0) in0.grad += g.cwiseProduct(y);
      if (d1) in1.grad += g.cwiseProduct(x);
      break;
    case OpKind::kDiv:
      if (d0) in0.grad += g.cwiseQuotient(y);
      if (d1) in1.grad -= g.cwiseProduct(n.value).cwiseQuotient(y);
      break;
    case OpKind::kScale:
      in0.grad += g * n.a;
      break;
    case OpKind::kAddScalar:
      in0.grad += g;
      break;
    case OpKind::kRelu:
      in0.grad.array() += g.array() * (x.array() > 0.0).cast<double>();
      break;
    case OpKind::kSigmoid:
      in0.grad.array() += g.array() * n.value.array() * (1.0 - n.value.array());
      break;
    case OpKind::kLog:
      in0.grad += g.cwiseQuotient(x);
      break;
    case OpKind::kExp:
      in0.grad += g.cwiseProduct(n.value);
      break;
    case OpKind::kClamp:
      in0.grad.array() +=
          g.array() * ((x.array() >= n.a) && (x.array() <= n.b)).cast<double>();
      break;
    case OpKind::kSum:
      in0.grad.array() += g(0, 0);
      break;
    case OpKind::kMean:
      in0.grad.array() += g(0, 0) / static_cast<double>(x.size());
      break;
    case OpKind::kSumRows:
      in0.grad.colwise() += g.col(0);
      break;
    case OpKind::kSumCols:
      in0.grad.rowwise() += g.row(0);
      break;
    case OpKind::kRowL2Norm:
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double norm = n.value(i, 0);
        if (norm > 0.0) in0.grad.row(i) += (g(i, 0) / norm) * x.row(i);
      }
      break;
    case OpKind::kRowNormalize:
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double norm = x.row(i).norm();
        if (norm == 0.0) continue;
        const auto out = n.value.row(i);
        const double along = out.dot(g.row(i));
        in0.grad.row(i) += (g.row(i) - along * out) / norm;
      }
      break;
  }
}

const Matrix& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (!has_backward_) {
    throw ValidationError(kModule, "gradient read before backward()");
  }
  if (!n.needs_grad || n.grad.size() == 0) {
    throw ValidationError(kModule, "node " + std::to_string(v.id()) +
                                       " carries no gradient");
  }
  return n.grad;
}

bool Graph::has_grad(Var v) const {
  const Node& n = node(v);
  return has_backward_ && n.needs_grad && n.grad.size() != 0;
}

GradientMap Graph::parameter_gradients() const {
  if (!has_backward_) {
    throw ValidationError(kModule, "gradients requested before backward()");
  }
  GradientMap out;
  for (const Node& n : nodes_) {
    if (n.kind != OpKind::kParameter) continue;
    out.emplace(n.name, n.grad.size() != 0
                            ? n.grad
                            : Matrix::Zero(n.shape.rows, n.shape.cols));
  }
  return out;
}

// ---- op constructors -------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = common_graph(a, b);
  if (a.shape().cols != b.shape().rows) {
    shape_mismatch(OpKind::kMatMul, a.shape(), b.shape());
  }
  return g.record(OpKind::kMatMul, {a.id(), b.id()}, 2,
                  {a.shape().rows, b.shape().cols});
}

Var matmul_transposed(Var a, Var b) {
  Graph& g = common_graph(a, b);
  if (a.shape().cols != b.shape().cols) {
    shape_mismatch(OpKind::kMatMulTransposed, a.shape(), b.shape());
  }
  return g.record(OpKind::kMatMulTransposed, {a.id(), b.id()}, 2,
                  {a.shape().rows, b.shape().rows});
}

Var transpose(Var a) {
  return unary(OpKind::kTranspose, a, {a.shape().cols, a.shape().rows});
}

Var operator+(Var a, Var b) { return binary_same_shape(OpKind::kAdd, a, b); }
Var operator-(Var a, Var b) { return binary_same_shape(OpKind::kSub, a, b); }
Var operator*(Var a, Var b) { return binary_same_shape(OpKind::kMul, a, b); }
Var operator/(Var a, Var b) { return binary_same_shape(OpKind::kDiv, a, b); }

Var add_row(Var a, Var bias) {
  Graph& g = common_graph(a, bias);
  if (bias.shape().rows != 1 || bias.shape().cols != a.shape().cols) {
    shape_mismatch(OpKind::kAddRowBroadcast, a.shape(), bias.shape());
  }
  return g.record(OpKind::kAddRowBroadcast, {a.id(), bias.id()}, 2, a.shape());
}

Var scale(Var a, double factor) {
  return unary(OpKind::kScale, a, a.shape(), factor);
}
Var add_scalar(Var a, double offset) {
  return unary(OpKind::kAddScalar, a, a.shape(), offset);
}
Var relu(Var a) { return unary(OpKind::kRelu, a, a.shape()); }
Var sigmoid(Var a) { return unary(OpKind::kSigmoid, a, a.shape()); }
Var log(Var a) { return unary(OpKind::kLog, a, a.shape()); }
Var exp(Var a) { return unary(OpKind::kExp, a, a.shape()); }

Var clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) {
    throw ValidationError(kModule, "clamp: lower bound exceeds upper bound");
  }
  return unary(OpKind::kClamp, a, a.shape(), lo, hi);
}

Var sum(Var a) { return unary(OpKind::kSum, a, {1, 1}); }
Var mean(Var a) {
  if (a.shape().rows * a.shape().cols == 0) {
    throw ShapeError(kModule, "mean of empty matrix");
  }
  return unary(OpKind::kMean, a, {1, 1});
}
Var sum_rows(Var a) { return unary(OpKind::kSumRows, a, {a.shape().rows, 1}); }
Var sum_cols(Var a) { return unary(OpKind::kSumCols, a, {1, a.shape().cols}); }
Var row_l2_norm(Var a) {
  return unary(OpKind::kRowL2Norm, a, {a.shape().rows, 1});
}
Var row_normalize(Var a) { return unary(OpKind::kRowNormalize, a, a.shape()); }

}  // namespace dicnet
