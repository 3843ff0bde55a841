#pragma once

// Reverse-mode differentiation over a fixed catalog of dense ops. A Graph is
// built node by node (shapes are checked as nodes are appended), evaluated
// with forward(), and differentiated with backward(). Parameter leaves alias
// the storage of a Parameter, so backward() accumulates straight into
// Parameter::grad() and several graphs can contribute to one update.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "jmt/params.hpp"
#include "jmt/rng.hpp"
#include "jmt/tensor.hpp"

namespace jmt {

enum class OpKind {
  kMatmul,
  kAdd,
  kConcat,
  kMul,
  kSubtract,
  kAbs,
  kSigmoid,
  kTanh,
  kRelu,
  kMaxout,
  kSoftmax,
  kRowMaxPool,
  kDropout,
  kCrossEntropy,
  kKlDivergence,
  kSumSquares,
  kScalarScale,
  kSlice,
};

std::string_view op_kind_name(OpKind kind);
// Throws BuildError for names outside the catalog.
OpKind op_kind_from_string(std::string_view name);

struct OpAttrs {
  std::size_t pool = 0;               // maxout group size
  double rate = 0.0;                  // dropout
  std::uint64_t seed = 0;             // dropout mask seed
  std::size_t target = 0;             // cross_entropy gold index
  std::vector<double> distribution;   // kl_divergence target
  double scale = 1.0;                 // scalar_scale
  std::size_t begin = 0;              // slice
  std::size_t length = 0;             // slice
};

struct NodeRef {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
  bool operator==(const NodeRef&) const = default;
};

class Graph {
 public:
  enum class NodeKind { kConstant, kParameter, kOp };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  NodeRef constant(Tensor value);
  // Aliases caller-owned storage, which must outlive the graph.
  NodeRef constant_view(const Tensor& value);
  NodeRef parameter(Parameter& param);
  // A single row of a rank-2 parameter, as a rank-1 leaf.
  NodeRef parameter_row(Parameter& param, std::size_t row);

  NodeRef build(OpKind kind, std::span<const NodeRef> inputs, OpAttrs attrs = {});
  NodeRef build(OpKind kind, std::initializer_list<NodeRef> inputs, OpAttrs attrs = {}) {
    return build(kind, std::span<const NodeRef>(inputs.begin(), inputs.size()), std::move(attrs));
  }

  NodeRef matmul(NodeRef a, NodeRef b) { return build(OpKind::kMatmul, {a, b}); }
  NodeRef add(NodeRef a, NodeRef b) { return build(OpKind::kAdd, {a, b}); }
  NodeRef add(std::span<const NodeRef> xs) { return build(OpKind::kAdd, xs); }
  NodeRef concat(std::span<const NodeRef> xs) { return build(OpKind::kConcat, xs); }
  NodeRef concat(std::initializer_list<NodeRef> xs) { return build(OpKind::kConcat, xs); }
  NodeRef mul(NodeRef a, NodeRef b) { return build(OpKind::kMul, {a, b}); }
  NodeRef subtract(NodeRef a, NodeRef b) { return build(OpKind::kSubtract, {a, b}); }
  NodeRef abs(NodeRef a) { return build(OpKind::kAbs, {a}); }
  NodeRef sigmoid(NodeRef a) { return build(OpKind::kSigmoid, {a}); }
  NodeRef tanh(NodeRef a) { return build(OpKind::kTanh, {a}); }
  NodeRef relu(NodeRef a) { return build(OpKind::kRelu, {a}); }
  NodeRef maxout(NodeRef a, std::size_t pool);
  NodeRef softmax(NodeRef a) { return build(OpKind::kSoftmax, {a}); }
  NodeRef row_max_pool(std::span<const NodeRef> xs) { return build(OpKind::kRowMaxPool, xs); }
  NodeRef dropout(NodeRef a, double rate, std::uint64_t seed);
  NodeRef cross_entropy(NodeRef probs, std::size_t target);
  NodeRef kl_divergence(NodeRef probs, std::vector<double> target);
  NodeRef sum_squares(NodeRef a) { return build(OpKind::kSumSquares, {a}); }
  NodeRef scale(NodeRef a, double factor);
  NodeRef slice(NodeRef a, std::size_t begin, std::size_t length);

  // Evaluates every node appended since the last call, in insertion order.
  void forward();
  // Re-evaluates every node; used after leaf storage changed.
  void recompute();
  // Seeds d(loss)/d(loss) = 1 and propagates to every parameter leaf. Adds
  // into Parameter::grad(); callers zero gradients between updates.
  void backward(NodeRef loss);

  std::size_t size() const { return nodes_.size(); }
  NodeKind kind(NodeRef n) const { return node(n).kind; }
  OpKind op(NodeRef n) const { return node(n).op; }
  const Shape& shape(NodeRef n) const { return node(n).shape; }
  std::span<const double> value(NodeRef n) const;
  double scalar(NodeRef n) const;
  Tensor value_tensor(NodeRef n) const;
  std::span<const double> gradient(NodeRef n) const;

  // Distinct parameters referenced by leaves, in first-use order.
  std::vector<Parameter*> parameters() const;

 private:
  struct Node {
    NodeKind kind = NodeKind::kOp;
    OpKind op = OpKind::kAdd;
    std::vector<std::uint32_t> inputs;
    OpAttrs attrs;
    Shape shape;
    std::size_t length = 0;
    std::vector<double> value;
    std::vector<double> grad;
    const double* external_value = nullptr;
    double* external_grad = nullptr;
    Parameter* param = nullptr;
    bool needs_grad = false;
    // maxout / row_max_pool argmax bookkeeping.
    std::vector<std::uint32_t> winners;
  };

  const Node& node(NodeRef n) const;
  NodeRef push(Node n);
  Shape infer_shape(OpKind kind, const std::vector<std::uint32_t>& inputs, const OpAttrs& attrs) const;
  void evaluate(std::uint32_t index);
  void propagate(std::uint32_t index);
  const double* value_ptr(std::uint32_t index) const;
  double* grad_ptr(std::uint32_t index);

  std::vector<Node> nodes_;
  std::size_t evaluated_ = 0;
};

// Inverted dropout with a seed drawn from `rng`; identity when rng is null
// (inference) or the rate is zero.
NodeRef maybe_dropout(Graph& graph, NodeRef x, double rate, Rng* rng);

// Central finite differences over every element of every parameter reachable
// from the graph's leaves. For each parameter tensor P the error is
// ||analytic - numeric|| / max(1e-8, ||analytic|| + ||numeric||); the maximum
// over tensors is returned. Parameter gradients are zeroed, then left holding
// the analytic gradient. Returns 0 for graphs without parameters.
double check_gradients(Graph& graph, NodeRef loss, double step = 1e-5);

}  // namespace jmt
