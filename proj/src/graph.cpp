#include "jmt/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "jmt/error.hpp"
#include "jmt/kernels.hpp"
#include "jmt/rng.hpp"

namespace jmt {
namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 18> kOpNames{{
    {OpKind::kMatmul, "matmul"},
    {OpKind::kAdd, "add"},
    {OpKind::kConcat, "concat"},
    {OpKind::kMul, "elementwise_mul"},
    {OpKind::kSubtract, "subtract"},
    {OpKind::kAbs, "abs"},
    {OpKind::kSigmoid, "sigmoid"},
    {OpKind::kTanh, "tanh"},
    {OpKind::kRelu, "relu"},
    {OpKind::kMaxout, "maxout"},
    {OpKind::kSoftmax, "softmax"},
    {OpKind::kRowMaxPool, "row_max_pool"},
    {OpKind::kDropout, "dropout"},
    {OpKind::kCrossEntropy, "cross_entropy"},
    {OpKind::kKlDivergence, "kl_divergence"},
    {OpKind::kSumSquares, "sum_squares"},
    {OpKind::kScalarScale, "scalar_scale"},
    {OpKind::kSlice, "slice"},
}};

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Inverted-dropout keep factor for element i of a mask.
double dropout_factor(std::uint64_t seed, std::size_t i, double rate) {
  double u = unit_from_bits(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
  return u < rate ? 0.0 : 1.0 / (1.0 - rate);
}

}  // namespace

std::string_view op_kind_name(OpKind kind) {
  for (const auto& [k, name] : kOpNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

OpKind op_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kOpNames) {
    if (n == name) return k;
  }
  throw BuildError("unknown op kind: " + std::string(name));
}

const Graph::Node& Graph::node(NodeRef n) const {
  if (n.index >= nodes_.size()) throw BuildError("node reference out of range");
  return nodes_[n.index];
}

NodeRef Graph::push(Node n) {
  n.length = shape_size(n.shape);
  nodes_.push_back(std::move(n));
  return NodeRef{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeRef Graph::constant(Tensor value) {
  Node n;
  n.kind = NodeKind::kConstant;
  n.shape = value.shape;
  n.value = std::move(value.values);
  return push(std::move(n));
}

NodeRef Graph::constant_view(const Tensor& value) {
  Node n;
  n.kind = NodeKind::kConstant;
  n.shape = value.shape;
  n.external_value = value.values.data();
  return push(std::move(n));
}

NodeRef Graph::parameter(Parameter& param) {
  Node n;
  n.kind = NodeKind::kParameter;
  n.shape = param.value().shape;
  n.external_value = param.value().values.data();
  n.external_grad = param.grad().values.data();
  n.param = &param;
  n.needs_grad = true;
  return push(std::move(n));
}

NodeRef Graph::parameter_row(Parameter& param, std::size_t row) {
  const Tensor& v = param.value();
  if (v.rank() != 2 || row >= v.rows()) {
    throw BuildError("parameter_row: row " + std::to_string(row) + " outside " + param.name() + " " +
                     shape_to_string(v.shape));
  }
  Node n;
  n.kind = NodeKind::kParameter;
  n.shape = {v.cols()};
  n.external_value = v.values.data() + row * v.cols();
  n.external_grad = param.grad().values.data() + row * v.cols();
  n.param = &param;
  n.needs_grad = true;
  return push(std::move(n));
}

NodeRef Graph::maxout(NodeRef a, std::size_t pool) {
  OpAttrs attrs;
  attrs.pool = pool;
  return build(OpKind::kMaxout, {a}, std::move(attrs));
}

NodeRef Graph::dropout(NodeRef a, double rate, std::uint64_t seed) {
  OpAttrs attrs;
  attrs.rate = rate;
  attrs.seed = seed;
  return build(OpKind::kDropout, {a}, std::move(attrs));
}

NodeRef Graph::cross_entropy(NodeRef probs, std::size_t target) {
  OpAttrs attrs;
  attrs.target = target;
  return build(OpKind::kCrossEntropy, {probs}, std::move(attrs));
}

NodeRef Graph::kl_divergence(NodeRef probs, std::vector<double> target) {
  OpAttrs attrs;
  attrs.distribution = std::move(target);
  return build(OpKind::kKlDivergence, {probs}, std::move(attrs));
}

NodeRef Graph::scale(NodeRef a, double factor) {
  OpAttrs attrs;
  attrs.scale = factor;
  return build(OpKind::kScalarScale, {a}, std::move(attrs));
}

NodeRef Graph::slice(NodeRef a, std::size_t begin, std::size_t length) {
  OpAttrs attrs;
  attrs.begin = begin;
  attrs.length = length;
  return build(OpKind::kSlice, {a}, std::move(attrs));
}

Shape Graph::infer_shape(OpKind kind, const std::vector<std::uint32_t>& inputs,
                         const OpAttrs& attrs) const {
  auto fail = [&](const std::string& why) -> BuildError {
    std::string msg = std::string(op_kind_name(kind)) + ": " + why + " (input shapes";
    for (auto i : inputs) msg += " " + shape_to_string(nodes_[i].shape);
    return BuildError(msg + ")");
  };
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (inputs.size() < lo || inputs.size() > hi) throw fail("wrong number of inputs");
  };
  auto in_shape = [&](std::size_t k) -> const Shape& { return nodes_[inputs[k]].shape; };
  auto all_same = [&]() {
    for (std::size_t k = 1; k < inputs.size(); ++k) {
      if (in_shape(k) != in_shape(0)) throw fail("shape mismatch");
    }
  };

  switch (kind) {
    case OpKind::kMatmul: {
      arity(2, 2);
      const Shape& a = in_shape(0);
      const Shape& b = in_shape(1);
      if (a.size() == 2 && b.size() == 1 && a[1] == b[0]) return {a[0]};
      if (a.size() == 1 && b.size() == 2 && a[0] == b[0]) return {b[1]};
      if (a.size() == 1 && b.size() == 1 && a[0] == b[0]) return {1};
      if (a.size() == 2 && b.size() == 2 && a[1] == b[0]) return {a[0], b[1]};
      throw fail("inner dimensions do not agree");
    }
    case OpKind::kAdd:
    case OpKind::kMul:
    case OpKind::kSubtract:
      if (kind == OpKind::kAdd) {
        arity(1, SIZE_MAX);
      } else {
        arity(2, 2);
      }
      all_same();
      return in_shape(0);
    case OpKind::kConcat: {
      arity(1, SIZE_MAX);
      std::size_t total = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (in_shape(k).size() != 1) throw fail("concat expects rank-1 inputs");
        total += in_shape(k)[0];
      }
      return {total};
    }
    case OpKind::kAbs:
    case OpKind::kSigmoid:
    case OpKind::kTanh:
    case OpKind::kRelu:
      arity(1, 1);
      return in_shape(0);
    case OpKind::kMaxout: {
      arity(1, 1);
      const Shape& a = in_shape(0);
      if (attrs.pool == 0) throw fail("maxout pool size must be positive");
      if (a.size() != 1 || a[0] % attrs.pool != 0) throw fail("length not divisible by pool size");
      return {a[0] / attrs.pool};
    }
    case OpKind::kSoftmax:
      arity(1, 1);
      if (in_shape(0).size() > 2) throw fail("softmax expects rank 1 or 2");
      return in_shape(0);
    case OpKind::kRowMaxPool: {
      arity(1, SIZE_MAX);
      if (inputs.size() == 1 && in_shape(0).size() == 2) return {in_shape(0)[1]};
      all_same();
      if (in_shape(0).size() != 1) throw fail("row_max_pool expects rank-1 rows or one matrix");
      return in_shape(0);
    }
    case OpKind::kDropout:
      arity(1, 1);
      if (!(attrs.rate >= 0.0 && attrs.rate < 1.0)) throw fail("dropout rate must be in [0, 1)");
      return in_shape(0);
    case OpKind::kCrossEntropy:
      arity(1, 1);
      if (in_shape(0).size() != 1 || attrs.target >= in_shape(0)[0]) throw fail("target index out of range");
      return {1};
    case OpKind::kKlDivergence:
      arity(1, 1);
      if (in_shape(0).size() != 1 || attrs.distribution.size() != in_shape(0)[0]) {
        throw fail("target distribution length " + std::to_string(attrs.distribution.size()) +
                   " does not match");
      }
      return {1};
    case OpKind::kSumSquares:
      arity(1, 1);
      return {1};
    case OpKind::kScalarScale:
      arity(1, 1);
      return in_shape(0);
    case OpKind::kSlice:
      arity(1, 1);
      if (in_shape(0).size() != 1 || attrs.length == 0 || attrs.begin + attrs.length > in_shape(0)[0]) {
        throw fail("slice [" + std::to_string(attrs.begin) + ", +" + std::to_string(attrs.length) +
                   ") out of range");
      }
      return {attrs.length};
  }
  throw BuildError("unknown op kind");
}

NodeRef Graph::build(OpKind kind, std::span<const NodeRef> inputs, OpAttrs attrs) {
  Node n;
  n.kind = NodeKind::kOp;
  n.op = kind;
  for (NodeRef r : inputs) {
    if (r.index >= nodes_.size()) throw BuildError(std::string(op_kind_name(kind)) + ": dangling input");
    n.inputs.push_back(r.index);
    n.needs_grad = n.needs_grad || nodes_[r.index].needs_grad;
  }
  n.shape = infer_shape(kind, n.inputs, attrs);
  n.attrs = std::move(attrs);
  return push(std::move(n));
}

const double* Graph::value_ptr(std::uint32_t index) const {
  const Node& n = nodes_[index];
  return n.external_value ? n.external_value : n.value.data();
}

double* Graph::grad_ptr(std::uint32_t index) {
  Node& n = nodes_[index];
  return n.external_grad ? n.external_grad : n.grad.data();
}

std::span<const double> Graph::value(NodeRef n) const {
  const Node& nd = node(n);
  if (nd.kind == NodeKind::kOp && n.index >= evaluated_) throw EvalError("node not evaluated yet");
  return {value_ptr(n.index), nd.length};
}

double Graph::scalar(NodeRef n) const {
  auto v = value(n);
  if (v.size() != 1) throw EvalError("node is not scalar: " + shape_to_string(node(n).shape));
  return v[0];
}

Tensor Graph::value_tensor(NodeRef n) const {
  auto v = value(n);
  return Tensor(node(n).shape, std::vector<double>(v.begin(), v.end()));
}

std::span<const double> Graph::gradient(NodeRef n) const {
  const Node& nd = node(n);
  if (nd.external_grad) return {nd.external_grad, nd.length};
  if (nd.grad.size() != nd.length) throw EvalError("gradient not available for node");
  return {nd.grad.data(), nd.length};
}

std::vector<Parameter*> Graph::parameters() const {
  std::vector<Parameter*> out;
  for (const Node& n : nodes_) {
    if (n.param && std::find(out.begin(), out.end(), n.param) == out.end()) out.push_back(n.param);
  }
  return out;
}

void Graph::forward() {
  for (std::size_t i = evaluated_; i < nodes_.size(); ++i) evaluate(static_cast<std::uint32_t>(i));
  evaluated_ = nodes_.size();
}

void Graph::recompute() {
  evaluated_ = 0;
  forward();
}

void Graph::evaluate(std::uint32_t index) {
  Node& n = nodes_[index];
  if (n.kind != NodeKind::kOp) return;
  n.value.assign(n.length, 0.0);
  double* out = n.value.data();
  auto in = [&](std::size_t k) { return value_ptr(n.inputs[k]); };
  auto in_len = [&](std::size_t k) { return nodes_[n.inputs[k]].length; };
  const auto& kt = kernels::active();

  switch (n.op) {
    case OpKind::kMatmul: {
      const Shape& a = nodes_[n.inputs[0]].shape;
      const Shape& b = nodes_[n.inputs[1]].shape;
      if (a.size() == 2 && b.size() == 1) {
        kt.gemv(in(0), a[0], a[1], in(1), out);
      } else if (a.size() == 1 && b.size() == 2) {
        kt.gemv_t_acc(in(1), b[0], b[1], in(0), out);
      } else if (a.size() == 1 && b.size() == 1) {
        out[0] = kt.dot(in(0), in(1), a[0]);
      } else {
        const double* A = in(0);
        const double* B = in(1);
        for (std::size_t i = 0; i < a[0]; ++i) {
          for (std::size_t k = 0; k < a[1]; ++k) kt.axpy(A[i * a[1] + k], B + k * b[1], out + i * b[1], b[1]);
        }
      }
      break;
    }
    case OpKind::kAdd:
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const double* x = in(k);
        for (std::size_t i = 0; i < n.length; ++i) out[i] += x[i];
      }
      break;
    case OpKind::kConcat: {
      std::size_t off = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        std::copy(in(k), in(k) + in_len(k), out + off);
        off += in_len(k);
      }
      break;
    }
    case OpKind::kMul:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = in(0)[i] * in(1)[i];
      break;
    case OpKind::kSubtract:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = in(0)[i] - in(1)[i];
      break;
    case OpKind::kAbs:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = std::fabs(in(0)[i]);
      break;
    case OpKind::kSigmoid:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = logistic(in(0)[i]);
      break;
    case OpKind::kTanh:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = std::tanh(in(0)[i]);
      break;
    case OpKind::kRelu:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = in(0)[i] > 0.0 ? in(0)[i] : 0.0;
      break;
    case OpKind::kMaxout: {
      const double* x = in(0);
      const std::size_t k = n.attrs.pool;
      n.winners.assign(n.length, 0);
      for (std::size_t j = 0; j < n.length; ++j) {
        std::size_t best = j * k;
        for (std::size_t i = j * k + 1; i < (j + 1) * k; ++i) {
          if (x[i] > x[best]) best = i;
        }
        out[j] = x[best];
        n.winners[j] = static_cast<std::uint32_t>(best);
      }
      break;
    }
    case OpKind::kSoftmax: {
      const double* x = in(0);
      const Shape& s = n.shape;
      std::size_t rows = s.size() == 2 ? s[0] : 1;
      std::size_t cols = s.size() == 2 ? s[1] : s[0];
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * cols;
        double* yr = out + r * cols;
        double mx = *std::max_element(xr, xr + cols);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          yr[c] = std::exp(xr[c] - mx);
          sum += yr[c];
        }
        for (std::size_t c = 0; c < cols; ++c) yr[c] /= sum;
      }
      break;
    }
    case OpKind::kRowMaxPool: {
      n.winners.assign(n.length, 0);
      if (n.inputs.size() == 1 && nodes_[n.inputs[0]].shape.size() == 2) {
        const double* x = in(0);
        std::size_t rows = nodes_[n.inputs[0]].shape[0];
        for (std::size_t j = 0; j < n.length; ++j) {
          std::uint32_t best = 0;
          for (std::uint32_t r = 1; r < rows; ++r) {
            if (x[r * n.length + j] > x[best * n.length + j]) best = r;
          }
          out[j] = x[best * n.length + j];
          n.winners[j] = best;
        }
      } else {
        for (std::size_t j = 0; j < n.length; ++j) {
          std::uint32_t best = 0;
          for (std::uint32_t k = 1; k < n.inputs.size(); ++k) {
            if (in(k)[j] > in(best)[j]) best = k;
          }
          out[j] = in(best)[j];
          n.winners[j] = best;
        }
      }
      break;
    }
    case OpKind::kDropout:
      for (std::size_t i = 0; i < n.length; ++i) {
        out[i] = in(0)[i] * dropout_factor(n.attrs.seed, i, n.attrs.rate);
      }
      break;
    case OpKind::kCrossEntropy:
      out[0] = -std::log(in(0)[n.attrs.target]);
      break;
    case OpKind::kKlDivergence: {
      double kl = 0.0;
      const auto& q = n.attrs.distribution;
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) kl += q[i] * (std::log(q[i]) - std::log(in(0)[i]));
      }
      out[0] = kl;
      break;
    }
    case OpKind::kSumSquares:
      out[0] = kt.dot(in(0), in(0), in_len(0));
      break;
    case OpKind::kScalarScale:
      for (std::size_t i = 0; i < n.length; ++i) out[i] = n.attrs.scale * in(0)[i];
      break;
    case OpKind::kSlice:
      std::copy(in(0) + n.attrs.begin, in(0) + n.attrs.begin + n.attrs.length, out);
      break;
  }

  for (std::size_t i = 0; i < n.length; ++i) {
    if (!std::isfinite(out[i])) {
      throw EvalError("non-finite value in node " + std::to_string(index) + " (" +
                      std::string(op_kind_name(n.op)) + ", shape " + shape_to_string(n.shape) + ")");
    }
  }
}

void Graph::backward(NodeRef loss) {
  const Node& ln = node(loss);
  if (ln.length != 1) throw EvalError("backward: loss must be scalar, got " + shape_to_string(ln.shape));
  if (evaluated_ <= loss.index) throw EvalError("backward: forward has not been run");

  for (std::size_t i = 0; i <= loss.index; ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad && !n.external_grad) n.grad.assign(n.length, 0.0);
    if (n.param) n.param->mark_touched();
  }
  if (!ln.needs_grad) return;
  nodes_[loss.index].grad[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (nodes_[i].kind == NodeKind::kOp && nodes_[i].needs_grad) propagate(static_cast<std::uint32_t>(i));
  }
}

void Graph::propagate(std::uint32_t index) {
  Node& n = nodes_[index];
  const double* g = n.grad.data();
  const double* y = n.value.data();
  const auto& kt = kernels::active();
  auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].needs_grad; };
  auto in = [&](std::size_t k) { return value_ptr(n.inputs[k]); };
  auto din = [&](std::size_t k) { return grad_ptr(n.inputs[k]); };

  switch (n.op) {
    case OpKind::kMatmul: {
      const Shape& a = nodes_[n.inputs[0]].shape;
      const Shape& b = nodes_[n.inputs[1]].shape;
      if (a.size() == 2 && b.size() == 1) {
        if (wants(0)) kt.ger_acc(g, a[0], in(1), a[1], din(0));
        if (wants(1)) kt.gemv_t_acc(in(0), a[0], a[1], g, din(1));
      } else if (a.size() == 1 && b.size() == 2) {
        // y = B^T a
        if (wants(0)) {
          for (std::size_t i = 0; i < b[0]; ++i) din(0)[i] += kt.dot(in(1) + i * b[1], g, b[1]);
        }
        if (wants(1)) kt.ger_acc(in(0), b[0], g, b[1], din(1));
      } else if (a.size() == 1 && b.size() == 1) {
        if (wants(0)) kt.axpy(g[0], in(1), din(0), a[0]);
        if (wants(1)) kt.axpy(g[0], in(0), din(1), a[0]);
      } else {
        const double* A = in(0);
        const double* B = in(1);
        for (std::size_t i = 0; i < a[0]; ++i) {
          for (std::size_t k = 0; k < a[1]; ++k) {
            if (wants(0)) din(0)[i * a[1] + k] += kt.dot(g + i * b[1], B + k * b[1], b[1]);
            if (wants(1)) kt.axpy(A[i * a[1] + k], g + i * b[1], din(1) + k * b[1], b[1]);
          }
        }
      }
      break;
    }
    case OpKind::kAdd:
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        if (wants(k)) kt.axpy(1.0, g, din(k), n.length);
      }
      break;
    case OpKind::kConcat: {
      std::size_t off = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        std::size_t len = nodes_[n.inputs[k]].length;
        if (wants(k)) kt.axpy(1.0, g + off, din(k), len);
        off += len;
      }
      break;
    }
    case OpKind::kMul:
      for (std::size_t i = 0; i < n.length; ++i) {
        if (wants(0)) din(0)[i] += g[i] * in(1)[i];
        if (wants(1)) din(1)[i] += g[i] * in(0)[i];
      }
      break;
    case OpKind::kSubtract:
      if (wants(0)) kt.axpy(1.0, g, din(0), n.length);
      if (wants(1)) kt.axpy(-1.0, g, din(1), n.length);
      break;
    case OpKind::kAbs: {
      const double* x = in(0);
      double* dx = din(0);
      for (std::size_t i = 0; i < n.length; ++i) {
        dx[i] += x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
      }
      break;
    }
    case OpKind::kSigmoid: {
      double* dx = din(0);
      for (std::size_t i = 0; i < n.length; ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case OpKind::kTanh: {
      double* dx = din(0);
      for (std::size_t i = 0; i < n.length; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case OpKind::kRelu: {
      const double* x = in(0);
      double* dx = din(0);
      for (std::size_t i = 0; i < n.length; ++i) {
        if (x[i] > 0.0) dx[i] += g[i];
      }
      break;
    }
    case OpKind::kMaxout: {
      double* dx = din(0);
      for (std::size_t j = 0; j < n.length; ++j) dx[n.winners[j]] += g[j];
      break;
    }
    case OpKind::kSoftmax: {
      const Shape& s = n.shape;
      std::size_t rows = s.size() == 2 ? s[0] : 1;
      std::size_t cols = s.size() == 2 ? s[1] : s[0];
      double* dx = din(0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gr = g + r * cols;
        const double* yr = y + r * cols;
        double inner = kt.dot(gr, yr, cols);
        for (std::size_t c = 0; c < cols; ++c) dx[r * cols + c] += yr[c] * (gr[c] - inner);
      }
      break;
    }
    case OpKind::kRowMaxPool:
      if (n.inputs.size() == 1 && nodes_[n.inputs[0]].shape.size() == 2) {
        double* dx = din(0);
        for (std::size_t j = 0; j < n.length; ++j) dx[n.winners[j] * n.length + j] += g[j];
      } else {
        for (std::size_t j = 0; j < n.length; ++j) {
          if (wants(n.winners[j])) din(n.winners[j])[j] += g[j];
        }
      }
      break;
    case OpKind::kDropout: {
      double* dx = din(0);
      for (std::size_t i = 0; i < n.length; ++i) {
        dx[i] += g[i] * dropout_factor(n.attrs.seed, i, n.attrs.rate);
      }
      break;
    }
    case OpKind::kCrossEntropy:
      din(0)[n.attrs.target] -= g[0] / in(0)[n.attrs.target];
      break;
    case OpKind::kKlDivergence: {
      const auto& q = n.attrs.distribution;
      double* dp = din(0);
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) dp[i] -= g[0] * q[i] / in(0)[i];
      }
      break;
    }
    case OpKind::kSumSquares:
      kt.axpy(2.0 * g[0], in(0), din(0), nodes_[n.inputs[0]].length);
      break;
    case OpKind::kScalarScale:
      kt.axpy(n.attrs.scale, g, din(0), n.length);
      break;
    case OpKind::kSlice:
      kt.axpy(1.0, g, din(0) + n.attrs.begin, n.length);
      break;
  }
}

NodeRef maybe_dropout(Graph& graph, NodeRef x, double rate, Rng* rng) {
  if (!rng || rate <= 0.0) return x;
  return graph.dropout(x, rate, rng->next());
}

double check_gradients(Graph& graph, NodeRef loss, double step) {
  std::vector<Parameter*> params = graph.parameters();
  if (params.empty()) return 0.0;

  for (Parameter* p : params) {
    p->mark_touched();
    p->zero_grad();
  }
  graph.recompute();
  graph.backward(loss);

  double worst = 0.0;
  for (Parameter* p : params) {
    std::vector<double>& theta = p->value().values;
    const std::vector<double>& analytic = p->grad().values;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + step;
      graph.recompute();
      const double plus = graph.scalar(loss);
      theta[i] = saved - step;
      graph.recompute();
      const double minus = graph.scalar(loss);
      theta[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double err = std::sqrt(diff2) / std::max(1e-8, std::sqrt(a2) + std::sqrt(n2));
    worst = std::max(worst, err);
  }
  graph.recompute();
  return worst;
}

}  // namespace jmt
