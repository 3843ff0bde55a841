#include "jmt/encoder.hpp"

#include "jmt/error.hpp"

namespace jmt {
namespace {

Parameter* add_matrix(ParamStore& store, const std::string& name, std::size_t rows, std::size_t cols,
                      int owner) {
  return &store.add(name, Tensor({rows, cols}), ParamRole::kLstmWeight, owner);
}

Parameter* add_bias(ParamStore& store, const std::string& name, std::size_t n, int owner, bool forget) {
  return &store.add(name, Tensor({n}), forget ? ParamRole::kLstmForgetBias : ParamRole::kLstmBias, owner);
}

LstmDirection add_direction(ParamStore& store, const std::string& prefix, std::size_t input,
                            std::size_t hidden, int owner) {
  LstmDirection d;
  const std::size_t cols = hidden + input;
  d.w_i = add_matrix(store, prefix + ".W_i", hidden, cols, owner);
  d.w_f = add_matrix(store, prefix + ".W_f", hidden, cols, owner);
  d.w_o = add_matrix(store, prefix + ".W_o", hidden, cols, owner);
  d.w_u = add_matrix(store, prefix + ".W_u", hidden, cols, owner);
  d.b_i = add_bias(store, prefix + ".b_i", hidden, owner, false);
  d.b_f = add_bias(store, prefix + ".b_f", hidden, owner, true);
  d.b_o = add_bias(store, prefix + ".b_o", hidden, owner, false);
  d.b_u = add_bias(store, prefix + ".b_u", hidden, owner, false);
  return d;
}

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::kPos:
      return "pos";
    case Task::kChunk:
      return "chunk";
    case Task::kDep:
      return "dep";
    case Task::kRel:
      return "rel";
    case Task::kEnt:
      return "ent";
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  if (name == "pos" || name == "a") return Task::kPos;
  if (name == "chunk" || name == "b") return Task::kChunk;
  if (name == "dep" || name == "c") return Task::kDep;
  if (name == "rel" || name == "d") return Task::kRel;
  if (name == "ent" || name == "e") return Task::kEnt;
  throw UsageError("unknown task: " + name);
}

LstmLayerParams add_lstm_layer(ParamStore& store, const std::string& prefix, std::size_t input,
                               std::size_t hidden, int owner_layer) {
  LstmLayerParams p;
  p.input = input;
  p.hidden = hidden;
  p.forward = add_direction(store, prefix + ".fw", input, hidden, owner_layer);
  p.backward = add_direction(store, prefix + ".bw", input, hidden, owner_layer);
  return p;
}

LstmState lstm_step(Graph& graph, NodeRef input, const LstmState& prev, const LstmDirection& p) {
  const std::size_t hidden = p.b_i->value().size();
  if (graph.shape(prev.h) != Shape{hidden} || graph.shape(prev.c) != Shape{hidden}) {
    throw BuildError("lstm_step: state width does not match hidden size " + std::to_string(hidden));
  }
  const std::size_t expected = p.w_i->value().cols() - hidden;
  if (graph.shape(input) != Shape{expected}) {
    throw BuildError("lstm_step: input " + shape_to_string(graph.shape(input)) + " but weights expect [" +
                     std::to_string(expected) + "]");
  }
  NodeRef z = graph.concat({prev.h, input});
  auto gate = [&](Parameter* w, Parameter* b) {
    return graph.add(graph.matmul(graph.parameter(*w), z), graph.parameter(*b));
  };
  NodeRef i = graph.sigmoid(gate(p.w_i, p.b_i));
  NodeRef f = graph.sigmoid(gate(p.w_f, p.b_f));
  NodeRef o = graph.sigmoid(gate(p.w_o, p.b_o));
  NodeRef u = graph.tanh(gate(p.w_u, p.b_u));
  NodeRef c = graph.add(graph.mul(i, u), graph.mul(f, prev.c));
  NodeRef h = graph.mul(o, graph.tanh(c));
  return {h, c};
}

std::vector<NodeRef> bilstm_run(Graph& graph, std::span<const NodeRef> inputs, const LstmLayerParams& params) {
  const std::size_t n = inputs.size();
  if (n == 0) throw PreconditionError("bilstm_run: empty sequence");
  NodeRef zero = graph.constant(Tensor::zeros({params.hidden}));

  std::vector<NodeRef> fw(n), bw(n);
  LstmState state{zero, zero};
  for (std::size_t t = 0; t < n; ++t) {
    state = lstm_step(graph, inputs[t], state, params.forward);
    fw[t] = state.h;
  }
  state = {zero, zero};
  for (std::size_t t = n; t-- > 0;) {
    state = lstm_step(graph, inputs[t], state, params.backward);
    bw[t] = state.h;
  }
  std::vector<NodeRef> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = graph.concat({fw[t], bw[t]});
  return out;
}

std::optional<Task> LayerWiring::lower_active(Task layer) const {
  for (int k = depth(layer) - 1; k >= 1; --k) {
    if (active[k - 1]) return static_cast<Task>(k);
  }
  return std::nullopt;
}

bool LayerWiring::has_label_input(Task layer) const {
  if (!use_label_embeddings) return false;
  const int d = depth(layer);
  bool pos = d > depth(Task::kPos) && is_active(Task::kPos);
  bool chk = d > depth(Task::kChunk) && is_active(Task::kChunk);
  return pos || chk;
}

bool LayerWiring::has_vertical_input(Task layer) const {
  return use_vertical && lower_active(layer).has_value();
}

bool LayerWiring::has_word_input(Task layer) const {
  if (use_shortcut || !lower_active(layer)) return true;
  return !has_vertical_input(layer) && !has_label_input(layer);
}

std::size_t composed_width(Task layer, std::size_t word_width, std::size_t lower_width, std::size_t label_width,
                           const LayerWiring& wiring) {
  std::size_t w = 0;
  if (wiring.has_vertical_input(layer)) w += lower_width;
  if (wiring.has_word_input(layer)) w += word_width;
  if (wiring.has_label_input(layer)) w += label_width;
  return w;
}

NodeRef compose_input(Graph& graph, Task layer, NodeRef word, std::optional<NodeRef> lower,
                      std::optional<NodeRef> label, const LayerWiring& wiring) {
  std::vector<NodeRef> parts;
  if (wiring.has_vertical_input(layer)) {
    if (!lower) throw BuildError(std::string("compose_input: layer ") + task_name(layer) + " needs the lower hidden state");
    parts.push_back(*lower);
  }
  if (wiring.has_word_input(layer)) parts.push_back(word);
  if (wiring.has_label_input(layer)) {
    if (!label) throw BuildError(std::string("compose_input: layer ") + task_name(layer) + " needs label embeddings");
    parts.push_back(*label);
  }
  return parts.size() == 1 ? parts[0] : graph.concat(parts);
}

}  // namespace jmt
