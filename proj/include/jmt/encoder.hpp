#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jmt/graph.hpp"
#include "jmt/params.hpp"

namespace jmt {

// Task layers, bottom to top. The numeric value is the bi-LSTM depth.
enum class Task { kPos = 1, kChunk = 2, kDep = 3, kRel = 4, kEnt = 5 };

constexpr std::array<Task, 5> kAllTasks{Task::kPos, Task::kChunk, Task::kDep, Task::kRel, Task::kEnt};
inline int depth(Task t) { return static_cast<int>(t); }
const char* task_name(Task t);
// Accepts pos|chunk|dep|rel|ent (also a..e).
Task task_from_string(const std::string& name);

// Per-direction Long Short-Term Memory weights. Every gate matrix acts on
// [h_{t-1}; g_t] and is [hidden, hidden + input].
struct LstmDirection {
  Parameter* w_i = nullptr;
  Parameter* w_f = nullptr;
  Parameter* w_o = nullptr;
  Parameter* w_u = nullptr;
  Parameter* b_i = nullptr;
  Parameter* b_f = nullptr;
  Parameter* b_o = nullptr;
  Parameter* b_u = nullptr;
};

struct LstmLayerParams {
  LstmDirection forward;
  LstmDirection backward;
  std::size_t input = 0;
  std::size_t hidden = 0;
};

// Registers both directions under "<prefix>.fw.*" / "<prefix>.bw.*". Values
// are zero; initialization happens separately.
LstmLayerParams add_lstm_layer(ParamStore& store, const std::string& prefix, std::size_t input,
                               std::size_t hidden, int owner_layer);

struct LstmState {
  NodeRef h;
  NodeRef c;
};

// i,f,o = sigmoid(W [h;g] + b), u = tanh(W_u [h;g] + b_u),
// c = i*u + f*c_prev, h = o*tanh(c).
LstmState lstm_step(Graph& graph, NodeRef input, const LstmState& prev, const LstmDirection& params);

// Runs both directions from zero states; returns [fw_t; bw_t] per position.
std::vector<NodeRef> bilstm_run(Graph& graph, std::span<const NodeRef> inputs, const LstmLayerParams& params);

struct LayerWiring {
  bool use_shortcut = true;
  bool use_label_embeddings = true;
  bool use_vertical = true;
  std::array<bool, 5> active{true, true, true, true, true};

  bool is_active(Task t) const { return active[depth(t) - 1]; }
  // Nearest active layer below `layer`, if any.
  std::optional<Task> lower_active(Task layer) const;
  // Whether token-level label embeddings feed `layer` (POS for layer 2,
  // POS and/or chunk above that).
  bool has_label_input(Task layer) const;
  bool has_vertical_input(Task layer) const;
  // x_t goes in when shortcuts are on, when nothing lies below, or when the
  // input would otherwise be empty.
  bool has_word_input(Task layer) const;
};

std::size_t composed_width(Task layer, std::size_t word_width, std::size_t lower_width, std::size_t label_width,
                           const LayerWiring& wiring);

// g_t = [lower h_t; x_t; label embedding], keeping only the components the
// wiring enables. The recurrent h_{t-1} is added inside lstm_step.
NodeRef compose_input(Graph& graph, Task layer, NodeRef word, std::optional<NodeRef> lower,
                      std::optional<NodeRef> label, const LayerWiring& wiring);

}  // namespace jmt
