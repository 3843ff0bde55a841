#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jmt/graph.hpp"
#include "jmt/params.hpp"

namespace jmt {

// softmax(W_out relu(W_hid x + b_hid) + b_out)
struct ReluClassifier {
  Parameter* hidden_w = nullptr;
  Parameter* hidden_b = nullptr;
  Parameter* out_w = nullptr;
  Parameter* out_b = nullptr;

  std::size_t classes() const { return out_b->value().size(); }
};

ReluClassifier add_relu_classifier(ParamStore& store, const std::string& prefix, std::size_t input,
                                   std::size_t hidden, std::size_t classes, int owner_layer);

// Probability vector for one input. `rng` enables dropout on the input.
NodeRef classify(Graph& graph, NodeRef input, const ReluClassifier& params, double dropout = 0.0,
                 Rng* rng = nullptr);

std::vector<NodeRef> classify_tokens(Graph& graph, std::span<const NodeRef> states, const ReluClassifier& params,
                                     double dropout = 0.0, Rng* rng = nullptr);

// sum_j p_j * table[j]; table is [C, dim].
NodeRef weighted_label_embedding(Graph& graph, NodeRef probs, Parameter& table);

// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

// Chunk span over tokens [start, end] (inclusive).
struct ChunkSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  auto operator<=>(const ChunkSpan&) const = default;
};

std::vector<std::string> spans_to_iobes(const std::vector<ChunkSpan>& spans, std::size_t length);

// Lenient decoding: an I-/E- tag that does not continue an open span of the
// same type starts a new span, O closes any open span, and a span left open
// ends at its last tagged token.
std::vector<ChunkSpan> iobes_to_spans(const std::vector<std::string>& tags);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Exact-match span scoring aggregated over sentences.
PrecisionRecall chunk_f1(const std::vector<std::vector<ChunkSpan>>& gold,
                         const std::vector<std::vector<ChunkSpan>>& predicted);

}  // namespace jmt
