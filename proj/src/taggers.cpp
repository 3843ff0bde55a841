#include "jmt/taggers.hpp"

#include <algorithm>
#include <set>

#include "jmt/error.hpp"

namespace jmt {

ReluClassifier add_relu_classifier(ParamStore& store, const std::string& prefix, std::size_t input,
                                   std::size_t hidden, std::size_t classes, int owner_layer) {
  ReluClassifier c;
  c.hidden_w = &store.add(prefix + ".W_hid", Tensor({hidden, input}), ParamRole::kClassifierWeight, owner_layer);
  c.hidden_b = &store.add(prefix + ".b_hid", Tensor({hidden}), ParamRole::kClassifierBias, owner_layer);
  c.out_w = &store.add(prefix + ".W_out", Tensor({classes, hidden}), ParamRole::kSoftmaxWeight, owner_layer);
  c.out_b = &store.add(prefix + ".b_out", Tensor({classes}), ParamRole::kClassifierBias, owner_layer);
  return c;
}

NodeRef classify(Graph& graph, NodeRef input, const ReluClassifier& p, double dropout, Rng* rng) {
  NodeRef x = maybe_dropout(graph, input, dropout, rng);
  NodeRef hidden =
      graph.relu(graph.add(graph.matmul(graph.parameter(*p.hidden_w), x), graph.parameter(*p.hidden_b)));
  NodeRef logits = graph.add(graph.matmul(graph.parameter(*p.out_w), hidden), graph.parameter(*p.out_b));
  return graph.softmax(logits);
}

std::vector<NodeRef> classify_tokens(Graph& graph, std::span<const NodeRef> states, const ReluClassifier& params,
                                     double dropout, Rng* rng) {
  std::vector<NodeRef> out;
  out.reserve(states.size());
  for (NodeRef h : states) out.push_back(classify(graph, h, params, dropout, rng));
  return out;
}

NodeRef weighted_label_embedding(Graph& graph, NodeRef probs, Parameter& table) {
  return graph.matmul(probs, graph.parameter(table));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<std::string> spans_to_iobes(const std::vector<ChunkSpan>& spans, std::size_t length) {
  std::vector<std::string> tags(length, "O");
  for (const auto& s : spans) {
    if (s.end < s.start || s.end >= length) throw PreconditionError("chunk span out of range");
    if (s.start == s.end) {
      tags[s.start] = "S-" + s.type;
      continue;
    }
    tags[s.start] = "B-" + s.type;
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.type;
    tags[s.end] = "E-" + s.type;
  }
  return tags;
}

std::vector<ChunkSpan> iobes_to_spans(const std::vector<std::string>& tags) {
  std::vector<ChunkSpan> spans;
  bool open = false;
  ChunkSpan current;
  auto close_at = [&](std::size_t last) {
    if (!open) return;
    current.end = last;
    spans.push_back(current);
    open = false;
  };

  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    char kind = tag.size() >= 2 && tag[1] == '-' ? tag[0] : 'O';
    std::string type = kind == 'O' ? "" : tag.substr(2);
    switch (kind) {
      case 'S':
        if (open) close_at(i - 1);
        spans.push_back({i, i, type});
        break;
      case 'B':
        if (open) close_at(i - 1);
        current = {i, i, type};
        open = true;
        break;
      case 'I':
        if (!open || current.type != type) {
          if (open) close_at(i - 1);
          current = {i, i, type};
          open = true;
        }
        break;
      case 'E':
        if (open && current.type == type) {
          close_at(i);
        } else {
          if (open) close_at(i - 1);
          spans.push_back({i, i, type});
        }
        break;
      default:
        if (open) close_at(i - 1);
        break;
    }
  }
  if (open) close_at(tags.size() - 1);
  return spans;
}

PrecisionRecall chunk_f1(const std::vector<std::vector<ChunkSpan>>& gold,
                         const std::vector<std::vector<ChunkSpan>>& predicted) {
  if (gold.size() != predicted.size()) throw PreconditionError("chunk_f1: sentence counts differ");
  std::size_t n_gold = 0, n_pred = 0, n_correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    std::set<ChunkSpan> g(gold[s].begin(), gold[s].end());
    std::set<ChunkSpan> p(predicted[s].begin(), predicted[s].end());
    n_gold += g.size();
    n_pred += p.size();
    for (const auto& span : p) n_correct += g.count(span);
  }
  PrecisionRecall r;
  r.precision = n_pred ? static_cast<double>(n_correct) / n_pred : 0.0;
  r.recall = n_gold ? static_cast<double>(n_correct) / n_gold : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace jmt
