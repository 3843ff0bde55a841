#include "jmt/semantic.hpp"

#include <cmath>

#include "jmt/error.hpp"
#include "jmt/taggers.hpp"

namespace jmt {

const char* entailment_name(EntailmentLabel l) {
  switch (l) {
    case EntailmentLabel::kEntailment:
      return "ENTAILMENT";
    case EntailmentLabel::kContradiction:
      return "CONTRADICTION";
    case EntailmentLabel::kNeutral:
      return "NEUTRAL";
  }
  return "?";
}

EntailmentLabel entailment_from_string(const std::string& name) {
  if (name == "ENTAILMENT") return EntailmentLabel::kEntailment;
  if (name == "CONTRADICTION") return EntailmentLabel::kContradiction;
  if (name == "NEUTRAL") return EntailmentLabel::kNeutral;
  throw PreconditionError("unknown entailment label '" + name + "'");
}

MaxoutLayer add_maxout_layer(ParamStore& store, const std::string& prefix, std::size_t input, std::size_t width,
                             std::size_t pool, int owner_layer) {
  if (pool == 0) throw PreconditionError("maxout pool must be positive");
  MaxoutLayer m;
  m.pool = pool;
  m.w = &store.add(prefix + ".W", Tensor({pool * width, input}), ParamRole::kClassifierWeight, owner_layer);
  m.b = &store.add(prefix + ".b", Tensor({pool * width}), ParamRole::kClassifierBias, owner_layer);
  return m;
}

NodeRef maxout_layer(Graph& graph, NodeRef input, const MaxoutLayer& layer) {
  NodeRef z = graph.add(graph.matmul(graph.parameter(*layer.w), input), graph.parameter(*layer.b));
  return graph.maxout(z, layer.pool);
}

namespace {

SoftmaxLayer add_softmax_layer(ParamStore& store, const std::string& prefix, std::size_t input, std::size_t classes,
                               int owner_layer) {
  SoftmaxLayer s;
  s.w = &store.add(prefix + ".W_out", Tensor({classes, input}), ParamRole::kSoftmaxWeight, owner_layer);
  s.b = &store.add(prefix + ".b_out", Tensor({classes}), ParamRole::kClassifierBias, owner_layer);
  return s;
}

NodeRef softmax_layer(Graph& graph, NodeRef input, const SoftmaxLayer& layer) {
  return graph.softmax(graph.add(graph.matmul(graph.parameter(*layer.w), input), graph.parameter(*layer.b)));
}

}  // namespace

RelatednessParams add_relatedness_params(ParamStore& store, const std::string& prefix, std::size_t feature_width,
                                         std::size_t hidden, std::size_t pool, int owner_layer) {
  RelatednessParams p;
  p.hidden = add_maxout_layer(store, prefix + ".hid", feature_width, hidden, pool, owner_layer);
  p.out = add_softmax_layer(store, prefix, hidden, kRelatednessBins, owner_layer);
  return p;
}

EntailmentParams add_entailment_params(ParamStore& store, const std::string& prefix, std::size_t input_width,
                                       std::size_t hidden, std::size_t pool, std::size_t layers, int owner_layer) {
  EntailmentParams p;
  std::size_t in = input_width;
  for (std::size_t i = 0; i < layers; ++i) {
    p.hidden.push_back(add_maxout_layer(store, prefix + ".hid" + std::to_string(i + 1), in, hidden, pool, owner_layer));
    in = hidden;
  }
  p.out = add_softmax_layer(store, prefix, in, kEntailmentClasses, owner_layer);
  return p;
}

NodeRef sentence_representation(Graph& graph, std::span<const NodeRef> states) {
  if (states.empty()) throw PreconditionError("sentence_representation: empty sentence");
  if (states.size() == 1) return states[0];
  return graph.row_max_pool(states);
}

NodeRef relatedness_features(Graph& graph, NodeRef a, NodeRef b) {
  return graph.concat({graph.abs(graph.subtract(a, b)), graph.mul(a, b)});
}

NodeRef entailment_features(Graph& graph, NodeRef premise, NodeRef hypothesis) {
  return graph.concat({graph.subtract(premise, hypothesis), graph.mul(premise, hypothesis)});
}

std::array<double, kRelatednessBins> gold_score_distribution(double score) {
  if (!(score >= 1.0 && score <= 5.0)) throw PreconditionError("relatedness score outside [1, 5]");
  std::array<double, kRelatednessBins> p{};
  const double floor = std::floor(score);
  const auto lower = static_cast<std::size_t>(floor);  // bin number 1..5
  if (floor == score) {
    p[lower - 1] = 1.0;
  } else {
    p[lower] = score - floor;
    p[lower - 1] = floor - score + 1.0;
  }
  return p;
}

double expected_score(std::span<const double> probs) {
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) s += static_cast<double>(i + 1) * probs[i];
  return s;
}

RelatednessOutput relatedness_forward(Graph& graph, NodeRef d1, const RelatednessParams& params, double dropout,
                                      Rng* rng) {
  NodeRef x = maybe_dropout(graph, d1, dropout, rng);
  return {softmax_layer(graph, maxout_layer(graph, x, params.hidden), params.out)};
}

NodeRef relatedness_loss(Graph& graph, const RelatednessOutput& out, double gold_score) {
  auto p = gold_score_distribution(gold_score);
  return graph.kl_divergence(out.probs, std::vector<double>(p.begin(), p.end()));
}

NodeRef entailment_forward(Graph& graph, NodeRef d2, NodeRef relatedness_probs, Parameter& rel_labels,
                           const EntailmentParams& params, double dropout, Rng* rng) {
  NodeRef x = graph.concat({weighted_label_embedding(graph, relatedness_probs, rel_labels), d2});
  return entailment_classifier(graph, x, params, dropout, rng);
}

NodeRef entailment_classifier(Graph& graph, NodeRef input, const EntailmentParams& params, double dropout, Rng* rng) {
  NodeRef x = maybe_dropout(graph, input, dropout, rng);
  for (const MaxoutLayer& layer : params.hidden) x = maxout_layer(graph, x, layer);
  return softmax_layer(graph, x, params.out);
}

}  // namespace jmt
