#pragma once

// Sentence-pair heads: max-pooled sentence vectors, relatedness as a
// distribution over five score bins, and entailment classification.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jmt/graph.hpp"
#include "jmt/params.hpp"

namespace jmt {

constexpr std::size_t kRelatednessBins = 5;
constexpr std::size_t kEntailmentClasses = 3;

enum class EntailmentLabel { kEntailment = 0, kContradiction = 1, kNeutral = 2 };
const char* entailment_name(EntailmentLabel l);
// Throws PreconditionError on unknown names.
EntailmentLabel entailment_from_string(const std::string& name);

struct MaxoutLayer {
  Parameter* w = nullptr;  // [pool * width, input]
  Parameter* b = nullptr;  // [pool * width]
  std::size_t pool = 4;
};

MaxoutLayer add_maxout_layer(ParamStore& store, const std::string& prefix, std::size_t input, std::size_t width,
                             std::size_t pool, int owner_layer);
NodeRef maxout_layer(Graph& graph, NodeRef input, const MaxoutLayer& layer);

struct SoftmaxLayer {
  Parameter* w = nullptr;
  Parameter* b = nullptr;
};

struct RelatednessParams {
  MaxoutLayer hidden;
  SoftmaxLayer out;
};

struct EntailmentParams {
  std::vector<MaxoutLayer> hidden;  // three layers
  SoftmaxLayer out;
};

RelatednessParams add_relatedness_params(ParamStore& store, const std::string& prefix, std::size_t feature_width,
                                         std::size_t hidden, std::size_t pool, int owner_layer);
EntailmentParams add_entailment_params(ParamStore& store, const std::string& prefix, std::size_t input_width,
                                       std::size_t hidden, std::size_t pool, std::size_t layers, int owner_layer);

// Elementwise max over token states.
NodeRef sentence_representation(Graph& graph, std::span<const NodeRef> states);

// [|a - b|; a * b]
NodeRef relatedness_features(Graph& graph, NodeRef a, NodeRef b);
// [a - b; a * b], a = premise.
NodeRef entailment_features(Graph& graph, NodeRef premise, NodeRef hypothesis);

// Piecewise-linear distribution over bins 1..5 whose mean is `score`.
std::array<double, kRelatednessBins> gold_score_distribution(double score);

// sum_i i * p_i with bins numbered from 1.
double expected_score(std::span<const double> probs);

struct RelatednessOutput {
  NodeRef probs;
};

RelatednessOutput relatedness_forward(Graph& graph, NodeRef d1, const RelatednessParams& params,
                                      double dropout = 0.0, Rng* rng = nullptr);
NodeRef relatedness_loss(Graph& graph, const RelatednessOutput& out, double gold_score);

// Maxout stack and softmax over the three classes.
NodeRef entailment_classifier(Graph& graph, NodeRef input, const EntailmentParams& params, double dropout = 0.0,
                              Rng* rng = nullptr);

// Classifier input is [sum_j p_j E_rel(j); d2].
NodeRef entailment_forward(Graph& graph, NodeRef d2, NodeRef relatedness_probs, Parameter& rel_labels,
                           const EntailmentParams& params, double dropout = 0.0, Rng* rng = nullptr);

}  // namespace jmt
