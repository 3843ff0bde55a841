#pragma once

// Head selection with a bilinear matching function, dependency labelling,
// greedy decoding and first-order Eisner repair.
//
// Heads use CoNLL indexing: tokens are 1..L and 0 is the root.

#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "jmt/graph.hpp"
#include "jmt/params.hpp"
#include "jmt/taggers.hpp"
#include "jmt/tensor.hpp"

namespace jmt {

struct DepParams {
  Parameter* bilinear = nullptr;  // W_d [2h, 2h]
  Parameter* root = nullptr;      // r [2h]
  ReluClassifier labeler;         // over [h_t; h_head]
};

DepParams add_dep_params(ParamStore& store, const std::string& prefix, std::size_t state_width,
                         std::size_t hidden, std::size_t labels, int owner_layer);

// Softmax over the candidate heads of one modifier.
struct HeadDistribution {
  NodeRef probs;
  std::vector<int> candidates;  // head index of each entry, root (0) first
};

// One distribution per token t = 1..L over {root, 1..L} \ {t}, with scores
// m(t, j) = h_t . (W_d h_j) and h_root = r.
std::vector<HeadDistribution> head_distributions(Graph& graph, std::span<const NodeRef> states,
                                                 const DepParams& params);

// State of head `head` (0 = root vector).
NodeRef head_state(Graph& graph, std::span<const NodeRef> states, int head, const DepParams& params);

NodeRef label_distribution(Graph& graph, NodeRef modifier, NodeRef head, const DepParams& params,
                           double dropout = 0.0, Rng* rng = nullptr);

// Dense [L, L+1] matrix: row t-1 holds p(head | t) for heads 0..L, self = 0.
Tensor head_probability_matrix(const Graph& graph, const std::vector<HeadDistribution>& dists);

// Per-token argmax head, lowest index on ties.
std::vector<int> greedy_heads(const Tensor& head_probs);

enum class TreeCheck { kOk, kNoRoot, kMultipleRoots, kCyclic };
const char* tree_check_name(TreeCheck c);
TreeCheck check_well_formed(std::span<const int> heads);

// Maximum-score projective tree with exactly one child of the root.
// scores is [L+1, L+1] with scores.at(head, modifier); the diagonal and the
// modifier-0 column are ignored. Returns heads for tokens 1..L.
std::vector<int> eisner_decode(const Tensor& scores);

// sum_t scores(head_t, t)
double tree_score(const Tensor& scores, std::span<const int> heads);

// log p(head | modifier) laid out for eisner_decode.
Tensor log_score_matrix(const Tensor& head_probs);

struct ParseResult {
  std::vector<int> heads;
  std::vector<std::size_t> labels;
  bool repaired = false;
};

// Greedy heads, replaced by the Eisner tree when they do not form a
// single-rooted tree. Labels are left empty.
ParseResult decode_heads(const Tensor& head_probs);

// Full decoding on an encoded sentence: greedy heads, Eisner repair when
// needed, then labels predicted for the final heads.
ParseResult parse_sentence(Graph& graph, std::span<const NodeRef> states, const DepParams& params);

struct AttachmentScores {
  double uas = 0.0;
  double las = 0.0;
  std::size_t scored = 0;
  std::size_t head_correct = 0;
  std::size_t label_correct = 0;
};

const std::set<std::string>& default_punctuation_tags();

// Tokens whose gold POS is in `punctuation` are skipped.
AttachmentScores attachment_scores(std::span<const int> gold_heads, std::span<const std::string> gold_labels,
                                   std::span<const int> pred_heads, std::span<const std::string> pred_labels,
                                   std::span<const std::string> gold_pos,
                                   const std::set<std::string>& punctuation = default_punctuation_tags());

}  // namespace jmt
