#include "jmt/dep_parser.hpp"

#include <cmath>
#include <limits>

#include "jmt/error.hpp"

namespace jmt {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

DepParams add_dep_params(ParamStore& store, const std::string& prefix, std::size_t state_width,
                         std::size_t hidden, std::size_t labels, int owner_layer) {
  DepParams p;
  p.bilinear = &store.add(prefix + ".W_d", Tensor({state_width, state_width}), ParamRole::kBilinear, owner_layer);
  p.root = &store.add(prefix + ".root", Tensor({state_width}), ParamRole::kRootVector, owner_layer);
  p.labeler = add_relu_classifier(store, prefix + ".label", 2 * state_width, hidden, labels, owner_layer);
  return p;
}

NodeRef head_state(Graph& graph, std::span<const NodeRef> states, int head, const DepParams& params) {
  if (head == 0) return graph.parameter(*params.root);
  if (head < 0 || static_cast<std::size_t>(head) > states.size()) throw PreconditionError("head index out of range");
  return states[head - 1];
}

std::vector<HeadDistribution> head_distributions(Graph& graph, std::span<const NodeRef> states,
                                                 const DepParams& params) {
  const std::size_t n = states.size();
  if (n == 0) throw PreconditionError("head_distributions: empty sentence");
  NodeRef wd = graph.parameter(*params.bilinear);
  // W_d h_j for every candidate, root first.
  std::vector<NodeRef> projected(n + 1);
  projected[0] = graph.matmul(wd, graph.parameter(*params.root));
  for (std::size_t j = 1; j <= n; ++j) projected[j] = graph.matmul(wd, states[j - 1]);

  std::vector<HeadDistribution> out(n);
  for (std::size_t t = 1; t <= n; ++t) {
    std::vector<NodeRef> scores;
    HeadDistribution& d = out[t - 1];
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == t) continue;
      scores.push_back(graph.matmul(states[t - 1], projected[j]));
      d.candidates.push_back(static_cast<int>(j));
    }
    d.probs = graph.softmax(scores.size() == 1 ? scores[0] : graph.concat(scores));
  }
  return out;
}

NodeRef label_distribution(Graph& graph, NodeRef modifier, NodeRef head, const DepParams& params, double dropout,
                           Rng* rng) {
  return classify(graph, graph.concat({modifier, head}), params.labeler, dropout, rng);
}

Tensor head_probability_matrix(const Graph& graph, const std::vector<HeadDistribution>& dists) {
  const std::size_t n = dists.size();
  Tensor m({n, n + 1});
  for (std::size_t t = 0; t < n; ++t) {
    auto p = graph.value(dists[t].probs);
    for (std::size_t k = 0; k < p.size(); ++k) m.at(t, static_cast<std::size_t>(dists[t].candidates[k])) = p[k];
  }
  return m;
}

std::vector<int> greedy_heads(const Tensor& head_probs) {
  const std::size_t n = head_probs.rows();
  std::vector<int> heads(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    auto row = head_probs.row(t);
    int best = -1;
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == t + 1) continue;
      if (best < 0 || row[j] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    }
    heads[t] = best;
  }
  return heads;
}

const char* tree_check_name(TreeCheck c) {
  switch (c) {
    case TreeCheck::kOk:
      return "ok";
    case TreeCheck::kNoRoot:
      return "no_root";
    case TreeCheck::kMultipleRoots:
      return "multiple_roots";
    case TreeCheck::kCyclic:
      return "cyclic";
  }
  return "?";
}

TreeCheck check_well_formed(std::span<const int> heads) {
  const std::size_t n = heads.size();
  std::size_t roots = 0;
  for (int h : heads) {
    if (h < 0 || static_cast<std::size_t>(h) > n) throw PreconditionError("head index out of range");
    if (h == 0) ++roots;
  }
  if (roots == 0) return TreeCheck::kNoRoot;
  if (roots > 1) return TreeCheck::kMultipleRoots;
  // Every token must reach the root within n steps.
  for (std::size_t t = 1; t <= n; ++t) {
    std::size_t cur = t;
    std::size_t steps = 0;
    while (cur != 0 && steps <= n) {
      cur = static_cast<std::size_t>(heads[cur - 1]);
      ++steps;
    }
    if (cur != 0) return TreeCheck::kCyclic;
  }
  return TreeCheck::kOk;
}

std::vector<int> eisner_decode(const Tensor& scores) {
  if (scores.rank() != 2 || scores.rows() != scores.cols()) throw PreconditionError("eisner: square matrix required");
  const std::size_t L = scores.rows() - 1;
  if (L == 0) throw PreconditionError("eisner: empty sentence");

  // Spans over positions 1..L. Index [s][t]; dir 0 = head at t, 1 = head at s.
  const std::size_t N = L + 1;
  auto idx = [N](std::size_t s, std::size_t t) { return s * N + t; };
  std::vector<double> complete[2], incomplete[2];
  std::vector<std::size_t> complete_bp[2], incomplete_bp[2];
  for (int d = 0; d < 2; ++d) {
    complete[d].assign(N * N, kNegInf);
    incomplete[d].assign(N * N, kNegInf);
    complete_bp[d].assign(N * N, 0);
    incomplete_bp[d].assign(N * N, 0);
  }
  for (std::size_t s = 1; s <= L; ++s) {
    complete[0][idx(s, s)] = 0.0;
    complete[1][idx(s, s)] = 0.0;
  }

  for (std::size_t k = 1; k < L; ++k) {
    for (std::size_t s = 1; s + k <= L; ++s) {
      const std::size_t t = s + k;
      double best = kNegInf;
      std::size_t best_r = s;
      for (std::size_t r = s; r < t; ++r) {
        double v = complete[1][idx(s, r)] + complete[0][idx(r + 1, t)];
        if (v > best) {
          best = v;
          best_r = r;
        }
      }
      incomplete[0][idx(s, t)] = best + scores.at(t, s);
      incomplete_bp[0][idx(s, t)] = best_r;
      incomplete[1][idx(s, t)] = best + scores.at(s, t);
      incomplete_bp[1][idx(s, t)] = best_r;

      best = kNegInf;
      best_r = s;
      for (std::size_t r = s; r < t; ++r) {
        double v = complete[0][idx(s, r)] + incomplete[0][idx(r, t)];
        if (v > best) {
          best = v;
          best_r = r;
        }
      }
      complete[0][idx(s, t)] = best;
      complete_bp[0][idx(s, t)] = best_r;

      best = kNegInf;
      best_r = s + 1;
      for (std::size_t r = s + 1; r <= t; ++r) {
        double v = incomplete[1][idx(s, r)] + complete[1][idx(r, t)];
        if (v > best) {
          best = v;
          best_r = r;
        }
      }
      complete[1][idx(s, t)] = best;
      complete_bp[1][idx(s, t)] = best_r;
    }
  }

  double best = kNegInf;
  std::size_t root_child = 1;
  for (std::size_t m = 1; m <= L; ++m) {
    double v = scores.at(0, m) + complete[0][idx(1, m)] + complete[1][idx(m, L)];
    if (v > best) {
      best = v;
      root_child = m;
    }
  }

  std::vector<int> heads(L, 0);
  heads[root_child - 1] = 0;
  struct Item {
    bool complete;
    int dir;
    std::size_t s, t;
  };
  std::vector<Item> stack{{true, 0, 1, root_child}, {true, 1, root_child, L}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    if (it.s == it.t) continue;
    if (it.complete) {
      std::size_t r = complete_bp[it.dir][idx(it.s, it.t)];
      if (it.dir == 0) {
        stack.push_back({true, 0, it.s, r});
        stack.push_back({false, 0, r, it.t});
      } else {
        stack.push_back({false, 1, it.s, r});
        stack.push_back({true, 1, r, it.t});
      }
    } else {
      std::size_t r = incomplete_bp[it.dir][idx(it.s, it.t)];
      if (it.dir == 0) {
        heads[it.s - 1] = static_cast<int>(it.t);
      } else {
        heads[it.t - 1] = static_cast<int>(it.s);
      }
      stack.push_back({true, 1, it.s, r});
      stack.push_back({true, 0, r + 1, it.t});
    }
  }
  return heads;
}

double tree_score(const Tensor& scores, std::span<const int> heads) {
  double total = 0.0;
  for (std::size_t t = 0; t < heads.size(); ++t) total += scores.at(static_cast<std::size_t>(heads[t]), t + 1);
  return total;
}

Tensor log_score_matrix(const Tensor& head_probs) {
  const std::size_t n = head_probs.rows();
  Tensor s({n + 1, n + 1});
  for (double& v : s.values) v = kNegInf;
  for (std::size_t t = 1; t <= n; ++t) {
    for (std::size_t h = 0; h <= n; ++h) {
      if (h == t) continue;
      s.at(h, t) = std::log(head_probs.at(t - 1, h));
    }
  }
  return s;
}

ParseResult decode_heads(const Tensor& head_probs) {
  ParseResult r;
  r.heads = greedy_heads(head_probs);
  if (check_well_formed(r.heads) != TreeCheck::kOk) {
    r.heads = eisner_decode(log_score_matrix(head_probs));
    r.repaired = true;
  }
  return r;
}

ParseResult parse_sentence(Graph& graph, std::span<const NodeRef> states, const DepParams& params) {
  auto dists = head_distributions(graph, states, params);
  graph.forward();
  ParseResult r = decode_heads(head_probability_matrix(graph, dists));
  std::vector<NodeRef> label_nodes;
  for (std::size_t t = 0; t < states.size(); ++t) {
    label_nodes.push_back(label_distribution(graph, states[t], head_state(graph, states, r.heads[t], params), params));
  }
  graph.forward();
  for (NodeRef n : label_nodes) r.labels.push_back(argmax(graph.value(n)));
  return r;
}

const std::set<std::string>& default_punctuation_tags() {
  static const std::set<std::string> tags{"``", "''", ":", ",", "."};
  return tags;
}

AttachmentScores attachment_scores(std::span<const int> gold_heads, std::span<const std::string> gold_labels,
                                   std::span<const int> pred_heads, std::span<const std::string> pred_labels,
                                   std::span<const std::string> gold_pos, const std::set<std::string>& punctuation) {
  const std::size_t n = gold_heads.size();
  if (pred_heads.size() != n || gold_labels.size() != n || pred_labels.size() != n || gold_pos.size() != n) {
    throw PreconditionError("attachment_scores: token counts differ");
  }
  AttachmentScores a;
  for (std::size_t t = 0; t < n; ++t) {
    if (punctuation.count(gold_pos[t])) continue;
    ++a.scored;
    if (gold_heads[t] == pred_heads[t]) {
      ++a.head_correct;
      if (gold_labels[t] == pred_labels[t]) ++a.label_correct;
    }
  }
  if (a.scored) {
    a.uas = static_cast<double>(a.head_correct) / a.scored;
    a.las = static_cast<double>(a.label_correct) / a.scored;
  }
  return a;
}

}  // namespace jmt
