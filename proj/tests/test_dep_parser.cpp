#include <doctest.h>

#include <cmath>
#include <limits>

#include "jmt/dep_parser.hpp"
#include "jmt/error.hpp"
#include "oracles.hpp"

using namespace jmt;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Random log-probability matrix [L+1, L+1] laid out as scores.at(head, mod).
Tensor random_scores(Rng& rng, std::size_t L) {
  Tensor probs({L, L + 1});
  for (std::size_t t = 0; t < L; ++t) {
    double sum = 0.0;
    for (std::size_t h = 0; h <= L; ++h) {
      if (h == t + 1) continue;
      sum += probs.at(t, h) = rng.uniform(0.01, 1.0);
    }
    for (std::size_t h = 0; h <= L; ++h) probs.at(t, h) /= sum;
  }
  return probs;
}

oracle::Mat to_mat(const Tensor& scores) {
  oracle::Mat m(scores.rows(), oracle::Vec(scores.cols()));
  for (std::size_t r = 0; r < scores.rows(); ++r)
    for (std::size_t c = 0; c < scores.cols(); ++c) m[r][c] = scores.at(r, c);
  return m;
}

bool projective(const std::vector<int>& heads) {
  for (std::size_t a = 0; a < heads.size(); ++a)
    for (std::size_t b = 0; b < heads.size(); ++b)
      if (oracle::arcs_cross(heads[a], int(a) + 1, heads[b], int(b) + 1)) return false;
  return true;
}

struct Sentence {
  ParamStore store;
  DepParams params;
  Graph graph;
  std::vector<NodeRef> states;
};

void build(Sentence& s, Rng& rng, std::size_t L, std::size_t width, double scale) {
  s.params = add_dep_params(s.store, "dep", width, 3, 4, 3);
  for (Parameter* p : s.store.all())
    for (double& v : p->value().values) v = rng.uniform(-scale, scale);
  for (std::size_t t = 0; t < L; ++t) {
    Tensor h({width});
    for (double& v : h.values) v = rng.uniform(-1, 1);
    s.states.push_back(s.graph.constant(h));
  }
}

}  // namespace

TEST_CASE("head distribution examples") {
  ParamStore store;
  DepParams p = add_dep_params(store, "dep", 2, 2, 3, 3);
  {
    Graph g;
    std::vector<NodeRef> one{g.constant(Tensor::vector({0.5, 1}))};
    auto d = head_distributions(g, one, p);
    g.forward();
    CHECK(d[0].candidates == std::vector<int>{0});
    CHECK(g.value(d[0].probs)[0] == 1.0);
  }
  {
    Graph g;
    std::vector<NodeRef> three{g.constant(Tensor::vector({1, 0})), g.constant(Tensor::vector({0, 1})),
                               g.constant(Tensor::vector({1, 1}))};
    auto d = head_distributions(g, three, p);
    g.forward();
    CHECK(d[1].candidates == std::vector<int>{0, 1, 3});
    for (double v : g.value(d[1].probs)) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }
  {
    // W_d = I and root = 0: m(1, root) = 0, m(1, 2) = h1 . h2 = 1.
    p.bilinear->value() = Tensor({2, 2}, {1, 0, 0, 1});
    Graph g;
    std::vector<NodeRef> two{g.constant(Tensor::vector({1, 0})), g.constant(Tensor::vector({1, 0}))};
    auto d = head_distributions(g, two, p);
    g.forward();
    const double e = std::exp(1.0);
    CHECK(g.value(d[0].probs)[0] == doctest::Approx(1 / (1 + e)).epsilon(1e-12));
    CHECK(g.value(d[0].probs)[1] == doctest::Approx(e / (1 + e)).epsilon(1e-12));
    CHECK(g.value(d[0].probs)[1] == doctest::Approx(0.731059).epsilon(1e-6));
    Tensor m = head_probability_matrix(g, d);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.at(0, 1) == 0.0);
    CHECK(m.at(1, 2) == 0.0);
  }
}

TEST_CASE("head distributions sum to one and exclude self") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    Sentence s;
    std::size_t L = 1 + rng.below(7);
    build(s, rng, L, 4, 2.0);
    auto d = head_distributions(s.graph, s.states, s.params);
    s.graph.forward();
    Tensor m = head_probability_matrix(s.graph, d);
    for (std::size_t t = 0; t < L; ++t) {
      double sum = 0.0;
      for (std::size_t h = 0; h <= L; ++h) sum += m.at(t, h);
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      CHECK(m.at(t, t + 1) == 0.0);
    }
  }
}

TEST_CASE("label distribution") {
  ParamStore store;
  DepParams p = add_dep_params(store, "dep", 2, 3, 4, 3);
  Graph g;
  NodeRef a = g.constant(Tensor::vector({1, 2})), b = g.constant(Tensor::vector({-1, 0.5}));
  NodeRef u = label_distribution(g, a, b, p);
  g.forward();
  for (double v : g.value(u)) CHECK(v == 0.25);

  ParamStore one_store;
  DepParams one = add_dep_params(one_store, "dep", 2, 3, 1, 3);
  Rng rng(2);
  for (Parameter* q : one_store.all())
    for (double& v : q->value().values) v = rng.uniform(-1, 1);
  Graph g2;
  NodeRef w = label_distribution(g2, g2.constant(Tensor::vector({1, 2})), g2.constant(Tensor::vector({3, 4})), one);
  g2.forward();
  CHECK(g2.value(w)[0] == 1.0);

  // Direct re-evaluation on [h_t; h_head].
  for (Parameter* q : store.all())
    for (double& v : q->value().values) v = rng.uniform(-1, 1);
  Graph g3;
  NodeRef r = label_distribution(g3, g3.constant(Tensor::vector({1, 2})), g3.constant(Tensor::vector({-1, 0.5})), p);
  g3.forward();
  oracle::Vec x{1, 2, -1, 0.5};
  oracle::Mat wh(3, oracle::Vec(4)), wo(4, oracle::Vec(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) wh[i][j] = p.labeler.hidden_w->value().at(i, j);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) wo[i][j] = p.labeler.out_w->value().at(i, j);
  auto hid = oracle::plus(oracle::matvec(wh, x), p.labeler.hidden_b->value().values);
  for (double& v : hid) v = std::max(0.0, v);
  auto expect = oracle::softmax(oracle::plus(oracle::matvec(wo, hid), p.labeler.out_b->value().values));
  for (int k = 0; k < 4; ++k) CHECK(std::abs(g3.value(r)[k] - expect[k]) <= 1e-12);
}

TEST_CASE("greedy heads") {
  Tensor one({1, 2}, {1.0, 0.0});
  CHECK(greedy_heads(one) == std::vector<int>{0});
  // Token 1 prefers root, 2 prefers 1, 3 prefers 2.
  Tensor chain({3, 4}, {0.7, 0.0, 0.2, 0.1, 0.1, 0.8, 0.0, 0.1, 0.1, 0.1, 0.8, 0.0});
  CHECK(greedy_heads(chain) == std::vector<int>{0, 1, 2});
  Tensor tie({2, 3}, {0.5, 0.0, 0.5, 0.5, 0.5, 0.0});
  CHECK(greedy_heads(tie) == std::vector<int>{0, 0});
}

TEST_CASE("well-formedness checks") {
  CHECK(check_well_formed(std::vector<int>{0, 1, 1}) == TreeCheck::kOk);
  CHECK(check_well_formed(std::vector<int>{2, 1}) == TreeCheck::kNoRoot);
  CHECK(check_well_formed(std::vector<int>{0, 3, 2}) == TreeCheck::kCyclic);
  CHECK(check_well_formed(std::vector<int>{0, 0}) == TreeCheck::kMultipleRoots);
  // Multiple roots are reported before a cycle elsewhere.
  CHECK(check_well_formed(std::vector<int>{0, 0, 4, 3}) == TreeCheck::kMultipleRoots);
  CHECK(std::string(tree_check_name(TreeCheck::kCyclic)) == "cyclic");
  CHECK(std::string(tree_check_name(TreeCheck::kNoRoot)) == "no_root");
  CHECK(std::string(tree_check_name(TreeCheck::kMultipleRoots)) == "multiple_roots");
  CHECK(std::string(tree_check_name(TreeCheck::kOk)) == "ok");
}

TEST_CASE("eisner small cases") {
  CHECK_THROWS(eisner_decode(Tensor({1, 1})));
  Tensor one({2, 2}, {kNegInf, 0.0, kNegInf, kNegInf});
  CHECK(eisner_decode(one) == std::vector<int>{0});
  // 1 -> root and 2 -> 1 favoured.
  Tensor two({3, 3});
  two.at(0, 1) = std::log(0.9);
  two.at(0, 2) = std::log(0.2);
  two.at(1, 2) = std::log(0.8);
  two.at(2, 1) = std::log(0.1);
  CHECK(eisner_decode(two) == std::vector<int>{0, 1});
}

TEST_CASE("projective tree count oracle") {
  for (std::size_t L = 1; L <= 7; ++L) {
    oracle::Mat zero(L + 1, oracle::Vec(L + 1, 0.0));
    CHECK(oracle::best_projective_tree(zero).trees == oracle::projective_tree_count(L));
  }
  CHECK(oracle::projective_tree_count(3) == 7);
}

TEST_CASE("eisner matches exhaustive search") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t L = 2 + rng.below(7);
    Tensor scores = log_score_matrix(random_scores(rng, L));
    auto heads = eisner_decode(scores);
    auto best = oracle::best_projective_tree(to_mat(scores));
    CHECK(std::abs(tree_score(scores, heads) - best.best) <= 1e-12);
    CHECK(check_well_formed(heads) == TreeCheck::kOk);
    CHECK(projective(heads));
  }
}

TEST_CASE("eisner output is always a tree and bounded by greedy") {
  Rng rng(77);
  for (int trial = 0; trial < 10000; ++trial) {
    std::size_t L = 1 + rng.below(12);
    Tensor probs = random_scores(rng, L);
    Tensor scores = log_score_matrix(probs);
    auto heads = eisner_decode(scores);
    REQUIRE(check_well_formed(heads) == TreeCheck::kOk);
    auto greedy = greedy_heads(probs);
    double g = tree_score(scores, greedy), e = tree_score(scores, heads);
    // Greedy maximizes each token independently, so it bounds every tree;
    // when it already is a projective tree Eisner reaches it.
    CHECK(e <= g + 1e-12);
    if (check_well_formed(greedy) == TreeCheck::kOk && projective(greedy)) CHECK(std::abs(e - g) <= 1e-12);
  }
}

TEST_CASE("decode_heads repairs only broken greedy output") {
  Tensor chain({3, 4}, {0.7, 0.0, 0.2, 0.1, 0.1, 0.8, 0.0, 0.1, 0.1, 0.1, 0.8, 0.0});
  auto ok = decode_heads(chain);
  CHECK(!ok.repaired);
  CHECK(ok.heads == std::vector<int>{0, 1, 2});

  Tensor cyclic({3, 4}, {0.1, 0.0, 0.8, 0.1, 0.1, 0.8, 0.0, 0.1, 0.6, 0.1, 0.3, 0.0});
  REQUIRE(check_well_formed(greedy_heads(cyclic)) == TreeCheck::kCyclic);
  auto fixed = decode_heads(cyclic);
  CHECK(fixed.repaired);
  CHECK(check_well_formed(fixed.heads) == TreeCheck::kOk);
  CHECK(fixed.heads == eisner_decode(log_score_matrix(cyclic)));
}

TEST_CASE("parse_sentence is always well-formed") {
  Rng rng(31);
  std::size_t repaired = 0;
  const int trials = 2000;
  for (int trial = 0; trial < trials; ++trial) {
    Sentence s;
    std::size_t L = 1 + rng.below(10);
    build(s, rng, L, 4, 3.0);
    auto result = parse_sentence(s.graph, s.states, s.params);
    REQUIRE(check_well_formed(result.heads) == TreeCheck::kOk);
    CHECK(result.labels.size() == L);
    repaired += result.repaired;

    Graph g;
    std::vector<NodeRef> states;
    for (NodeRef n : s.states) states.push_back(g.constant(s.graph.value_tensor(n)));
    auto d = head_distributions(g, states, s.params);
    g.forward();
    Tensor probs = head_probability_matrix(g, d);
    auto greedy = greedy_heads(probs);
    if (result.repaired) {
      CHECK(result.heads == eisner_decode(log_score_matrix(probs)));
    } else {
      CHECK(result.heads == greedy);
    }
  }
  MESSAGE("repaired " << repaired << " of " << trials);
}

TEST_CASE("attachment scores") {
  std::vector<int> gh{0, 1, 1};
  std::vector<std::string> gl{"root", "a", "b"}, pos{"VB", "NN", "NN"};
  auto same = attachment_scores(gh, gl, gh, gl, pos);
  CHECK(same.uas == 1.0);
  CHECK(same.las == 1.0);
  std::vector<std::string> wrong{"x", "x", "x"};
  auto lab = attachment_scores(gh, gl, gh, wrong, pos);
  CHECK(lab.uas == 1.0);
  CHECK(lab.las == 0.0);

  std::vector<int> gold(10, 1), pred(10, 1);
  gold[0] = pred[0] = 0;
  std::vector<std::string> labels(10, "l"), tags(10, "NN");
  tags[4] = ",";
  tags[9] = ".";
  pred[4] = 3;  // punctuation, ignored
  pred[6] = 3;  // content token wrong
  auto r = attachment_scores(gold, labels, pred, labels, tags);
  CHECK(r.scored == 8);
  CHECK(r.uas == 0.875);

  CHECK_THROWS_AS(attachment_scores(std::vector<int>{0}, gl, gh, gl, pos), PreconditionError);
}
