#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "jmt/encoder.hpp"
#include "jmt/error.hpp"
#include "oracles.hpp"

using namespace jmt;

namespace {

void randomize(LstmDirection& d, Rng& rng) {
  for (Parameter* p : {d.w_i, d.w_f, d.w_o, d.w_u, d.b_i, d.b_f, d.b_o, d.b_u}) {
    for (double& v : p->value().values) v = rng.uniform(-0.8, 0.8);
  }
}

oracle::LstmWeights to_oracle(const LstmDirection& d) {
  auto mat = [](const Parameter* p) {
    oracle::Mat m(p->value().rows(), oracle::Vec(p->value().cols()));
    for (std::size_t r = 0; r < m.size(); ++r)
      for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] = p->value().at(r, c);
    return m;
  };
  auto vec = [](const Parameter* p) { return p->value().values; };
  return {mat(d.w_i), mat(d.w_f), mat(d.w_o), mat(d.w_u), vec(d.b_i), vec(d.b_f), vec(d.b_o), vec(d.b_u)};
}

LstmState zero_state(Graph& g, std::size_t h) { return {g.constant(Tensor({h})), g.constant(Tensor({h}))}; }

}  // namespace

TEST_CASE("lstm_step with zero weights") {
  ParamStore s;
  auto layer = add_lstm_layer(s, "l", 2, 1, 1);
  Graph g;
  LstmState out = lstm_step(g, g.constant(Tensor::vector({0.3, -0.2})), zero_state(g, 1), layer.forward);
  g.forward();
  CHECK(g.value(out.h)[0] == 0.0);

  layer.forward.b_f->value()[0] = 1.0;
  Graph g2;
  LstmState prev{g2.constant(Tensor::vector({0.0})), g2.constant(Tensor::vector({1.0}))};
  LstmState next = lstm_step(g2, g2.constant(Tensor::vector({0.0, 0.0})), prev, layer.forward);
  g2.forward();
  CHECK(g2.value(next.c)[0] == doctest::Approx(0.731059).epsilon(1e-6));
  // 0.5 * tanh(sigma(1)), computed independently.
  CHECK(g2.value(next.h)[0] == doctest::Approx(0.5 * std::tanh(1.0 / (1.0 + std::exp(-1.0)))).epsilon(1e-12));
  CHECK(g2.value(next.h)[0] == doctest::Approx(0.311856).epsilon(1e-6));
}

TEST_CASE("lstm_step rejects mismatched widths") {
  ParamStore s;
  auto layer = add_lstm_layer(s, "l", 2, 3, 1);
  Graph g;
  CHECK_THROWS_AS(lstm_step(g, g.constant(Tensor({3})), zero_state(g, 3), layer.forward), BuildError);
  CHECK_THROWS_AS(lstm_step(g, g.constant(Tensor({2})), zero_state(g, 2), layer.forward), BuildError);
}

TEST_CASE("lstm_step gradients match finite differences") {
  Rng rng(21);
  ParamStore s;
  auto layer = add_lstm_layer(s, "l", 3, 2, 1);
  randomize(layer.forward, rng);
  Parameter& x = s.add("x", Tensor::vector({0.5, -0.4, 0.9}), ParamRole::kClassifierBias, 1);
  Graph g;
  LstmState st = lstm_step(g, g.parameter(x), zero_state(g, 2), layer.forward);
  st = lstm_step(g, g.parameter(x), st, layer.forward);
  NodeRef loss = g.matmul(st.h, g.constant(Tensor::vector({1.3, -0.7})));
  g.forward();
  CHECK(check_gradients(g, loss) < 1e-4);
}

TEST_CASE("bilstm_run matches a step-by-step simulation") {
  Rng rng(13);
  ParamStore s;
  auto layer = add_lstm_layer(s, "l", 2, 3, 1);
  randomize(layer.forward, rng);
  randomize(layer.backward, rng);
  std::vector<oracle::Vec> xs{{0.1, 0.2}, {-0.5, 0.3}, {0.9, -0.1}};
  Graph g;
  std::vector<NodeRef> inputs;
  for (auto& x : xs) inputs.push_back(g.constant(Tensor::vector(x)));
  auto out = bilstm_run(g, inputs, layer);
  g.forward();

  auto fw = to_oracle(layer.forward), bw = to_oracle(layer.backward);
  std::vector<oracle::Vec> fh(3), bh(3);
  oracle::Vec h(3, 0.0), c(3, 0.0);
  for (std::size_t t = 0; t < 3; ++t) {
    oracle::lstm_step(fw, xs[t], h, c);
    fh[t] = h;
  }
  h.assign(3, 0.0);
  c.assign(3, 0.0);
  for (std::size_t t = 3; t-- > 0;) {
    oracle::lstm_step(bw, xs[t], h, c);
    bh[t] = h;
  }
  for (std::size_t t = 0; t < 3; ++t) {
    REQUIRE(g.shape(out[t]) == Shape{6});
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(g.value(out[t])[k] == doctest::Approx(fh[t][k]).epsilon(1e-12));
      CHECK(g.value(out[t])[3 + k] == doctest::Approx(bh[t][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("single-token bilstm and palindrome symmetry") {
  Rng rng(14);
  ParamStore s;
  auto layer = add_lstm_layer(s, "l", 2, 2, 1);
  randomize(layer.forward, rng);
  {
    Graph g;
    std::vector<NodeRef> one{g.constant(Tensor::vector({0.4, 0.1}))};
    auto out = bilstm_run(g, one, layer);
    CHECK(g.shape(out[0]) == Shape{4});
  }
  // Copy forward weights into the backward direction.
  const LstmDirection& f = layer.forward;
  LstmDirection& b = layer.backward;
  b.w_i->value() = f.w_i->value();
  b.w_f->value() = f.w_f->value();
  b.w_o->value() = f.w_o->value();
  b.w_u->value() = f.w_u->value();
  b.b_i->value() = f.b_i->value();
  b.b_f->value() = f.b_f->value();
  b.b_o->value() = f.b_o->value();
  b.b_u->value() = f.b_u->value();
  Graph g;
  std::vector<Tensor> xs{Tensor::vector({1, 0}), Tensor::vector({0, 1}), Tensor::vector({0.5, 0.5}),
                         Tensor::vector({0, 1}), Tensor::vector({1, 0})};
  std::vector<NodeRef> inputs;
  for (auto& x : xs) inputs.push_back(g.constant(x));
  auto out = bilstm_run(g, inputs, layer);
  g.forward();
  const std::size_t L = xs.size();
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t k = 0; k < 2; ++k) CHECK(g.value(out[t])[k] == g.value(out[L - 1 - t])[2 + k]);
  }
}

TEST_CASE("composed input widths") {
  LayerWiring all;
  // Lower state of width 100, word 200, labels 100.
  CHECK(composed_width(Task::kChunk, 200, 100, 100, all) == 400);
  // With bi-LSTM outputs of 2h = 200 the lower part doubles.
  CHECK(composed_width(Task::kChunk, 200, 200, 100, all) == 500);
  CHECK(composed_width(Task::kPos, 200, 200, 100, all) == 200);
  LayerWiring no_sc = all;
  no_sc.use_shortcut = false;
  CHECK(composed_width(Task::kDep, 200, 200, 100, all) - composed_width(Task::kDep, 200, 200, 100, no_sc) == 200);
  CHECK(composed_width(Task::kPos, 200, 200, 100, no_sc) == 200);
  LayerWiring no_vc = all;
  no_vc.use_vertical = false;
  CHECK(composed_width(Task::kRel, 200, 200, 100, no_vc) == 300);
  LayerWiring only_de;
  only_de.active = {false, false, false, true, true};
  CHECK(composed_width(Task::kRel, 200, 200, 100, only_de) == 200);
  CHECK(composed_width(Task::kEnt, 200, 200, 100, only_de) == 400);
  CHECK(only_de.lower_active(Task::kEnt) == Task::kRel);
  CHECK(!only_de.lower_active(Task::kRel).has_value());
  // Everything off above layer 1 still keeps the word input.
  LayerWiring bare = no_sc;
  bare.use_vertical = false;
  bare.use_label_embeddings = false;
  CHECK(composed_width(Task::kEnt, 200, 200, 100, bare) == 200);
}

TEST_CASE("compose_input order and missing components") {
  LayerWiring w;
  Graph g;
  NodeRef x = g.constant(Tensor::vector({1, 2}));
  NodeRef lower = g.constant(Tensor::vector({3}));
  NodeRef label = g.constant(Tensor::vector({4, 5}));
  NodeRef in = compose_input(g, Task::kChunk, x, lower, label, w);
  g.forward();
  CHECK(g.value_tensor(in).values == std::vector<double>{3, 1, 2, 4, 5});
  NodeRef first = compose_input(g, Task::kPos, x, std::nullopt, std::nullopt, w);
  g.forward();
  CHECK(g.value_tensor(first).values == std::vector<double>{1, 2});
  CHECK_THROWS_AS(compose_input(g, Task::kChunk, x, std::nullopt, label, w), BuildError);
  CHECK_THROWS_AS(compose_input(g, Task::kChunk, x, lower, std::nullopt, w), BuildError);
}

TEST_CASE("layer 3 label term with one-hot POS and zero chunk probabilities") {
  Parameter pos("pos.labels", Tensor({3, 2}, {1, 2, 3, 4, 5, 6}), ParamRole::kLabelEmbedding, 2);
  Parameter chk("chunk.labels", Tensor({2, 2}, {7, 8, 9, 10}), ParamRole::kLabelEmbedding, 3);
  Graph g;
  NodeRef y = g.add(g.matmul(g.constant(Tensor::vector({0, 1, 0})), g.parameter(pos)),
                    g.matmul(g.constant(Tensor::vector({0, 0})), g.parameter(chk)));
  g.forward();
  CHECK(g.value_tensor(y).values == std::vector<double>{3, 4});
}

TEST_CASE("encoding has no cross-sentence state") {
  auto data = fixture::data();
  JointModel m = fixture::random_model(fixture::tiny_config(), data, 3);
  RunContext ctx;
  std::vector<std::string> a{"the", "dog", "sees"}, b{"a", "big", "man", "runs"};
  Graph alone;
  Encoding ea = m.encode(alone, a, Task::kEnt, ctx);
  alone.forward();
  Graph both;
  m.encode(both, b, Task::kEnt, ctx);
  Encoding eb = m.encode(both, a, Task::kEnt, ctx);
  both.forward();
  for (std::size_t t = 0; t < a.size(); ++t) {
    auto x = alone.value(ea.layer(Task::kEnt)[t]);
    auto y = both.value(eb.layer(Task::kEnt)[t]);
    CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
  }
}

TEST_CASE("five-layer gradient check for every wiring") {
  auto data = fixture::data();
  for (int flags = 0; flags < 8; ++flags) {
    CAPTURE(flags);
    ModelConfig cfg = fixture::tiny_config(2);
    cfg.wiring.use_shortcut = flags & 1;
    cfg.wiring.use_label_embeddings = flags & 2;
    cfg.wiring.use_vertical = flags & 4;
    JointModel m = fixture::random_model(cfg, data, 40 + flags);
    Graph g;
    RunContext ctx;
    std::vector<std::string> forms{"dog", "runs"};
    Encoding enc = m.encode(g, forms, Task::kEnt, ctx);
    std::vector<NodeRef> parts;
    Rng rng(flags);
    for (NodeRef h : enc.layer(Task::kEnt)) {
      Tensor c({g.shape(h)[0]});
      for (double& v : c.values) v = rng.uniform(-1, 1);
      parts.push_back(g.matmul(h, g.constant(c)));
    }
    NodeRef loss = g.add(parts);
    g.forward();
    CHECK(check_gradients(g, loss) < 1e-4);
  }
}
