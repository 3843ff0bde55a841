#include "jmt/model.hpp"

#include <algorithm>
#include <sstream>

#include "jmt/embedding.hpp"
#include "jmt/error.hpp"

namespace jmt {
namespace {

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty() || value[0] == '-') {
    throw UsageError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw UsageError("config key '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<int> parse_orders(const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int n = static_cast<int>(parse_size("model.ngram_orders", item));
    if (n < 1) throw UsageError("n-gram orders must be positive");
    out.push_back(n);
  }
  if (out.empty()) throw UsageError("model.ngram_orders is empty");
  return out;
}

}  // namespace

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["model.embed_dim"] = std::to_string(embed_dim);
  kv["model.hidden"] = std::to_string(hidden);
  kv["model.label_dim"] = std::to_string(label_dim);
  kv["model.classifier_hidden"] = std::to_string(classifier_hidden);
  kv["model.semantic_hidden"] = std::to_string(semantic_hidden);
  kv["model.maxout_pool"] = std::to_string(maxout_pool);
  kv["model.entailment_layers"] = std::to_string(entailment_layers);
  kv["model.lowercase_words"] = lowercase_words ? "true" : "false";
  std::string orders;
  for (int n : ngram_orders) orders += (orders.empty() ? "" : ",") + std::to_string(n);
  kv["model.ngram_orders"] = orders;
  kv["wiring.shortcut"] = wiring.use_shortcut ? "true" : "false";
  kv["wiring.label_embeddings"] = wiring.use_label_embeddings ? "true" : "false";
  kv["wiring.vertical"] = wiring.use_vertical ? "true" : "false";
  kv["wiring.tasks"] = format_task_set(wiring.active);
  return kv;
}

ModelConfig ModelConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "model.embed_dim") {
      c.embed_dim = parse_size(key, value);
    } else if (key == "model.hidden") {
      c.hidden = parse_size(key, value);
    } else if (key == "model.label_dim") {
      c.label_dim = parse_size(key, value);
    } else if (key == "model.classifier_hidden") {
      c.classifier_hidden = parse_size(key, value);
    } else if (key == "model.semantic_hidden") {
      c.semantic_hidden = parse_size(key, value);
    } else if (key == "model.maxout_pool") {
      c.maxout_pool = parse_size(key, value);
    } else if (key == "model.entailment_layers") {
      c.entailment_layers = parse_size(key, value);
    } else if (key == "model.lowercase_words") {
      c.lowercase_words = parse_bool(key, value);
    } else if (key == "model.ngram_orders") {
      c.ngram_orders = parse_orders(value);
    } else if (key == "wiring.shortcut") {
      c.wiring.use_shortcut = parse_bool(key, value);
    } else if (key == "wiring.label_embeddings") {
      c.wiring.use_label_embeddings = parse_bool(key, value);
    } else if (key == "wiring.vertical") {
      c.wiring.use_vertical = parse_bool(key, value);
    } else if (key == "wiring.tasks") {
      c.wiring.active = parse_task_set(value);
    } else {
      throw UsageError("unknown model config key '" + key + "'");
    }
  }
  for (std::size_t v : {c.embed_dim, c.hidden, c.label_dim, c.classifier_hidden, c.semantic_hidden, c.maxout_pool}) {
    if (v == 0) throw UsageError("model widths must be positive");
  }
  return c;
}

std::array<bool, 5> parse_task_set(const std::string& spec) {
  std::array<bool, 5> active{};
  if (spec == "all") {
    active.fill(true);
    return active;
  }
  if (spec.empty()) throw UsageError("empty task set");
  for (char ch : spec) {
    if (ch < 'a' || ch > 'e') throw UsageError("task set '" + spec + "' must use letters a-e or 'all'");
    active[static_cast<std::size_t>(ch - 'a')] = true;
  }
  return active;
}

std::string format_task_set(const std::array<bool, 5>& active) {
  std::string s;
  for (std::size_t i = 0; i < 5; ++i) {
    if (active[i]) s += static_cast<char>('a' + i);
  }
  return s;
}

JointModel::JointModel(ModelConfig config, Vocabulary vocab, LabelSet pos, LabelSet chunk, LabelSet deprel)
    : config_(std::move(config)),
      vocab_(std::move(vocab)),
      pos_(std::move(pos)),
      chunk_(std::move(chunk)),
      deprel_(std::move(deprel)) {
  build();
}

std::size_t JointModel::input_width(Task layer) const {
  return composed_width(layer, word_width(), state_width(), config_.label_dim, config_.wiring);
}

void JointModel::build() {
  const auto& w = config_.wiring;
  if (std::none_of(w.active.begin(), w.active.end(), [](bool b) { return b; })) {
    throw PreconditionError("no active task");
  }
  const std::size_t d = config_.embed_dim;
  word_table = &store_.add("embed.words", Tensor({vocab_.word_size(), d}), ParamRole::kEmbedding, 0);
  ngram_table =
      &store_.add("embed.ngrams", Tensor({std::max<std::size_t>(1, vocab_.ngram_size()), d}), ParamRole::kEmbedding, 0);

  for (Task t : kAllTasks) {
    if (!w.is_active(t)) continue;
    const int k = depth(t);
    lstm[k - 1] = add_lstm_layer(store_, "lstm" + std::to_string(k), input_width(t), config_.hidden, k);
  }
  auto needs_labels_above = [&](Task t) {
    if (!w.use_label_embeddings) return false;
    for (Task u : kAllTasks) {
      if (depth(u) > depth(t) && depth(u) <= depth(Task::kEnt) && w.is_active(u) && w.has_label_input(u)) return true;
    }
    return false;
  };
  const std::size_t h2 = state_width();
  if (w.is_active(Task::kPos)) {
    if (pos_.empty()) throw PreconditionError("POS layer is active but the POS label set is empty");
    pos_classifier = add_relu_classifier(store_, "pos", h2, config_.classifier_hidden, pos_.size(), 1);
    if (needs_labels_above(Task::kPos)) {
      pos_embeddings = &store_.add("pos.labels", Tensor({pos_.size(), config_.label_dim}), ParamRole::kLabelEmbedding, 2);
    }
  }
  if (w.is_active(Task::kChunk)) {
    if (chunk_.empty()) throw PreconditionError("chunk layer is active but the chunk label set is empty");
    chunk_classifier = add_relu_classifier(store_, "chunk", h2, config_.classifier_hidden, chunk_.size(), 2);
    if (needs_labels_above(Task::kChunk)) {
      chunk_embeddings =
          &store_.add("chunk.labels", Tensor({chunk_.size(), config_.label_dim}), ParamRole::kLabelEmbedding, 3);
    }
  }
  if (w.is_active(Task::kDep)) {
    if (deprel_.empty()) throw PreconditionError("dependency layer is active but the label set is empty");
    dep = add_dep_params(store_, "dep", h2, config_.classifier_hidden, deprel_.size(), 3);
  }
  if (w.is_active(Task::kRel)) {
    rel = add_relatedness_params(store_, "rel", 2 * h2, config_.semantic_hidden, config_.maxout_pool, 4);
  }
  if (w.is_active(Task::kEnt)) {
    std::size_t in = 2 * h2;
    if (w.is_active(Task::kRel) && w.use_label_embeddings) {
      rel_embeddings =
          &store_.add("rel.labels", Tensor({kRelatednessBins, config_.label_dim}), ParamRole::kLabelEmbedding, 5);
      in += config_.label_dim;
    }
    ent = add_entailment_params(store_, "ent", in, config_.semantic_hidden, config_.maxout_pool,
                                config_.entailment_layers, 5);
  }
}

std::vector<NodeRef> JointModel::token_labels(Graph& graph, const Encoding& enc, Task layer, const RunContext& ctx) {
  const double rate = depth(layer) <= 3 ? ctx.rates.label_low : ctx.rates.label_high;
  const bool use_pos = depth(layer) > 1 && pos_embeddings != nullptr && !enc.pos_probs.empty();
  const bool use_chk = depth(layer) > 2 && chunk_embeddings != nullptr && !enc.chunk_probs.empty();
  std::vector<NodeRef> out;
  for (std::size_t t = 0; t < enc.words.size(); ++t) {
    std::optional<NodeRef> y;
    if (use_pos) y = weighted_label_embedding(graph, enc.pos_probs[t], *pos_embeddings);
    if (use_chk) {
      NodeRef c = weighted_label_embedding(graph, enc.chunk_probs[t], *chunk_embeddings);
      y = y ? graph.add(*y, c) : c;
    }
    if (!y) throw BuildError(std::string("label embeddings unavailable for layer ") + task_name(layer));
    out.push_back(maybe_dropout(graph, *y, rate, ctx.rng));
  }
  return out;
}

Encoding JointModel::encode(Graph& graph, std::span<const std::string> forms, Task top, const RunContext& ctx,
                            bool all_taggers) {
  if (forms.empty()) throw PreconditionError("cannot encode an empty sentence");
  const auto& w = config_.wiring;
  Encoding enc;
  WordDropout wd{ctx.rates.word_dropout_alpha, ctx.rng};
  for (const auto& f : forms) enc.words.push_back(word_representation(graph, vocab_, *word_table, *ngram_table, f, wd));

  std::optional<Task> previous;
  for (int k = 1; k <= depth(top); ++k) {
    const Task layer = static_cast<Task>(k);
    if (!w.is_active(layer)) continue;
    const double word_rate = k <= 3 ? ctx.rates.word_low : ctx.rates.word_high;
    std::vector<NodeRef> labels;
    if (w.has_label_input(layer)) labels = token_labels(graph, enc, layer, ctx);
    std::vector<NodeRef> inputs;
    for (std::size_t t = 0; t < forms.size(); ++t) {
      NodeRef x = enc.words[t];
      if (w.has_word_input(layer)) x = maybe_dropout(graph, x, word_rate, ctx.rng);
      std::optional<NodeRef> lower;
      if (w.has_vertical_input(layer)) lower = maybe_dropout(graph, enc.layer(*previous)[t], ctx.rates.vertical, ctx.rng);
      std::optional<NodeRef> label;
      if (!labels.empty()) label = labels[t];
      inputs.push_back(compose_input(graph, layer, x, lower, label, w));
    }
    enc.states[k - 1] = bilstm_run(graph, inputs, *lstm[k - 1]);
    previous = layer;

    auto wanted = [&](Task t) {
      if (all_taggers || top == t) return true;
      if (t == Task::kPos) return pos_embeddings != nullptr;
      return chunk_embeddings != nullptr;
    };
    if (layer == Task::kPos && wanted(Task::kPos)) {
      enc.pos_probs = classify_tokens(graph, enc.states[k - 1], *pos_classifier, ctx.rates.classifier, ctx.rng);
    }
    if (layer == Task::kChunk && wanted(Task::kChunk)) {
      enc.chunk_probs = classify_tokens(graph, enc.states[k - 1], *chunk_classifier, ctx.rates.classifier, ctx.rng);
    }
  }
  return enc;
}

JointModel::PairOutputs JointModel::encode_pair(Graph& graph, std::span<const std::string> premise,
                                                std::span<const std::string> hypothesis, Task top,
                                                const RunContext& ctx) {
  PairOutputs out;
  Encoding a = encode(graph, premise, top, ctx);
  Encoding b = encode(graph, hypothesis, top, ctx);
  if (rel && depth(top) >= depth(Task::kRel)) {
    NodeRef va = sentence_representation(graph, a.layer(Task::kRel));
    NodeRef vb = sentence_representation(graph, b.layer(Task::kRel));
    out.relatedness =
        relatedness_forward(graph, relatedness_features(graph, va, vb), *rel, ctx.rates.relatedness, ctx.rng).probs;
  }
  if (ent && top == Task::kEnt) {
    NodeRef va = sentence_representation(graph, a.layer(Task::kEnt));
    NodeRef vb = sentence_representation(graph, b.layer(Task::kEnt));
    NodeRef d2 = entailment_features(graph, va, vb);
    if (rel_embeddings) {
      out.entailment = entailment_forward(graph, d2, *out.relatedness, *rel_embeddings, *ent, ctx.rates.classifier, ctx.rng);
    } else {
      out.entailment = entailment_classifier(graph, d2, *ent, ctx.rates.classifier, ctx.rng);
    }
  }
  return out;
}

SentencePrediction JointModel::predict_sentence(std::span<const std::string> forms) {
  std::optional<Task> top;
  for (Task t : {Task::kPos, Task::kChunk, Task::kDep}) {
    if (active(t)) top = t;
  }
  if (!top) throw PreconditionError("model has no token-level task");
  Graph graph;
  RunContext ctx;
  Encoding enc = encode(graph, forms, *top, ctx, true);
  graph.forward();
  SentencePrediction p;
  for (NodeRef n : enc.pos_probs) p.pos.push_back(pos_.at(argmax(graph.value(n))));
  for (NodeRef n : enc.chunk_probs) p.chunk.push_back(chunk_.at(argmax(graph.value(n))));
  if (dep) {
    ParseResult r = parse_sentence(graph, enc.layer(Task::kDep), *dep);
    p.heads = r.heads;
    for (std::size_t l : r.labels) p.deprels.push_back(deprel_.at(l));
    p.repaired = r.repaired;
  }
  return p;
}

PairPrediction JointModel::predict_pair(std::span<const std::string> premise, std::span<const std::string> hypothesis) {
  if (!rel && !ent) throw PreconditionError("model has no sentence-pair task");
  Graph graph;
  RunContext ctx;
  PairOutputs out = encode_pair(graph, premise, hypothesis, ent ? Task::kEnt : Task::kRel, ctx);
  graph.forward();
  PairPrediction p;
  if (out.relatedness) {
    auto v = graph.value(*out.relatedness);
    std::copy(v.begin(), v.end(), p.bins.begin());
    p.score = expected_score(v);
  }
  if (out.entailment) {
    auto v = graph.value(*out.entailment);
    std::copy(v.begin(), v.end(), p.classes.begin());
    p.label = static_cast<EntailmentLabel>(argmax(v));
  }
  return p;
}

}  // namespace jmt
