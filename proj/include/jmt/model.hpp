#pragma once

// The joint model: shared embeddings, five stacked bi-LSTM layers (only the
// active ones are built) and the task heads on top of them.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jmt/corpus.hpp"
#include "jmt/dep_parser.hpp"
#include "jmt/encoder.hpp"
#include "jmt/graph.hpp"
#include "jmt/params.hpp"
#include "jmt/rng.hpp"
#include "jmt/semantic.hpp"
#include "jmt/taggers.hpp"
#include "jmt/vocab.hpp"

namespace jmt {

struct ModelConfig {
  std::size_t embed_dim = 100;  // word and character tables each
  std::size_t hidden = 100;     // per LSTM direction
  std::size_t label_dim = 100;
  std::size_t classifier_hidden = 100;
  std::size_t semantic_hidden = 100;
  std::size_t maxout_pool = 4;
  std::size_t entailment_layers = 3;
  bool lowercase_words = true;
  std::vector<int> ngram_orders{2, 3, 4};
  LayerWiring wiring;

  std::map<std::string, std::string> to_key_values() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static ModelConfig from_key_values(const std::map<std::string, std::string>& kv);
};

// "abc" / "de" / "all" -> active flags.
std::array<bool, 5> parse_task_set(const std::string& spec);
std::string format_task_set(const std::array<bool, 5>& active);

struct DropoutRates {
  double vertical = 0.2;
  double word_low = 0.4;   // word representations feeding layers 1-3
  double word_high = 0.2;  // layers 4-5
  double label_low = 0.4;
  double label_high = 0.2;
  double classifier = 0.2;
  double relatedness = 0.4;
  double word_dropout_alpha = 0.25;
};

// Training passes an rng; inference leaves it null and disables every form
// of dropout.
struct RunContext {
  Rng* rng = nullptr;
  DropoutRates rates;
};

struct Encoding {
  std::vector<NodeRef> words;
  std::array<std::vector<NodeRef>, 5> states;  // empty for layers not built
  std::vector<NodeRef> pos_probs;
  std::vector<NodeRef> chunk_probs;
  const std::vector<NodeRef>& layer(Task t) const { return states[depth(t) - 1]; }
};

struct SentencePrediction {
  std::vector<std::string> pos;
  std::vector<std::string> chunk;
  std::vector<int> heads;
  std::vector<std::string> deprels;
  bool repaired = false;
};

struct PairPrediction {
  std::optional<double> score;
  std::array<double, kRelatednessBins> bins{};
  std::optional<EntailmentLabel> label;
  std::array<double, kEntailmentClasses> classes{};
};

class JointModel {
 public:
  JointModel(ModelConfig config, Vocabulary vocab, LabelSet pos, LabelSet chunk, LabelSet deprel);
  JointModel(const JointModel&) = delete;
  JointModel& operator=(const JointModel&) = delete;
  JointModel(JointModel&&) = default;

  const ModelConfig& config() const { return config_; }
  const LayerWiring& wiring() const { return config_.wiring; }
  bool active(Task t) const { return config_.wiring.is_active(t); }
  const Vocabulary& vocab() const { return vocab_; }
  const LabelSet& pos_labels() const { return pos_; }
  const LabelSet& chunk_labels() const { return chunk_; }
  const LabelSet& dep_labels() const { return deprel_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  std::size_t word_width() const { return 2 * config_.embed_dim; }
  std::size_t state_width() const { return 2 * config_.hidden; }
  // Width of g_t feeding `layer`.
  std::size_t input_width(Task layer) const;

  // Builds the token-level network up to `top` (inclusive). Tag
  // distributions are added where label embeddings need them, at `top`, or
  // for every active tagger when `all_taggers` is set.
  Encoding encode(Graph& graph, std::span<const std::string> forms, Task top, const RunContext& ctx,
                  bool all_taggers = false);
  // Runs both sentences up to `top` and the pair heads that lie at or below
  // it. The relatedness bins feed the entailment head when label embeddings
  // are on and the relatedness layer is active.
  struct PairOutputs {
    std::optional<NodeRef> relatedness;
    std::optional<NodeRef> entailment;
  };
  PairOutputs encode_pair(Graph& graph, std::span<const std::string> premise,
                          std::span<const std::string> hypothesis, Task top, const RunContext& ctx);

  SentencePrediction predict_sentence(std::span<const std::string> forms);
  PairPrediction predict_pair(std::span<const std::string> premise, std::span<const std::string> hypothesis);

  Parameter* word_table = nullptr;
  Parameter* ngram_table = nullptr;
  std::array<std::optional<LstmLayerParams>, 5> lstm;
  std::optional<ReluClassifier> pos_classifier;
  std::optional<ReluClassifier> chunk_classifier;
  Parameter* pos_embeddings = nullptr;
  Parameter* chunk_embeddings = nullptr;
  Parameter* rel_embeddings = nullptr;
  std::optional<DepParams> dep;
  std::optional<RelatednessParams> rel;
  std::optional<EntailmentParams> ent;

 private:
  void build();
  std::vector<NodeRef> token_labels(Graph& graph, const Encoding& enc, Task layer, const RunContext& ctx);

  ModelConfig config_;
  Vocabulary vocab_;
  LabelSet pos_, chunk_, deprel_;
  ParamStore store_;
};

}  // namespace jmt
