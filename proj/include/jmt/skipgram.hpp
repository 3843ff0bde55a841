#pragma once

// Skip-gram with negative sampling, for pre-training word vectors or
// character n-gram vectors. In n-gram mode the input vector of a word is the
// mean of its unique n-gram vectors, while context vectors stay per-word.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jmt/embedding.hpp"
#include "jmt/rng.hpp"
#include "jmt/tensor.hpp"

namespace jmt {

enum class SkipGramMode { kWord, kCharNgram };

struct SkipGramConfig {
  SkipGramMode mode = SkipGramMode::kWord;
  std::size_t dim = 100;
  std::size_t window = 1;
  std::size_t negatives = 15;
  double subsample = 1e-5;  // 0 disables subsampling
  std::size_t epochs = 1;
  double lr = 0.025;
  std::vector<int> ngram_orders{1, 2, 3, 4};
  bool lowercase = true;  // word mode only; n-grams stay case-sensitive
  std::uint64_t seed = 1;
};

// Draws ids proportionally to count^power.
class NegativeSampler {
 public:
  NegativeSampler(std::span<const double> counts, double power = 0.75);
  std::size_t draw(Rng& rng) const;
  double probability(std::size_t id) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

struct SkipGramPairLoss {
  double loss = 0.0;
  std::vector<double> d_input;
  std::vector<double> d_positive;
  std::vector<std::vector<double>> d_negatives;
};

// -log s(v.c+) - sum_i log s(-v.c_i) and its gradient.
SkipGramPairLoss skipgram_pair_loss(std::span<const double> input, std::span<const double> positive,
                                    const std::vector<std::span<const double>>& negatives);

class SkipGramModel {
 public:
  SkipGramModel(const std::vector<std::string>& corpus, const SkipGramConfig& config);

  std::size_t vocab_size() const { return words_.size(); }
  std::size_t word_id(const std::string& token) const;
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::size_t>& corpus_ids() const { return corpus_ids_; }

  std::vector<double> input_vector(std::size_t word) const;
  double pair_loss(std::size_t center, std::size_t context, const std::vector<std::size_t>& negatives) const;
  // One SGD step on a (center, context) pair; returns the loss before the step.
  double step(std::size_t center, std::size_t context, const std::vector<std::size_t>& negatives, double lr);
  // Full training as configured.
  void train();

  // Input-side table: words in word mode, n-grams in n-gram mode.
  EmbeddingTable input_table() const;

  Tensor& context_vectors() { return context_; }
  Tensor& input_vectors() { return input_; }

 private:
  SkipGramConfig config_;
  Rng rng_;
  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> corpus_ids_;
  std::vector<std::string> ngrams_;
  std::vector<std::vector<std::size_t>> word_ngrams_;
  Tensor input_;    // words or n-grams
  Tensor context_;  // per word
  NegativeSampler sampler_;

  std::string key(const std::string& token) const;
};

EmbeddingTable pretrain_skipgram(const std::vector<std::string>& corpus, const SkipGramConfig& config);

}  // namespace jmt
