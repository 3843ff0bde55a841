#include "jmt/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "jmt/error.hpp"
#include "jmt/kernels.hpp"
#include "jmt/vocab.hpp"

namespace jmt {
namespace {

double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> word_counts_as_double(const std::vector<std::size_t>& counts) {
  return {counts.begin(), counts.end()};
}

}  // namespace

NegativeSampler::NegativeSampler(std::span<const double> counts, double power) {
  cumulative_.reserve(counts.size());
  double total = 0.0;
  for (double c : counts) {
    total += std::pow(c, power);
    cumulative_.push_back(total);
  }
  if (total <= 0.0) throw PreconditionError("negative sampler: all counts are zero");
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

std::size_t NegativeSampler::draw(Rng& rng) const {
  double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
}

double NegativeSampler::probability(std::size_t id) const {
  return id == 0 ? cumulative_[0] : cumulative_[id] - cumulative_[id - 1];
}

SkipGramPairLoss skipgram_pair_loss(std::span<const double> input, std::span<const double> positive,
                                    const std::vector<std::span<const double>>& negatives) {
  const std::size_t dim = input.size();
  SkipGramPairLoss out;
  out.d_input.assign(dim, 0.0);
  out.d_positive.assign(dim, 0.0);

  // d/ds of -log s(x) is -(1 - s(x)).
  const double s_pos = kernels::dot(input, positive);
  out.loss -= log_sigmoid(s_pos);
  const double g_pos = -(1.0 - sigmoid(s_pos));
  kernels::axpy(g_pos, positive, out.d_input);
  kernels::axpy(g_pos, input, out.d_positive);

  for (auto neg : negatives) {
    const double s = kernels::dot(input, neg);
    out.loss -= log_sigmoid(-s);
    const double g = sigmoid(s);
    std::vector<double> d_neg(dim, 0.0);
    kernels::axpy(g, neg, out.d_input);
    kernels::axpy(g, input, d_neg);
    out.d_negatives.push_back(std::move(d_neg));
  }
  return out;
}

std::string SkipGramModel::key(const std::string& token) const {
  return config_.mode == SkipGramMode::kWord && config_.lowercase ? ascii_lower(token) : token;
}

SkipGramModel::SkipGramModel(const std::vector<std::string>& corpus, const SkipGramConfig& config)
    : config_(config),
      rng_(config.seed),
      sampler_(std::vector<double>{1.0}) {
  if (corpus.empty()) throw PreconditionError("skip-gram: empty corpus");
  if (config.dim == 0) throw PreconditionError("skip-gram: dim must be positive");

  std::unordered_map<std::string, std::size_t> index;
  for (const auto& token : corpus) {
    std::string k = key(token);
    auto [it, inserted] = index.emplace(k, words_.size());
    if (inserted) {
      words_.push_back(k);
      counts_.push_back(0);
    }
    ++counts_[it->second];
    corpus_ids_.push_back(it->second);
  }
  sampler_ = NegativeSampler(word_counts_as_double(counts_));

  const double bound = 0.5 / static_cast<double>(config.dim);
  if (config.mode == SkipGramMode::kWord) {
    input_ = Tensor({words_.size(), config.dim});
  } else {
    std::unordered_map<std::string, std::size_t> gram_index;
    word_ngrams_.resize(words_.size());
    for (std::size_t w = 0; w < words_.size(); ++w) {
      for (auto& g : extract_char_ngrams(words_[w], config.ngram_orders)) {
        auto [it, inserted] = gram_index.emplace(g, ngrams_.size());
        if (inserted) ngrams_.push_back(g);
        word_ngrams_[w].push_back(it->second);
      }
    }
    input_ = Tensor({ngrams_.size(), config.dim});
  }
  for (double& v : input_.values) v = rng_.uniform(-bound, bound);
  context_ = Tensor({words_.size(), config.dim});
}

std::size_t SkipGramModel::word_id(const std::string& token) const {
  auto it = std::find(words_.begin(), words_.end(), key(token));
  if (it == words_.end()) throw PreconditionError("skip-gram: unknown token " + token);
  return static_cast<std::size_t>(it - words_.begin());
}

std::vector<double> SkipGramModel::input_vector(std::size_t word) const {
  if (config_.mode == SkipGramMode::kWord) {
    auto row = input_.row(word);
    return {row.begin(), row.end()};
  }
  std::vector<double> v(config_.dim, 0.0);
  const auto& grams = word_ngrams_[word];
  for (std::size_t g : grams) kernels::axpy(1.0, input_.row(g), v);
  for (double& x : v) x /= static_cast<double>(grams.size());
  return v;
}

double SkipGramModel::pair_loss(std::size_t center, std::size_t context,
                                const std::vector<std::size_t>& negatives) const {
  std::vector<double> v = input_vector(center);
  std::vector<std::span<const double>> negs;
  for (std::size_t n : negatives) negs.push_back(context_.row(n));
  return skipgram_pair_loss(v, context_.row(context), negs).loss;
}

double SkipGramModel::step(std::size_t center, std::size_t context, const std::vector<std::size_t>& negatives,
                           double lr) {
  std::vector<double> v = input_vector(center);
  std::vector<std::span<const double>> negs;
  for (std::size_t n : negatives) negs.push_back(context_.row(n));
  SkipGramPairLoss pl = skipgram_pair_loss(v, context_.row(context), negs);

  kernels::axpy(-lr, pl.d_positive, context_.row(context));
  for (std::size_t i = 0; i < negatives.size(); ++i) kernels::axpy(-lr, pl.d_negatives[i], context_.row(negatives[i]));
  if (config_.mode == SkipGramMode::kWord) {
    kernels::axpy(-lr, pl.d_input, input_.row(center));
  } else {
    const auto& grams = word_ngrams_[center];
    const double share = -lr / static_cast<double>(grams.size());
    for (std::size_t g : grams) kernels::axpy(share, pl.d_input, input_.row(g));
  }
  return pl.loss;
}

void SkipGramModel::train() {
  const double total = static_cast<double>(corpus_ids_.size());
  const double threshold = config_.subsample * total;
  const std::size_t steps_total = std::max<std::size_t>(1, config_.epochs * corpus_ids_.size());
  std::size_t steps_done = 0;

  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    // Frequent-word subsampling with the word2vec keep probability.
    std::vector<std::size_t> kept;
    kept.reserve(corpus_ids_.size());
    for (std::size_t id : corpus_ids_) {
      if (config_.subsample > 0.0) {
        const double f = static_cast<double>(counts_[id]);
        const double keep = (std::sqrt(f / threshold) + 1.0) * threshold / f;
        if (keep < rng_.uniform()) continue;
      }
      kept.push_back(id);
    }

    for (std::size_t pos = 0; pos < kept.size(); ++pos, ++steps_done) {
      // Linear decay as in word2vec, floored at 1e-4 of the start value.
      const double lr = config_.lr * std::max(1e-4, 1.0 - static_cast<double>(steps_done) / steps_total);
      const std::size_t center = kept[pos];
      const std::size_t lo = pos >= config_.window ? pos - config_.window : 0;
      const std::size_t hi = std::min(kept.size() - 1, pos + config_.window);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == pos) continue;
        std::vector<std::size_t> negatives;
        for (std::size_t k = 0; k < config_.negatives; ++k) {
          std::size_t n = sampler_.draw(rng_);
          if (n != kept[c]) negatives.push_back(n);
        }
        step(center, kept[c], negatives, lr);
      }
    }
  }
}

EmbeddingTable SkipGramModel::input_table() const {
  EmbeddingTable table;
  table.tokens = config_.mode == SkipGramMode::kWord ? words_ : ngrams_;
  table.vectors = input_;
  return table;
}

EmbeddingTable pretrain_skipgram(const std::vector<std::string>& corpus, const SkipGramConfig& config) {
  SkipGramModel model(corpus, config);
  model.train();
  return model.input_table();
}

}  // namespace jmt
