#include "jmt/vocab.hpp"

#include <algorithm>
#include <unordered_set>

#include "jmt/error.hpp"

namespace jmt {

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> extract_char_ngrams(std::string_view word, std::span<const int> orders) {
  if (word.empty()) throw PreconditionError("extract_char_ngrams: empty word");
  static const std::string kBegin = "#B#";
  static const std::string kEnd = "#E#";

  std::vector<std::string> symbols{kBegin};
  for (auto& ch : utf8_chars(word)) symbols.push_back(std::move(ch));
  symbols.push_back(kEnd);
  const std::size_t total = symbols.size();

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](std::size_t begin, std::size_t n) {
    std::string gram;
    for (std::size_t k = begin; k < begin + n; ++k) gram += symbols[k];
    if (seen.insert(gram).second) out.push_back(std::move(gram));
  };

  for (int order : orders) {
    if (order <= 0) throw PreconditionError("extract_char_ngrams: n must be positive");
    const std::size_t n = static_cast<std::size_t>(order);
    if (n == 1) {
      for (std::size_t k = 1; k + 1 < total; ++k) emit(k, 1);
      continue;
    }
    if (n > total) continue;
    for (std::size_t begin = 0; begin + n <= total; ++begin) emit(begin, n);
  }
  return out;
}

Vocabulary::Vocabulary(bool lowercase_words, std::vector<int> ngram_orders)
    : lowercase_(lowercase_words), orders_(std::move(ngram_orders)) {
  words_.emplace_back(kUnkToken);
  counts_.push_back(0);
  word_index_.emplace(std::string(kUnkToken), kUnk);
}

std::string Vocabulary::normalize(std::string_view form) const {
  return lowercase_ ? ascii_lower(form) : std::string(form);
}

void Vocabulary::add(std::string_view form) {
  if (form.empty()) throw PreconditionError("vocabulary: empty token");
  std::string key = normalize(form);
  auto it = word_index_.find(key);
  if (it == word_index_.end()) {
    word_index_.emplace(key, words_.size());
    words_.push_back(std::move(key));
    counts_.push_back(1);
  } else {
    ++counts_[it->second];
  }
  for (auto& gram : extract_char_ngrams(form, orders_)) add_ngram_entry(gram);
}

void Vocabulary::add_word_entry(std::string_view normalized, std::size_t count) {
  std::string key(normalized);
  auto it = word_index_.find(key);
  if (it != word_index_.end()) {
    counts_[it->second] = count;
    return;
  }
  word_index_.emplace(key, words_.size());
  words_.push_back(std::move(key));
  counts_.push_back(count);
}

void Vocabulary::add_ngram_entry(std::string_view ngram) {
  std::string key(ngram);
  if (ngram_index_.count(key)) return;
  ngram_index_.emplace(key, ngrams_.size());
  ngrams_.push_back(std::move(key));
}

std::optional<std::size_t> Vocabulary::find_word(std::string_view form) const {
  auto it = word_index_.find(normalize(form));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::word_id(std::string_view form) const {
  return find_word(form).value_or(kUnk);
}

std::optional<std::size_t> Vocabulary::ngram_id(std::string_view ngram) const {
  auto it = ngram_index_.find(std::string(ngram));
  if (it == ngram_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Vocabulary::known_ngram_ids(std::string_view form) const {
  std::vector<std::size_t> ids;
  if (form.empty()) return ids;
  for (const auto& gram : extract_char_ngrams(form, orders_)) {
    if (auto id = ngram_id(gram)) ids.push_back(*id);
  }
  return ids;
}

double word_dropout_probability(double frequency, double alpha) {
  if (!(frequency >= 1.0)) throw PreconditionError("word dropout: frequency must be >= 1");
  if (!(alpha >= 0.0)) throw PreconditionError("word dropout: alpha must be nonnegative");
  return alpha / (alpha + frequency);
}

bool apply_word_dropout(double frequency, double alpha, Rng& rng) {
  return rng.uniform() < word_dropout_probability(frequency, alpha);
}

}  // namespace jmt
