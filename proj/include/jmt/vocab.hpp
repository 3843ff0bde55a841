#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jmt/rng.hpp"

namespace jmt {

// Splits UTF-8 text into code points (each returned as its byte sequence).
std::vector<std::string> utf8_chars(std::string_view text);

// ASCII lowercasing; other bytes pass through unchanged.
std::string ascii_lower(std::string_view text);

// Unique character n-grams of `word` for each order in `orders`, in order of
// first occurrence. The word is read as the symbol sequence
// #B# c1 ... cL #E#; unigrams never include a boundary symbol, and an n-gram
// with n >= 2 is any window over that sequence with at least one character.
// "Cat" with orders {1,2,3} yields
// C a t #B#C Ca at t#E# #B#Ca Cat at#E#.
std::vector<std::string> extract_char_ngrams(std::string_view word, std::span<const int> orders);

// Word and character n-gram index maps built from training text. Word id 0
// is reserved for the unknown word.
class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  explicit Vocabulary(bool lowercase_words = true, std::vector<int> ngram_orders = {2, 3, 4});

  // Counts one occurrence of a surface form and registers its n-grams.
  void add(std::string_view form);
  // Registers a word without counting it (used when restoring a model).
  void add_word_entry(std::string_view normalized, std::size_t count);
  void add_ngram_entry(std::string_view ngram);

  std::string normalize(std::string_view form) const;
  std::size_t word_id(std::string_view form) const;
  std::optional<std::size_t> find_word(std::string_view form) const;
  std::size_t frequency(std::size_t word_id) const { return counts_[word_id]; }
  std::optional<std::size_t> ngram_id(std::string_view ngram) const;
  // Unique in-vocabulary n-gram ids of the (case-sensitive) surface form.
  std::vector<std::size_t> known_ngram_ids(std::string_view form) const;

  std::size_t word_size() const { return words_.size(); }
  std::size_t ngram_size() const { return ngrams_.size(); }
  const std::string& word_at(std::size_t id) const { return words_[id]; }
  const std::string& ngram_at(std::size_t id) const { return ngrams_[id]; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& ngrams() const { return ngrams_; }
  bool lowercase_words() const { return lowercase_; }
  const std::vector<int>& ngram_orders() const { return orders_; }

 private:
  bool lowercase_;
  std::vector<int> orders_;
  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::vector<std::string> ngrams_;
  std::unordered_map<std::string, std::size_t> ngram_index_;
};

// alpha / (alpha + frequency). Requires frequency >= 1 and alpha > 0.
double word_dropout_probability(double frequency, double alpha);
// True when the word vector should be replaced by the unknown-word vector.
bool apply_word_dropout(double frequency, double alpha, Rng& rng);

}  // namespace jmt
