#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jmt/graph.hpp"
#include "jmt/params.hpp"
#include "jmt/rng.hpp"
#include "jmt/tensor.hpp"
#include "jmt/vocab.hpp"

namespace jmt {

// Token -> vector table as stored on disk.
//
// Text format: first line "count dim", then one line per entry with the
// token followed by dim space-separated decimals (17 significant digits).
struct EmbeddingTable {
  std::vector<std::string> tokens;
  Tensor vectors;  // [count, dim]

  std::size_t dim() const { return vectors.cols(); }
  std::size_t count() const { return tokens.size(); }
};

void save_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embeddings(const std::string& path);
// Stream variants used by tests.
std::string format_embeddings(const EmbeddingTable& table);
EmbeddingTable parse_embeddings(std::string_view text, const std::string& source = "<memory>");

// Plain mean of the known n-gram vectors of `form`; zero when none is known.
std::vector<double> char_word_embedding(std::string_view form, const Vocabulary& vocab,
                                        const Tensor& ngram_vectors);

// Graph version of the above. Returns a zero constant of width `dim` when the
// word has no known n-gram.
NodeRef char_word_embedding(Graph& graph, Parameter& ngram_table, const std::vector<std::size_t>& ids);

struct WordDropout {
  double alpha = 0.25;
  Rng* rng = nullptr;  // null disables word-dropout
};

// [word vector; character embedding]. Unknown words use the UNK row; in
// training mode a known word may also be swapped for UNK by word-dropout.
NodeRef word_representation(Graph& graph, const Vocabulary& vocab, Parameter& word_table,
                            Parameter& ngram_table, std::string_view form, const WordDropout& dropout);

// Copies rows of `source` into `target` for every token present in both.
// Returns the number of rows copied. Widths must agree.
std::size_t copy_pretrained_rows(const EmbeddingTable& source, const std::vector<std::string>& target_tokens,
                                 Tensor& target);

}  // namespace jmt
