#include "jmt/embedding.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "jmt/error.hpp"

namespace jmt {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  // strtod accepts the full decimal grammar printed by %.17g.
  std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && !buf.empty();
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string format_embeddings(const EmbeddingTable& table) {
  std::string out = std::to_string(table.count()) + " " + std::to_string(table.dim()) + "\n";
  char buf[64];
  for (std::size_t r = 0; r < table.count(); ++r) {
    out += table.tokens[r];
    for (double v : table.vectors.row(r)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << format_embeddings(table);
  if (!out) throw Error("write failed: " + path);
}

EmbeddingTable parse_embeddings(std::string_view text, const std::string& source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError(source, 1, "missing header");
  auto header = split_spaces(line);
  std::size_t count = 0, dim = 0;
  if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim) || dim == 0) {
    throw ParseError(source, line_no, "header must be \"count dim\"");
  }

  EmbeddingTable table;
  table.tokens.reserve(count);
  std::vector<double> values;
  values.reserve(count * dim);
  while (next_line(line)) {
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (table.tokens.size() == count) throw ParseError(source, line_no, "more entries than header count");
    if (fields.size() != dim + 1) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(dim) + " values, got " + std::to_string(fields.size() - 1));
    }
    table.tokens.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0;
      if (!parse_double(fields[k], v)) throw ParseError(source, line_no, "bad number: " + std::string(fields[k]));
      values.push_back(v);
    }
  }
  if (table.tokens.size() != count) {
    throw ParseError(source, line_no,
                     "header declares " + std::to_string(count) + " entries, found " +
                         std::to_string(table.tokens.size()));
  }
  if (count == 0) throw ParseError(source, 1, "empty embedding table");
  table.vectors = Tensor({count, dim}, std::move(values));
  return table;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_embeddings(ss.str(), path);
}

std::vector<double> char_word_embedding(std::string_view form, const Vocabulary& vocab,
                                        const Tensor& ngram_vectors) {
  const std::size_t dim = ngram_vectors.cols();
  std::vector<double> out(dim, 0.0);
  auto ids = vocab.known_ngram_ids(form);
  if (ids.empty()) return out;
  for (std::size_t id : ids) {
    auto row = ngram_vectors.row(id);
    for (std::size_t k = 0; k < dim; ++k) out[k] += row[k];
  }
  for (double& v : out) v /= static_cast<double>(ids.size());
  return out;
}

NodeRef char_word_embedding(Graph& graph, Parameter& ngram_table, const std::vector<std::size_t>& ids) {
  const std::size_t dim = ngram_table.value().cols();
  if (ids.empty()) return graph.constant(Tensor::zeros({dim}));
  std::vector<NodeRef> rows;
  rows.reserve(ids.size());
  for (std::size_t id : ids) rows.push_back(graph.parameter_row(ngram_table, id));
  NodeRef sum = rows.size() == 1 ? rows[0] : graph.add(rows);
  return graph.scale(sum, 1.0 / static_cast<double>(ids.size()));
}

NodeRef word_representation(Graph& graph, const Vocabulary& vocab, Parameter& word_table,
                            Parameter& ngram_table, std::string_view form, const WordDropout& dropout) {
  std::size_t id = vocab.word_id(form);
  if (id != Vocabulary::kUnk && dropout.rng && dropout.alpha > 0.0 &&
      apply_word_dropout(static_cast<double>(std::max<std::size_t>(1, vocab.frequency(id))), dropout.alpha,
                         *dropout.rng)) {
    id = Vocabulary::kUnk;
  }
  NodeRef word = graph.parameter_row(word_table, id);
  NodeRef chars = char_word_embedding(graph, ngram_table, vocab.known_ngram_ids(form));
  return graph.concat({word, chars});
}

std::size_t copy_pretrained_rows(const EmbeddingTable& source, const std::vector<std::string>& target_tokens,
                                 Tensor& target) {
  if (source.dim() != target.cols()) {
    throw PreconditionError("pretrained width " + std::to_string(source.dim()) + " != model width " +
                            std::to_string(target.cols()));
  }
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t r = 0; r < source.count(); ++r) index.emplace(source.tokens[r], r);
  std::size_t copied = 0;
  for (std::size_t r = 0; r < target_tokens.size(); ++r) {
    auto it = index.find(target_tokens[r]);
    if (it == index.end()) continue;
    auto src = source.vectors.row(it->second);
    std::copy(src.begin(), src.end(), target.row(r).begin());
    ++copied;
  }
  return copied;
}

}  // namespace jmt
