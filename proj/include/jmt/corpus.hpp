#pragma once

// In-memory datasets and label inventories.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "jmt/semantic.hpp"

namespace jmt {

struct Token {
  std::string form;
  std::optional<std::string> pos;
  std::optional<std::string> chunk;
  std::optional<int> head;  // 0 = root
  std::optional<std::string> deprel;
  bool operator==(const Token&) const = default;
};

struct AnnotatedSentence {
  std::vector<Token> tokens;
  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> forms() const;
  bool operator==(const AnnotatedSentence&) const = default;
};

struct SentencePair {
  std::string id;
  std::vector<std::string> premise;
  std::vector<std::string> hypothesis;
  std::optional<double> score;
  std::optional<EntailmentLabel> label;
  bool operator==(const SentencePair&) const = default;
};

// Insertion-ordered string <-> index map.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(const std::vector<std::string>& names);
  std::size_t add(const std::string& name);
  std::optional<std::size_t> find(const std::string& name) const;
  // Throws PreconditionError for unknown labels.
  std::size_t id(const std::string& name) const;
  const std::string& at(std::size_t id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace jmt
