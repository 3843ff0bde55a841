#include "jmt/corpus.hpp"

#include "jmt/error.hpp"

namespace jmt {

std::vector<std::string> AnnotatedSentence::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.form);
  return out;
}

LabelSet::LabelSet(const std::vector<std::string>& names) {
  for (const auto& n : names) add(n);
}

std::size_t LabelSet::add(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  index_.emplace(name, names_.size());
  names_.push_back(name);
  return names_.size() - 1;
}

std::optional<std::size_t> LabelSet::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelSet::id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw PreconditionError("unknown label '" + name + "'");
  return it->second;
}

}  // namespace jmt
