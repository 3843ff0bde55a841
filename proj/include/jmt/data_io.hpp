#pragma once

// Token and pair file formats plus metric computation.
//
// Token files: one token per line, tab-separated FORM POS CHUNK HEAD DEPREL,
// "_" for an absent column, a blank line after each sentence.
// Pair files: tab-separated ID PREMISE HYPOTHESIS SCORE LABEL, with the two
// texts tokenized on whitespace and "_" for an absent score or label.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jmt/corpus.hpp"
#include "jmt/encoder.hpp"
#include "jmt/model.hpp"

namespace jmt {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

std::vector<AnnotatedSentence> parse_token_text(std::string_view text, const std::string& source = "<memory>");
std::vector<AnnotatedSentence> parse_token_file(const std::string& path);
std::string format_token_text(const std::vector<AnnotatedSentence>& sentences);

std::vector<SentencePair> parse_pair_text(std::string_view text, const std::string& source = "<memory>");
std::vector<SentencePair> parse_pair_file(const std::string& path);
std::string format_pair_text(const std::vector<SentencePair>& pairs);

// Ordered key=value metrics.
struct MetricReport {
  std::vector<std::pair<std::string, double>> values;
  void set(const std::string& key, double value);
  double get(const std::string& key) const;
  bool has(const std::string& key) const;
  // One "key=value" line per metric.
  std::string format() const;
};

// Shortest round-trippable decimal; integral values keep a ".0".
std::string format_metric(double value);

MetricReport evaluate_sentences(const std::vector<AnnotatedSentence>& gold,
                                const std::vector<SentencePrediction>& predicted, Task task);
MetricReport evaluate_pairs(const std::vector<SentencePair>& gold, const std::vector<PairPrediction>& predicted,
                            Task task);

// Predicts with `model` and scores against the gold annotations.
MetricReport evaluate_model(JointModel& model, const std::vector<AnnotatedSentence>& gold, Task task);
MetricReport evaluate_model(JointModel& model, const std::vector<SentencePair>& gold, Task task);

}  // namespace jmt
