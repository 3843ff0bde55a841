#include "jmt/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "jmt/dep_parser.hpp"
#include "jmt/error.hpp"
#include "jmt/taggers.hpp"

namespace jmt {
namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Calls fn(line_number, line) for every line, without the trailing "\r".
template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    start = end + 1;
  }
}

std::optional<std::string> optional_column(const std::string& v) {
  if (v == "_") return std::nullopt;
  return v;
}

bool valid_chunk_tag(const std::string& tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I' || tag[0] == 'E' || tag[0] == 'S');
}

std::string column_or_blank(const std::optional<std::string>& v) { return v ? *v : "_"; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<AnnotatedSentence> parse_token_text(std::string_view text, const std::string& source) {
  std::vector<AnnotatedSentence> out;
  AnnotatedSentence current;
  std::vector<std::size_t> head_lines;
  auto finish = [&]() {
    if (current.tokens.empty()) return;
    const auto n = static_cast<int>(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) {
      const auto& h = current.tokens[i].head;
      if (h && (*h < 0 || *h > n)) {
        throw ParseError(source, head_lines[i], "head " + std::to_string(*h) + " outside [0, " + std::to_string(n) + "]");
      }
      if (h && *h == static_cast<int>(i + 1)) throw ParseError(source, head_lines[i], "token is its own head");
    }
    out.push_back(std::move(current));
    current = {};
    head_lines.clear();
  };
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      finish();
      return;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 5) {
      throw ParseError(source, line_no, "expected 5 tab-separated columns, found " + std::to_string(cols.size()));
    }
    Token tok;
    tok.form = cols[0];
    if (tok.form.empty()) throw ParseError(source, line_no, "empty FORM");
    tok.pos = optional_column(cols[1]);
    tok.chunk = optional_column(cols[2]);
    if (tok.chunk && !valid_chunk_tag(*tok.chunk)) {
      throw ParseError(source, line_no, "invalid IOBES tag '" + *tok.chunk + "'");
    }
    if (cols[3] != "_") {
      const char* begin = cols[3].c_str();
      char* end = nullptr;
      long v = std::strtol(begin, &end, 10);
      if (cols[3].empty() || *end != '\0') throw ParseError(source, line_no, "HEAD '" + cols[3] + "' is not an integer");
      tok.head = static_cast<int>(v);
    }
    tok.deprel = optional_column(cols[4]);
    current.tokens.push_back(std::move(tok));
    head_lines.push_back(line_no);
  });
  finish();
  return out;
}

std::vector<AnnotatedSentence> parse_token_file(const std::string& path) {
  return parse_token_text(read_text_file(path), path);
}

std::string format_token_text(const std::vector<AnnotatedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      out += t.form + '\t' + column_or_blank(t.pos) + '\t' + column_or_blank(t.chunk) + '\t' +
             (t.head ? std::to_string(*t.head) : std::string("_")) + '\t' + column_or_blank(t.deprel) + '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<SentencePair> parse_pair_text(std::string_view text, const std::string& source) {
  std::vector<SentencePair> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    auto cols = split(line, '\t');
    if (cols.size() != 5) {
      throw ParseError(source, line_no, "expected 5 tab-separated columns, found " + std::to_string(cols.size()));
    }
    SentencePair p;
    p.id = cols[0];
    p.premise = split_whitespace(cols[1]);
    p.hypothesis = split_whitespace(cols[2]);
    if (p.premise.empty() || p.hypothesis.empty()) throw ParseError(source, line_no, "empty sentence");
    if (cols[3] != "_") {
      char* end = nullptr;
      double v = std::strtod(cols[3].c_str(), &end);
      if (cols[3].empty() || *end != '\0') throw ParseError(source, line_no, "score '" + cols[3] + "' is not a number");
      if (!(v >= 1.0 && v <= 5.0)) throw ParseError(source, line_no, "score " + cols[3] + " outside [1, 5]");
      p.score = v;
    }
    if (cols[4] != "_") {
      try {
        p.label = entailment_from_string(cols[4]);
      } catch (const PreconditionError& e) {
        throw ParseError(source, line_no, e.what());
      }
    }
    if (!p.score && !p.label) throw ParseError(source, line_no, "pair has neither a score nor a label");
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<SentencePair> parse_pair_file(const std::string& path) {
  return parse_pair_text(read_text_file(path), path);
}

std::string format_pair_text(const std::vector<SentencePair>& pairs) {
  auto join = [](const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
    return s;
  };
  std::string out;
  for (const auto& p : pairs) {
    out += p.id + '\t' + join(p.premise) + '\t' + join(p.hypothesis) + '\t' +
           (p.score ? format_double(*p.score) : std::string("_")) + '\t' +
           (p.label ? std::string(entailment_name(*p.label)) : std::string("_")) + '\n';
  }
  return out;
}

void MetricReport::set(const std::string& key, double value) {
  for (auto& kv : values) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  values.emplace_back(key, value);
}

double MetricReport::get(const std::string& key) const {
  for (const auto& kv : values) {
    if (kv.first == key) return kv.second;
  }
  throw PreconditionError("metric '" + key + "' not in report");
}

bool MetricReport::has(const std::string& key) const {
  for (const auto& kv : values) {
    if (kv.first == key) return true;
  }
  return false;
}

std::string MetricReport::format() const {
  std::string out;
  for (const auto& [k, v] : values) out += k + "=" + format_metric(v) + "\n";
  return out;
}

std::string format_metric(double value) {
  if (!std::isfinite(value)) return value != value ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  if (value == std::trunc(value) && std::abs(value) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
  }
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

MetricReport evaluate_sentences(const std::vector<AnnotatedSentence>& gold,
                                const std::vector<SentencePrediction>& predicted, Task task) {
  if (gold.size() != predicted.size()) throw PreconditionError("evaluate: sentence counts differ");
  MetricReport r;
  auto check_len = [](std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) throw PreconditionError(std::string("evaluate: ") + what + " length differs from gold");
  };
  switch (task) {
    case Task::kPos: {
      std::size_t total = 0, correct = 0;
      for (std::size_t s = 0; s < gold.size(); ++s) {
        check_len(gold[s].size(), predicted[s].pos.size(), "POS prediction");
        for (std::size_t t = 0; t < gold[s].size(); ++t) {
          const auto& g = gold[s].tokens[t].pos;
          if (!g) throw PreconditionError("evaluate: gold POS missing");
          ++total;
          if (*g == predicted[s].pos[t]) ++correct;
        }
      }
      r.set("pos_accuracy", total ? static_cast<double>(correct) / total : 0.0);
      r.set("pos_tokens", static_cast<double>(total));
      break;
    }
    case Task::kChunk: {
      std::vector<std::vector<ChunkSpan>> g_spans, p_spans;
      for (std::size_t s = 0; s < gold.size(); ++s) {
        check_len(gold[s].size(), predicted[s].chunk.size(), "chunk prediction");
        std::vector<std::string> tags;
        for (const auto& t : gold[s].tokens) {
          if (!t.chunk) throw PreconditionError("evaluate: gold chunk tag missing");
          tags.push_back(*t.chunk);
        }
        g_spans.push_back(iobes_to_spans(tags));
        p_spans.push_back(iobes_to_spans(predicted[s].chunk));
      }
      PrecisionRecall pr = chunk_f1(g_spans, p_spans);
      r.set("chunk_precision", pr.precision);
      r.set("chunk_recall", pr.recall);
      r.set("chunk_f1", pr.f1);
      break;
    }
    case Task::kDep: {
      AttachmentScores total;
      for (std::size_t s = 0; s < gold.size(); ++s) {
        const auto& sent = gold[s];
        check_len(sent.size(), predicted[s].heads.size(), "head prediction");
        check_len(sent.size(), predicted[s].deprels.size(), "label prediction");
        std::vector<int> heads;
        std::vector<std::string> labels, pos;
        for (const auto& t : sent.tokens) {
          if (!t.head) throw PreconditionError("evaluate: gold head missing");
          heads.push_back(*t.head);
          labels.push_back(t.deprel.value_or("_"));
          pos.push_back(t.pos.value_or("_"));
        }
        AttachmentScores a = attachment_scores(heads, labels, predicted[s].heads, predicted[s].deprels, pos);
        total.scored += a.scored;
        total.head_correct += a.head_correct;
        total.label_correct += a.label_correct;
      }
      const double n = static_cast<double>(total.scored);
      r.set("dep_uas", total.scored ? total.head_correct / n : 0.0);
      r.set("dep_las", total.scored ? total.label_correct / n : 0.0);
      r.set("dep_tokens", n);
      break;
    }
    default:
      throw PreconditionError(std::string("task ") + task_name(task) + " is not evaluated on token files");
  }
  return r;
}

MetricReport evaluate_pairs(const std::vector<SentencePair>& gold, const std::vector<PairPrediction>& predicted,
                            Task task) {
  if (gold.size() != predicted.size()) throw PreconditionError("evaluate: pair counts differ");
  MetricReport r;
  if (task == Task::kRel) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!gold[i].score) continue;
      if (!predicted[i].score) throw PreconditionError("evaluate: missing relatedness prediction");
      const double d = *predicted[i].score - *gold[i].score;
      sum += d * d;
      ++n;
    }
    r.set("rel_mse", n ? sum / static_cast<double>(n) : 0.0);
    r.set("rel_pairs", static_cast<double>(n));
  } else if (task == Task::kEnt) {
    std::size_t n = 0, correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!gold[i].label) continue;
      if (!predicted[i].label) throw PreconditionError("evaluate: missing entailment prediction");
      ++n;
      if (*predicted[i].label == *gold[i].label) ++correct;
    }
    r.set("ent_accuracy", n ? static_cast<double>(correct) / n : 0.0);
    r.set("ent_pairs", static_cast<double>(n));
  } else {
    throw PreconditionError(std::string("task ") + task_name(task) + " is not evaluated on pair files");
  }
  return r;
}

MetricReport evaluate_model(JointModel& model, const std::vector<AnnotatedSentence>& gold, Task task) {
  if (!model.active(task)) throw UsageError(std::string("model has no active ") + task_name(task) + " layer");
  std::vector<SentencePrediction> pred;
  pred.reserve(gold.size());
  for (const auto& s : gold) pred.push_back(model.predict_sentence(s.forms()));
  return evaluate_sentences(gold, pred, task);
}

MetricReport evaluate_model(JointModel& model, const std::vector<SentencePair>& gold, Task task) {
  if (!model.active(task)) throw UsageError(std::string("model has no active ") + task_name(task) + " layer");
  std::vector<PairPrediction> pred;
  pred.reserve(gold.size());
  for (const auto& p : gold) pred.push_back(model.predict_pair(p.premise, p.hypothesis));
  return evaluate_pairs(gold, pred, task);
}

}  // namespace jmt
