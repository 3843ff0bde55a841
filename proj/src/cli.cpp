#include "jmt/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "jmt/archive.hpp"
#include "jmt/data_io.hpp"
#include "jmt/error.hpp"
#include "jmt/model.hpp"
#include "jmt/skipgram.hpp"
#include "jmt/trainer.hpp"

namespace jmt {
namespace {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level_from_env() {
  const char* v = std::getenv("JMT_LOG_LEVEL");
  if (!v || !*v) return LogLevel::kInfo;
  std::string s(v);
  if (s == "error") return LogLevel::kError;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  throw UsageError("JMT_LOG_LEVEL must be error, info or debug (got '" + s + "')");
}

struct Logger {
  std::ostream& err;
  LogLevel level;
  void info(const std::string& msg) const {
    if (level >= LogLevel::kInfo) err << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level >= LogLevel::kDebug) err << msg << '\n';
  }
};

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void split_config(const std::map<std::string, std::string>& kv, std::map<std::string, std::string>& model_kv,
                  std::map<std::string, std::string>& train_kv) {
  for (const auto& [k, v] : kv) {
    if (k.rfind("train.", 0) == 0) {
      train_kv[k] = v;
    } else {
      model_kv[k] = v;
    }
  }
}

std::vector<std::string> read_corpus_tokens(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> tokens;
  std::string w;
  while (in >> w) tokens.push_back(w);
  return tokens;
}

struct TrainOptions {
  std::string train_pos, train_chunk, train_dep, train_pairs;
  std::string dev_pos, dev_chunk, dev_dep, dev_pairs;
  std::string word_emb, char_emb;
  std::string tasks;
  std::string model;
  std::string config;
  std::string log_path;
  std::vector<std::string> sets;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool no_shortcut = false;
  bool no_label_embeddings = false;
  bool no_vertical = false;
};

int run_train(const TrainOptions& o, const Logger& log) {
  std::map<std::string, std::string> model_kv, train_kv;
  if (!o.config.empty()) split_config(read_config_file(o.config), model_kv, train_kv);
  for (const auto& s : o.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
    std::map<std::string, std::string> one{{s.substr(0, eq), s.substr(eq + 1)}};
    split_config(one, model_kv, train_kv);
  }
  if (!o.tasks.empty()) model_kv["wiring.tasks"] = o.tasks;
  if (o.no_shortcut) model_kv["wiring.shortcut"] = "false";
  if (o.no_label_embeddings) model_kv["wiring.label_embeddings"] = "false";
  if (o.no_vertical) model_kv["wiring.vertical"] = "false";
  if (o.epochs) train_kv["train.epochs"] = std::to_string(*o.epochs);
  if (o.seed) train_kv["train.seed"] = std::to_string(*o.seed);

  ModelConfig mc = ModelConfig::from_key_values(model_kv);
  TrainConfig tc;
  tc.apply_key_values(train_kv);

  TrainingData data;
  DevData dev;
  if (!o.train_pos.empty()) data.pos = parse_token_file(o.train_pos);
  if (!o.train_chunk.empty()) data.chunk = parse_token_file(o.train_chunk);
  if (!o.train_dep.empty()) data.dep = parse_token_file(o.train_dep);
  if (!o.train_pairs.empty()) data.pairs = parse_pair_file(o.train_pairs);
  if (!o.dev_pos.empty()) dev.pos = parse_token_file(o.dev_pos);
  if (!o.dev_chunk.empty()) dev.chunk = parse_token_file(o.dev_chunk);
  if (!o.dev_dep.empty()) dev.dep = parse_token_file(o.dev_dep);
  if (!o.dev_pairs.empty()) dev.pairs = parse_pair_file(o.dev_pairs);

  const auto& w = mc.wiring;
  auto require = [&](Task t, bool present, const char* flag) {
    if (w.is_active(t) && !present) {
      throw UsageError(std::string("task ") + task_name(t) + " is active but " + flag + " was not given");
    }
    if (!w.is_active(t) && present) log.info(std::string("warning: ") + flag + " is ignored, task " + task_name(t) + " is inactive");
  };
  require(Task::kPos, !o.train_pos.empty(), "--train-pos");
  require(Task::kChunk, !o.train_chunk.empty(), "--train-chunk");
  require(Task::kDep, !o.train_dep.empty(), "--train-dep");
  if ((w.is_active(Task::kRel) || w.is_active(Task::kEnt)) && o.train_pairs.empty()) {
    throw UsageError("sentence-pair tasks are active but --train-pairs was not given");
  }
  // Chunking and dependency data often come from overlapping treebank sections.
  for (const std::string* c : {&o.train_chunk, &o.dev_chunk}) {
    for (const std::string* d : {&o.train_dep, &o.dev_dep}) {
      if (!c->empty() && *c == *d) log.info("warning: " + *c + " is used for both chunking and dependency parsing");
    }
  }

  JointModel model = make_model(mc, data);
  for (Task t : kAllTasks) {
    if (w.is_active(t)) {
      log.debug(std::string("layer ") + task_name(t) + " input width " + std::to_string(model.input_width(t)));
    }
  }
  std::optional<EmbeddingTable> word_vectors, char_vectors;
  if (!o.word_emb.empty()) word_vectors = load_embeddings(o.word_emb);
  if (!o.char_emb.empty()) char_vectors = load_embeddings(o.char_emb);
  init_params(model, tc.seed, word_vectors ? &*word_vectors : nullptr, char_vectors ? &*char_vectors : nullptr);

  std::ofstream log_file;
  if (!o.log_path.empty()) {
    log_file.open(o.log_path);
    if (!log_file) throw Error("cannot write '" + o.log_path + "'");
  }
  FitResult r = fit(model, data, tc, dev, [&](const std::string& line) {
    log.info(line);
    if (log_file) log_file << line << '\n';
  });
  if (r.best_score) log.info("best_epoch=" + std::to_string(r.best_epoch));
  save_model(model, o.model);
  log.info("saved " + o.model);
  return 0;
}

bool is_pair_task(Task t) { return t == Task::kRel || t == Task::kEnt; }

int run_eval(const std::string& model_path, const std::string& data_path, const std::string& task_name_arg,
             std::ostream& out) {
  const Task task = task_from_string(task_name_arg);
  JointModel model = load_model(model_path);
  if (!model.active(task)) throw UsageError(std::string("the model has no ") + task_name(task) + " layer");
  MetricReport r = is_pair_task(task) ? evaluate_model(model, parse_pair_file(data_path), task)
                                      : evaluate_model(model, parse_token_file(data_path), task);
  out << r.format();
  return 0;
}

int run_annotate(const std::string& model_path, const std::string& input, bool parse, std::ostream& out) {
  JointModel model = load_model(model_path);
  if (parse && !model.active(Task::kDep)) throw UsageError("the model has no dependency layer");
  if (!parse && !model.active(Task::kPos) && !model.active(Task::kChunk)) {
    throw UsageError("the model has neither a POS nor a chunking layer");
  }
  auto sentences = parse_token_file(input);
  for (auto& s : sentences) {
    SentencePrediction p = model.predict_sentence(s.forms());
    for (std::size_t t = 0; t < s.size(); ++t) {
      Token& tok = s.tokens[t];
      if (!p.pos.empty()) tok.pos = p.pos[t];
      if (!p.chunk.empty()) tok.chunk = p.chunk[t];
      if (parse) {
        tok.head = p.heads[t];
        tok.deprel = p.deprels[t];
      } else {
        tok.head.reset();
        tok.deprel.reset();
      }
    }
  }
  out << format_token_text(sentences);
  return 0;
}

int run_pair(const std::string& model_path, const std::string& input, std::ostream& out) {
  JointModel model = load_model(model_path);
  if (!model.active(Task::kRel) && !model.active(Task::kEnt)) throw UsageError("the model has no sentence-pair layer");
  for (const auto& pair : parse_pair_file(input)) {
    PairPrediction p = model.predict_pair(pair.premise, pair.hypothesis);
    out << pair.id << '\t' << (p.score ? format_metric(*p.score) : std::string("_")) << '\t'
        << (p.label ? entailment_name(*p.label) : "_") << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint many-task tagger, parser and sentence-pair model"};
  app.require_subcommand(1);

  SkipGramConfig sg;
  std::string sg_corpus, sg_output, sg_mode = "word";
  auto* pre = app.add_subcommand("pretrain-embeddings", "Skip-gram pre-training of word or n-gram vectors");
  pre->add_option("--corpus", sg_corpus, "Whitespace-tokenized text")->required()->check(CLI::ExistingFile);
  pre->add_option("--output", sg_output, "Embedding file to write")->required();
  pre->add_option("--mode", sg_mode, "word | char-ngram")->check(CLI::IsMember({"word", "char-ngram"}));
  pre->add_option("--dim", sg.dim)->check(CLI::PositiveNumber);
  pre->add_option("--window", sg.window)->check(CLI::PositiveNumber);
  pre->add_option("--negatives", sg.negatives);
  pre->add_option("--subsample", sg.subsample)->check(CLI::NonNegativeNumber);
  pre->add_option("--epochs", sg.epochs);
  pre->add_option("--lr", sg.lr)->check(CLI::PositiveNumber);
  pre->add_option("--seed", sg.seed);

  TrainOptions to;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  auto* train = app.add_subcommand("train", "Train a model and write an archive");
  train->add_option("--train-pos", to.train_pos)->check(CLI::ExistingFile);
  train->add_option("--train-chunk", to.train_chunk)->check(CLI::ExistingFile);
  train->add_option("--train-dep", to.train_dep)->check(CLI::ExistingFile);
  train->add_option("--train-pairs", to.train_pairs)->check(CLI::ExistingFile);
  train->add_option("--dev-pos", to.dev_pos)->check(CLI::ExistingFile);
  train->add_option("--dev-chunk", to.dev_chunk)->check(CLI::ExistingFile);
  train->add_option("--dev-dep", to.dev_dep)->check(CLI::ExistingFile);
  train->add_option("--dev-pairs", to.dev_pairs)->check(CLI::ExistingFile);
  train->add_option("--word-emb", to.word_emb)->check(CLI::ExistingFile);
  train->add_option("--char-emb", to.char_emb)->check(CLI::ExistingFile);
  train->add_option("--tasks", to.tasks, "Active tasks: letters a-e or 'all'");
  auto* epochs_opt = train->add_option("--epochs", epochs);
  auto* seed_opt = train->add_option("--seed", seed);
  train->add_flag("--no-shortcut", to.no_shortcut);
  train->add_flag("--no-label-embeddings", to.no_label_embeddings);
  train->add_flag("--no-vertical", to.no_vertical);
  train->add_option("--model", to.model, "Archive to write")->required();
  train->add_option("--config", to.config, "key=value file")->check(CLI::ExistingFile);
  train->add_option("--set", to.sets, "Config override KEY=VALUE");
  train->add_option("--log", to.log_path, "Also write the training log here");

  std::string model_path, data_path, task_arg;
  auto* eval = app.add_subcommand("eval", "Score a dataset");
  eval->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--task", task_arg, "pos | chunk | dep | rel | ent")->required();

  std::string input_path;
  auto* tag = app.add_subcommand("tag", "Predict POS and chunk tags");
  tag->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  tag->add_option("--input", input_path)->required()->check(CLI::ExistingFile);
  auto* parse = app.add_subcommand("parse", "Predict tags and dependency trees");
  parse->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  parse->add_option("--input", input_path)->required()->check(CLI::ExistingFile);
  auto* pair = app.add_subcommand("pair", "Predict relatedness and entailment");
  pair->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  pair->add_option("--input", input_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const Logger log{err, log_level_from_env()};
    if (*pre) {
      sg.mode = sg_mode == "word" ? SkipGramMode::kWord : SkipGramMode::kCharNgram;
      EmbeddingTable table = pretrain_skipgram(read_corpus_tokens(sg_corpus), sg);
      save_embeddings(table, sg_output);
      log.info("wrote " + std::to_string(table.count()) + " vectors to " + sg_output);
      return 0;
    }
    if (*train) {
      if (*epochs_opt) to.epochs = epochs;
      if (*seed_opt) to.seed = seed;
      return run_train(to, log);
    }
    if (*eval) return run_eval(model_path, data_path, task_arg, out);
    if (*tag) return run_annotate(model_path, input_path, false, out);
    if (*parse) return run_annotate(model_path, input_path, true, out);
    if (*pair) return run_pair(model_path, input_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace jmt
