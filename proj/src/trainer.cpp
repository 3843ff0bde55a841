#include "jmt/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "jmt/data_io.hpp"
#include "jmt/error.hpp"

namespace jmt {
namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || !std::isfinite(v)) {
    throw UsageError("config key '" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || *end != '\0' || value[0] == '-') {
    throw UsageError("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return v;
}

std::string num(double v) { return format_metric(v); }

NodeRef sum_nodes(Graph& graph, const std::vector<NodeRef>& nodes) {
  return nodes.size() == 1 ? nodes[0] : graph.add(nodes);
}

const std::vector<std::string>& batch_keys() {
  static const std::vector<std::string> keys{"train.batch_pos", "train.batch_chunk", "train.batch_dep",
                                             "train.batch_rel", "train.batch_ent"};
  return keys;
}

}  // namespace

std::map<std::string, std::string> TrainConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["train.lambda_lstm"] = num(lambda_lstm);
  kv["train.lambda_classifier"] = num(lambda_classifier);
  kv["train.delta_default"] = num(delta_default);
  kv["train.delta_lower_classifier"] = num(delta_lower_classifier);
  kv["train.epsilon"] = num(epsilon);
  kv["train.rho"] = num(rho);
  for (std::size_t i = 0; i < 5; ++i) kv[batch_keys()[i]] = std::to_string(batch_sizes[i]);
  kv["train.dropout_vertical"] = num(dropout.vertical);
  kv["train.dropout_word_low"] = num(dropout.word_low);
  kv["train.dropout_word_high"] = num(dropout.word_high);
  kv["train.dropout_label_low"] = num(dropout.label_low);
  kv["train.dropout_label_high"] = num(dropout.label_high);
  kv["train.dropout_classifier"] = num(dropout.classifier);
  kv["train.dropout_relatedness"] = num(dropout.relatedness);
  kv["train.word_dropout_alpha"] = num(dropout.word_dropout_alpha);
  kv["train.epochs"] = std::to_string(epochs);
  kv["train.seed"] = std::to_string(seed);
  kv["train.random_task_order"] = random_task_order ? "true" : "false";
  kv["train.clip"] = clip ? "true" : "false";
  kv["train.selection_metric"] = selection_metric;
  return kv;
}

void TrainConfig::apply_key_values(const std::map<std::string, std::string>& kv) {
  auto flag = [](const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError("config key '" + key + "' expects true/false, got '" + v + "'");
  };
  auto nonneg = [](const std::string& key, double v) {
    if (v < 0) throw UsageError("config key '" + key + "' must be non-negative");
    return v;
  };
  std::map<std::string, double*> doubles{
      {"train.lambda_lstm", &lambda_lstm},
      {"train.lambda_classifier", &lambda_classifier},
      {"train.delta_default", &delta_default},
      {"train.delta_lower_classifier", &delta_lower_classifier},
      {"train.epsilon", &epsilon},
      {"train.rho", &rho},
      {"train.dropout_vertical", &dropout.vertical},
      {"train.dropout_word_low", &dropout.word_low},
      {"train.dropout_word_high", &dropout.word_high},
      {"train.dropout_label_low", &dropout.label_low},
      {"train.dropout_label_high", &dropout.label_high},
      {"train.dropout_classifier", &dropout.classifier},
      {"train.dropout_relatedness", &dropout.relatedness},
      {"train.word_dropout_alpha", &dropout.word_dropout_alpha},
  };
  for (const auto& [key, value] : kv) {
    if (auto it = doubles.find(key); it != doubles.end()) {
      *it->second = nonneg(key, parse_double(key, value));
      continue;
    }
    auto b = std::find(batch_keys().begin(), batch_keys().end(), key);
    if (b != batch_keys().end()) {
      std::size_t n = parse_u64(key, value);
      if (n == 0) throw UsageError("batch sizes must be positive");
      batch_sizes[static_cast<std::size_t>(b - batch_keys().begin())] = n;
    } else if (key == "train.epochs") {
      epochs = parse_u64(key, value);
    } else if (key == "train.seed") {
      seed = parse_u64(key, value);
    } else if (key == "train.random_task_order") {
      random_task_order = flag(key, value);
    } else if (key == "train.clip") {
      clip = flag(key, value);
    } else if (key == "train.selection_metric") {
      selection_metric = value;
    } else {
      throw UsageError("unknown training config key '" + key + "'");
    }
  }
  if (epsilon <= 0) throw UsageError("train.epsilon must be positive");
  for (double r : {dropout.vertical, dropout.word_low, dropout.word_high, dropout.label_low, dropout.label_high,
                   dropout.classifier, dropout.relatedness}) {
    if (r >= 1.0) throw UsageError("dropout rates must be below 1");
  }
  if (dropout.word_dropout_alpha < 0) throw UsageError("train.word_dropout_alpha must be nonnegative");
}

JointModel make_model(const ModelConfig& config, const TrainingData& data) {
  Vocabulary vocab(config.lowercase_words, config.ngram_orders);
  LabelSet pos, chunk, deprel;
  for (const auto* set : {&data.pos, &data.chunk, &data.dep}) {
    for (const auto& s : *set) {
      for (const auto& t : s.tokens) vocab.add(t.form);
    }
  }
  for (const auto& p : data.pairs) {
    for (const auto& w : p.premise) vocab.add(w);
    for (const auto& w : p.hypothesis) vocab.add(w);
  }
  for (const auto& s : data.pos) {
    for (const auto& t : s.tokens) {
      if (t.pos) pos.add(*t.pos);
    }
  }
  for (const auto& s : data.chunk) {
    for (const auto& t : s.tokens) {
      if (t.chunk) chunk.add(*t.chunk);
    }
  }
  for (const auto& s : data.dep) {
    for (const auto& t : s.tokens) {
      if (t.deprel) deprel.add(*t.deprel);
    }
  }
  return JointModel(config, std::move(vocab), std::move(pos), std::move(chunk), std::move(deprel));
}

double clip_threshold(Task task) { return std::min(3.0, static_cast<double>(depth(task))); }

double learning_rate(std::size_t epoch, double epsilon, double rho) {
  if (epoch < 1) throw PreconditionError("epochs are numbered from 1");
  return epsilon / (1.0 + rho * static_cast<double>(epoch - 1));
}

double init_bound(std::size_t rows, std::size_t cols) {
  return std::sqrt(6.0 / static_cast<double>(rows + cols));
}

void init_params(JointModel& model, std::uint64_t seed, const EmbeddingTable* word_vectors,
                 const EmbeddingTable* ngram_vectors) {
  Rng rng(splitmix64(seed));
  for (Parameter* p : model.params().all()) {
    Tensor& v = p->value();
    double bound = 0.0;
    switch (p->role()) {
      case ParamRole::kEmbedding:
        bound = init_bound(1, v.cols());
        break;
      case ParamRole::kLstmWeight:
      case ParamRole::kClassifierWeight:
      case ParamRole::kLabelEmbedding:
        bound = init_bound(v.rows(), v.cols());
        break;
      case ParamRole::kLstmForgetBias:
        std::fill(v.values.begin(), v.values.end(), 1.0);
        continue;
      default:
        std::fill(v.values.begin(), v.values.end(), 0.0);
        continue;
    }
    for (double& x : v.values) x = rng.uniform(-bound, bound);
  }
  if (word_vectors) copy_pretrained_rows(*word_vectors, model.vocab().words(), model.word_table->value());
  if (ngram_vectors && model.vocab().ngram_size() > 0) {
    copy_pretrained_rows(*ngram_vectors, model.vocab().ngrams(), model.ngram_table->value());
  }
}

const Tensor* ParamSnapshot::find(const Parameter* p) const {
  auto it = values.find(p);
  return it == values.end() ? nullptr : &it->second;
}

ParamSnapshot take_snapshot(const JointModel& model, int max_owner, std::size_t epoch, std::string tag) {
  ParamSnapshot s;
  s.epoch = epoch;
  s.tag = std::move(tag);
  s.max_owner = max_owner;
  for (const Parameter* p : model.params().all()) {
    if (p->owner_layer() <= max_owner) s.values.emplace(p, p->value());
  }
  return s;
}

double snapshot_distance(const ParamSnapshot& snapshot) {
  double sum = 0.0;
  for (const auto& [p, old] : snapshot.values) {
    const auto& now = p->value().values;
    for (std::size_t i = 0; i < now.size(); ++i) {
      const double d = now[i] - old.values[i];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

ObjectiveNodes task_objective(Graph& graph, JointModel& model, Task task, const TaskBatch& batch,
                              const ParamSnapshot* previous, const TrainConfig& config, const RunContext& ctx) {
  if (!model.active(task)) throw PreconditionError(std::string("task ") + task_name(task) + " is not active");
  if (!previous) throw PreconditionError(std::string("missing snapshot for the ") + task_name(task) + " objective");
  std::vector<NodeRef> terms;
  switch (task) {
    case Task::kPos:
    case Task::kChunk:
      for (const AnnotatedSentence* s : batch.sentences) {
        const auto forms = s->forms();
        Encoding enc = model.encode(graph, forms, task, ctx);
        const auto& probs = task == Task::kPos ? enc.pos_probs : enc.chunk_probs;
        const LabelSet& labels = task == Task::kPos ? model.pos_labels() : model.chunk_labels();
        for (std::size_t t = 0; t < s->size(); ++t) {
          const auto& gold = task == Task::kPos ? s->tokens[t].pos : s->tokens[t].chunk;
          if (!gold) throw PreconditionError(std::string("training sentence lacks ") + task_name(task) + " tags");
          terms.push_back(graph.cross_entropy(probs[t], labels.id(*gold)));
        }
      }
      break;
    case Task::kDep:
      for (const AnnotatedSentence* s : batch.sentences) {
        const auto forms = s->forms();
        Encoding enc = model.encode(graph, forms, task, ctx);
        const auto& states = enc.layer(Task::kDep);
        auto dists = head_distributions(graph, states, *model.dep);
        for (std::size_t t = 0; t < s->size(); ++t) {
          const auto& tok = s->tokens[t];
          if (!tok.head || !tok.deprel) throw PreconditionError("training sentence lacks heads or labels");
          const int head = *tok.head;
          const std::size_t index = static_cast<std::size_t>(head <= static_cast<int>(t) ? head : head - 1);
          terms.push_back(graph.cross_entropy(dists[t].probs, index));
          NodeRef labels = label_distribution(graph, states[t], head_state(graph, states, head, *model.dep),
                                              *model.dep, ctx.rates.classifier, ctx.rng);
          terms.push_back(graph.cross_entropy(labels, model.dep_labels().id(*tok.deprel)));
        }
      }
      break;
    case Task::kRel:
      for (const SentencePair* p : batch.pairs) {
        if (!p->score) throw PreconditionError("pair lacks a relatedness score");
        auto out = model.encode_pair(graph, p->premise, p->hypothesis, task, ctx);
        terms.push_back(relatedness_loss(graph, {*out.relatedness}, *p->score));
      }
      break;
    case Task::kEnt:
      for (const SentencePair* p : batch.pairs) {
        if (!p->label) throw PreconditionError("pair lacks an entailment label");
        auto out = model.encode_pair(graph, p->premise, p->hypothesis, task, ctx);
        terms.push_back(graph.cross_entropy(*out.entailment, static_cast<std::size_t>(*p->label)));
      }
      break;
  }
  if (terms.empty()) throw PreconditionError("empty mini-batch");

  ObjectiveNodes o;
  o.data = sum_nodes(graph, terms);
  const std::vector<Parameter*> used = graph.parameters();

  std::vector<NodeRef> l2;
  for (Parameter* p : used) {
    if (!is_weight_matrix(p->role())) continue;
    const double lambda = p->role() == ParamRole::kLstmWeight ? config.lambda_lstm : config.lambda_classifier;
    if (lambda == 0.0) continue;
    l2.push_back(graph.scale(graph.sum_squares(graph.parameter(*p)), lambda));
  }
  if (!l2.empty()) o.l2 = sum_nodes(graph, l2);

  std::vector<NodeRef> succ;
  for (Parameter* p : used) {
    const Tensor* old = previous->find(p);
    if (!old) continue;
    const bool lower_classifier = is_classifier_param(p->role()) && p->owner_layer() < depth(task);
    const double delta = lower_classifier ? config.delta_lower_classifier : config.delta_default;
    if (delta == 0.0) continue;
    NodeRef diff = graph.subtract(graph.parameter(*p), graph.constant_view(*old));
    succ.push_back(graph.scale(graph.sum_squares(diff), delta));
  }
  if (!succ.empty()) o.successive = sum_nodes(graph, succ);

  std::vector<NodeRef> total{o.data};
  if (o.l2) total.push_back(*o.l2);
  if (o.successive) total.push_back(*o.successive);
  o.total = sum_nodes(graph, total);
  return o;
}

double clip_gradients(std::span<Parameter* const> params, double threshold) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad().values) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > threshold && norm > 0.0) {
    const double factor = threshold / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad().values) g *= factor;
    }
  }
  return norm;
}

std::string format_log_line(const TaskStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "epoch=%zu task=%s loss=%.6f lr=%.6f clip=%.1f seconds=%.3f examples=%zu", s.epoch,
                task_name(s.task), s.mean_loss, s.lr, s.clip, s.seconds, s.examples);
  return buf;
}

Trainer::Trainer(JointModel& model, const TrainingData& data, TrainConfig config)
    : model_(model), data_(data), config_(std::move(config)), rng_(config_.seed) {
  epoch_snapshot_ = take_snapshot(model_, 0, 0, "init");
}

std::vector<TaskBatch> Trainer::make_batches(Task task) {
  std::vector<std::size_t> order;
  const std::vector<AnnotatedSentence>* sentences = nullptr;
  switch (task) {
    case Task::kPos:
      sentences = &data_.pos;
      break;
    case Task::kChunk:
      sentences = &data_.chunk;
      break;
    case Task::kDep:
      sentences = &data_.dep;
      break;
    default:
      break;
  }
  if (sentences) {
    for (std::size_t i = 0; i < sentences->size(); ++i) order.push_back(i);
  } else {
    for (std::size_t i = 0; i < data_.pairs.size(); ++i) {
      const auto& p = data_.pairs[i];
      if (task == Task::kRel ? p.score.has_value() : p.label.has_value()) order.push_back(i);
    }
  }
  if (order.empty()) throw PreconditionError(std::string("no training data for active task ") + task_name(task));
  rng_.shuffle(order);
  const std::size_t size = config_.batch_sizes[depth(task) - 1];
  std::vector<TaskBatch> batches;
  for (std::size_t start = 0; start < order.size(); start += size) {
    TaskBatch b;
    for (std::size_t i = start; i < std::min(order.size(), start + size); ++i) {
      if (sentences) {
        b.sentences.push_back(&(*sentences)[order[i]]);
      } else {
        b.pairs.push_back(&data_.pairs[order[i]]);
      }
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

TaskStats Trainer::train_task(Task task, const ParamSnapshot* previous, double lr) {
  const auto start = std::chrono::steady_clock::now();
  TaskStats stats;
  stats.epoch = epoch_;
  stats.task = task;
  stats.lr = lr;
  stats.clip = clip_threshold(task);
  double loss_sum = 0.0;
  for (const TaskBatch& batch : make_batches(task)) {
    Graph graph;
    RunContext ctx{&rng_, config_.dropout};
    ObjectiveNodes o = task_objective(graph, model_, task, batch, previous, config_, ctx);
    graph.forward();
    loss_sum += graph.scalar(o.total);
    stats.examples += batch.sentences.size() + batch.pairs.size();
    graph.backward(o.total);
    const std::vector<Parameter*> params = graph.parameters();
    if (config_.clip) clip_gradients(params, stats.clip);
    for (Parameter* p : params) {
      auto& v = p->value().values;
      auto& g = p->grad().values;
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] -= lr * g[i];
        g[i] = 0.0;
      }
    }
  }
  stats.mean_loss = loss_sum / static_cast<double>(stats.examples);
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

std::vector<TaskStats> Trainer::train_epoch() {
  ++epoch_;
  const double lr = learning_rate(epoch_, config_.epsilon, config_.rho);
  std::vector<Task> order;
  for (Task t : kAllTasks) {
    if (model_.active(t)) order.push_back(t);
  }
  if (order.empty()) throw PreconditionError("no active task");
  if (config_.random_task_order) rng_.shuffle(order);
  for (auto& s : task_snapshots_) s.reset();

  std::vector<TaskStats> out;
  const ParamSnapshot* previous = &epoch_snapshot_;
  for (Task t : order) {
    TaskStats stats = train_task(t, previous, lr);
    if (on_task) on_task(stats);
    out.push_back(stats);
    task_snapshots_[depth(t) - 1] = take_snapshot(model_, depth(t), epoch_, task_name(t));
    previous = &*task_snapshots_[depth(t) - 1];
  }
  epoch_snapshot_ = take_snapshot(model_, 0, epoch_, "epoch");
  return out;
}

const ParamSnapshot* Trainer::snapshot_after(Task task) const {
  const auto& s = task_snapshots_[depth(task) - 1];
  return s ? &*s : nullptr;
}

std::optional<double> selection_score(JointModel& model, const DevData& dev, const std::string& metric) {
  if (metric == "uas" || metric == "las") {
    if (dev.dep.empty() || !model.active(Task::kDep)) return std::nullopt;
    return evaluate_model(model, dev.dep, Task::kDep).get(metric == "uas" ? "dep_uas" : "dep_las");
  }
  if (metric == "pos") {
    if (dev.pos.empty() || !model.active(Task::kPos)) return std::nullopt;
    return evaluate_model(model, dev.pos, Task::kPos).get("pos_accuracy");
  }
  if (metric == "chunk") {
    if (dev.chunk.empty() || !model.active(Task::kChunk)) return std::nullopt;
    return evaluate_model(model, dev.chunk, Task::kChunk).get("chunk_f1");
  }
  if (metric == "mse") {
    if (dev.pairs.empty() || !model.active(Task::kRel)) return std::nullopt;
    return -evaluate_model(model, dev.pairs, Task::kRel).get("rel_mse");
  }
  if (metric == "ent") {
    if (dev.pairs.empty() || !model.active(Task::kEnt)) return std::nullopt;
    return evaluate_model(model, dev.pairs, Task::kEnt).get("ent_accuracy");
  }
  throw UsageError("unknown selection metric '" + metric + "'");
}

FitResult fit(JointModel& model, const TrainingData& data, const TrainConfig& config, const DevData& dev,
              const std::function<void(const std::string&)>& log) {
  Trainer trainer(model, data, config);
  FitResult result;
  std::map<std::string, Tensor> best;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    for (const TaskStats& s : trainer.train_epoch()) {
      if (log) log(format_log_line(s));
    }
    if (dev.empty()) continue;
    std::optional<double> score = selection_score(model, dev, config.selection_metric);
    if (!score) continue;
    if (log) log("epoch=" + std::to_string(trainer.epochs_done()) + " dev_" + config.selection_metric + "=" +
                 format_metric(*score));
    if (!result.best_score || *score > *result.best_score) {
      result.best_score = score;
      result.best_epoch = trainer.epochs_done();
      best.clear();
      for (const Parameter* p : model.params().all()) best.emplace(p->name(), p->value());
    }
  }
  if (!best.empty()) {
    for (Parameter* p : model.params().all()) p->value() = best.at(p->name());
  }
  if (result.best_epoch == 0) result.best_epoch = trainer.epochs_done();
  return result;
}

}  // namespace jmt
