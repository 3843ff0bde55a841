#pragma once

// Joint training: per-task objectives with L2 and successive regularization,
// clipped SGD, the epoch learning-rate schedule and parameter initialization.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jmt/corpus.hpp"
#include "jmt/embedding.hpp"
#include "jmt/model.hpp"

namespace jmt {

struct TrainConfig {
  double lambda_lstm = 1e-6;
  double lambda_classifier = 1e-5;
  double delta_default = 1e-3;
  double delta_lower_classifier = 1e-2;
  double epsilon = 1.0;
  double rho = 0.3;
  std::array<std::size_t, 5> batch_sizes{25, 25, 15, 25, 25};
  DropoutRates dropout;
  std::size_t epochs = 100;
  std::uint64_t seed = 1;
  bool random_task_order = false;
  bool clip = true;
  // uas | las | pos | chunk | mse | ent
  std::string selection_metric = "uas";

  std::map<std::string, std::string> to_key_values() const;
  // Applies known "train.*" keys on top of *this; rejects unknown ones.
  void apply_key_values(const std::map<std::string, std::string>& kv);
};

struct TrainingData {
  std::vector<AnnotatedSentence> pos;
  std::vector<AnnotatedSentence> chunk;
  std::vector<AnnotatedSentence> dep;
  std::vector<SentencePair> pairs;
};

// Vocabulary and label sets collected from every training file, then an
// uninitialized model.
JointModel make_model(const ModelConfig& config, const TrainingData& data);

// min(3, depth)
double clip_threshold(Task task);
// epsilon / (1 + rho (k - 1)), k >= 1
double learning_rate(std::size_t epoch, double epsilon = 1.0, double rho = 0.3);
// sqrt(6 / (rows + cols))
double init_bound(std::size_t rows, std::size_t cols);

// Uniform weights, zero softmax layers, biases and bilinear parameters, unit
// forget biases. Pre-trained rows overwrite the random embedding rows.
void init_params(JointModel& model, std::uint64_t seed, const EmbeddingTable* word_vectors = nullptr,
                 const EmbeddingTable* ngram_vectors = nullptr);

// Copy of the parameters with owner_layer <= max_owner (0 = embeddings only).
struct ParamSnapshot {
  std::size_t epoch = 0;
  std::string tag;
  int max_owner = 0;
  std::map<const Parameter*, Tensor> values;
  const Tensor* find(const Parameter* p) const;
};

ParamSnapshot take_snapshot(const JointModel& model, int max_owner, std::size_t epoch, std::string tag);
// ||theta - theta'|| over the snapshot's parameters.
double snapshot_distance(const ParamSnapshot& snapshot);

struct TaskBatch {
  std::vector<const AnnotatedSentence*> sentences;
  std::vector<const SentencePair*> pairs;
};

struct ObjectiveNodes {
  NodeRef total;
  NodeRef data;
  std::optional<NodeRef> l2;
  std::optional<NodeRef> successive;
};

// J for one mini-batch. `previous` holds theta' of the previously trained
// task (or the embedding snapshot for the first task of an epoch).
ObjectiveNodes task_objective(Graph& graph, JointModel& model, Task task, const TaskBatch& batch,
                              const ParamSnapshot* previous, const TrainConfig& config, const RunContext& ctx);

// Rescales gradients of `params` so their joint L2 norm is at most
// `threshold`. Returns the norm before clipping.
double clip_gradients(std::span<Parameter* const> params, double threshold);

struct TaskStats {
  std::size_t epoch = 0;
  Task task = Task::kPos;
  double mean_loss = 0.0;  // objective per example
  double lr = 0.0;
  double clip = 0.0;
  double seconds = 0.0;
  std::size_t examples = 0;
};

std::string format_log_line(const TaskStats& stats);

class Trainer {
 public:
  Trainer(JointModel& model, const TrainingData& data, TrainConfig config);

  // One pass over every active task; returns one entry per task trained.
  std::vector<TaskStats> train_epoch();
  std::size_t epochs_done() const { return epoch_; }

  // Snapshot captured right after `task` in the latest epoch.
  const ParamSnapshot* snapshot_after(Task task) const;
  const ParamSnapshot& epoch_snapshot() const { return epoch_snapshot_; }

  // Called after each task pass, before the snapshot is taken.
  std::function<void(const TaskStats&)> on_task;

 private:
  TaskStats train_task(Task task, const ParamSnapshot* previous, double lr);
  std::vector<TaskBatch> make_batches(Task task);

  JointModel& model_;
  const TrainingData& data_;
  TrainConfig config_;
  Rng rng_;
  std::size_t epoch_ = 0;
  ParamSnapshot epoch_snapshot_;
  std::array<std::optional<ParamSnapshot>, 5> task_snapshots_;
};

struct DevData {
  std::vector<AnnotatedSentence> pos;
  std::vector<AnnotatedSentence> chunk;
  std::vector<AnnotatedSentence> dep;
  std::vector<SentencePair> pairs;
  bool empty() const { return pos.empty() && chunk.empty() && dep.empty() && pairs.empty(); }
};

// Larger is better; MSE is negated. Returns nullopt when the metric cannot
// be computed from the dev data.
std::optional<double> selection_score(JointModel& model, const DevData& dev, const std::string& metric);

// Runs config.epochs epochs. With dev data, the parameters of the best epoch
// under config.selection_metric are restored at the end.
struct FitResult {
  std::size_t best_epoch = 0;
  std::optional<double> best_score;
};
FitResult fit(JointModel& model, const TrainingData& data, const TrainConfig& config, const DevData& dev,
              const std::function<void(const std::string&)>& log);

}  // namespace jmt
