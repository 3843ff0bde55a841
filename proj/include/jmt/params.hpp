#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "jmt/tensor.hpp"

namespace jmt {

enum class ParamRole {
  kEmbedding,        // word / character n-gram tables
  kLstmWeight,
  kLstmBias,
  kLstmForgetBias,
  kClassifierWeight, // ReLU and Maxout hidden layers
  kSoftmaxWeight,
  kClassifierBias,
  kLabelEmbedding,
  kBilinear,         // head-selection matrix W_d
  kRootVector,       // parameterized root state r
};

// Counted by the lambda * ||W||^2 term.
bool is_weight_matrix(ParamRole role);
// Counted by the stronger successive-regularization coefficient.
bool is_classifier_param(ParamRole role);

// A named trainable tensor with its gradient accumulator. owner_layer is the
// lowest task layer (1..5) whose objective first introduces the parameter; 0
// marks the shared embeddings.
class Parameter {
 public:
  Parameter(std::string name, Tensor value, ParamRole role, int owner_layer);

  const std::string& name() const { return name_; }
  ParamRole role() const { return role_; }
  int owner_layer() const { return owner_layer_; }

  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() { return grad_; }
  const Tensor& grad() const { return grad_; }

  bool touched() const { return touched_; }
  void mark_touched() { touched_ = true; }
  void zero_grad();

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
  ParamRole role_;
  int owner_layer_;
  bool touched_ = false;
};

// Ordered collection of parameters with stable addresses.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Parameter& add(std::string name, Tensor value, ParamRole role, int owner_layer);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace jmt
