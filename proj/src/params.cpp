#include "jmt/params.hpp"

#include <algorithm>

#include "jmt/error.hpp"

namespace jmt {

bool is_weight_matrix(ParamRole role) {
  return role == ParamRole::kLstmWeight || role == ParamRole::kClassifierWeight ||
         role == ParamRole::kSoftmaxWeight || role == ParamRole::kBilinear;
}

bool is_classifier_param(ParamRole role) {
  return role == ParamRole::kClassifierWeight || role == ParamRole::kSoftmaxWeight ||
         role == ParamRole::kClassifierBias || role == ParamRole::kBilinear || role == ParamRole::kRootVector;
}

Parameter::Parameter(std::string name, Tensor value, ParamRole role, int owner_layer)
    : name_(std::move(name)),
      value_(std::move(value)),
      grad_(value_.shape, std::vector<double>(value_.size(), 0.0)),
      role_(role),
      owner_layer_(owner_layer) {}

void Parameter::zero_grad() {
  if (!touched_) return;
  std::fill(grad_.values.begin(), grad_.values.end(), 0.0);
  touched_ = false;
}

Parameter& ParamStore::add(std::string name, Tensor value, ParamRole role, int owner_layer) {
  if (index_.count(name)) throw PreconditionError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value), role, owner_layer));
  return *params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  Parameter* p = find(name);
  if (!p) throw PreconditionError("unknown parameter: " + name);
  return *p;
}

const Parameter& ParamStore::get(const std::string& name) const {
  const Parameter* p = find(name);
  if (!p) throw PreconditionError("unknown parameter: " + name);
  return *p;
}

Parameter* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->zero_grad();
}

}  // namespace jmt
