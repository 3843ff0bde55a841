#include "jmt/tensor.hpp"

#include "jmt/error.hpp"

namespace jmt {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape s) : shape(std::move(s)), values(shape_size(shape), 0.0) {
  for (std::size_t d : shape) {
    if (d == 0) throw PreconditionError("tensor dimensions must be positive: " + shape_to_string(shape));
  }
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
  if (values.size() != shape_size(shape)) {
    throw PreconditionError("tensor of shape " + shape_to_string(shape) + " given " +
                            std::to_string(values.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  Shape s{v.size()};
  return Tensor(std::move(s), std::move(v));
}

Tensor Tensor::filled(Shape s, double value) {
  Tensor t(std::move(s));
  for (double& x : t.values) x = value;
  return t;
}

std::span<double> Tensor::row(std::size_t r) {
  std::size_t c = cols();
  return {values.data() + r * c, c};
}

std::span<const double> Tensor::row(std::size_t r) const {
  std::size_t c = cols();
  return {values.data() + r * c, c};
}

}  // namespace jmt
