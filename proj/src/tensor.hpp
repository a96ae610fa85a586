#pragma once

#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace nee {

// Dense row-major shape. Rank 0 is a scalar (one value).
using Shape = std::vector<size_t>;

size_t numel(const Shape& s);
std::string shape_str(const Shape& s);
bool all_finite(const std::vector<double>& v);

// Immutable dense tensor of 64-bit floats. Copies are cheap (shared storage);
// values are never mutated after construction, so read-only sharing across
// threads is safe. Identity (for gradient lookup on a tape) is the storage
// pointer.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return storage_ ? storage_->size() : 0; }
  size_t dim(size_t i) const;
  const std::vector<double>& values() const;
  double at(size_t i) const { return values()[i]; }
  double scalar_value() const;
  bool requires_grad() const { return requires_grad_; }

  // Same storage, new shape with identical element count. Cheap; shares the
  // tape identity of the source tensor.
  Tensor reshape(Shape new_shape) const;

  // Stable identity key for tape bookkeeping. The tape retains the storage of
  // every tensor it registers, so keys cannot be reused while a tape lives.
  const void* id() const { return storage_.get(); }
  std::shared_ptr<const std::vector<double>> storage() const { return storage_; }

 private:
  Shape shape_;
  std::shared_ptr<const std::vector<double>> storage_;
  bool requires_grad_ = false;
};

}  // namespace nee
