#include "tensor.hpp"

#include <cmath>
#include <sstream>

namespace nee {

size_t numel(const Shape& s) {
  size_t n = 1;
  for (size_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << ")";
  return os.str();
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : shape_(std::move(shape)), requires_grad_(requires_grad) {
  if (values.size() != numel(shape_)) {
    fail(ErrorKind::InvalidArgument,
         "tensor value count " + std::to_string(values.size()) +
             " does not match shape " + shape_str(shape_));
  }
  storage_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(numel(shape), 0.0);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(numel(shape), value);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

size_t Tensor::dim(size_t i) const {
  if (i >= shape_.size()) {
    fail(ErrorKind::InvalidArgument, "tensor dim index out of range");
  }
  return shape_[i];
}

const std::vector<double>& Tensor::values() const {
  if (!storage_) fail(ErrorKind::Internal, "reading undefined tensor");
  return *storage_;
}

double Tensor::scalar_value() const {
  if (size() != 1) {
    fail(ErrorKind::InvalidArgument,
         "scalar_value on tensor of shape " + shape_str(shape_));
  }
  return values()[0];
}

Tensor Tensor::reshape(Shape new_shape) const {
  if (numel(new_shape) != size()) {
    fail(ErrorKind::InvalidArgument,
         "reshape " + shape_str(shape_) + " -> " + shape_str(new_shape));
  }
  Tensor t;
  t.shape_ = std::move(new_shape);
  t.storage_ = storage_;
  t.requires_grad_ = requires_grad_;
  return t;
}

}  // namespace nee
