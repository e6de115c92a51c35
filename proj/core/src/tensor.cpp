#include "stc/autodiff/tensor.hpp"

#include <cmath>
#include <sstream>

namespace stc::ad {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

ShapeError::ShapeError(const std::string& op, const Shape& a, const Shape& b)
    : std::invalid_argument(op + ": shape mismatch " + to_string(a) + " vs " + to_string(b)) {}

ShapeError::ShapeError(const std::string& op, const std::string& detail)
    : std::invalid_argument(op + ": " + detail) {}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.size() > 3) throw ShapeError("tensor", "rank " + std::to_string(shape.size()) + " exceeds 3");
  for (auto e : shape) {
    if (e == 0) throw ShapeError("tensor", "zero extent in " + to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != element_count(shape_)) {
    throw ShapeError("tensor", "data length " + std::to_string(data_.size()) + " does not match shape " +
                                   to_string(shape_));
  }
}

Tensor Tensor::scalar(double value) { return Tensor({}, std::vector<double>{value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("dim", "axis " + std::to_string(axis) + " out of range for " + to_string(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t r) {
  const auto cols = shape_.size() >= 2 ? data_.size() / shape_[0] : 1;
  return std::span<double>(data_).subspan(r * cols, cols);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const auto cols = shape_.size() >= 2 ? data_.size() / shape_[0] : 1;
  return std::span<const double>(data_).subspan(r * cols, cols);
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item", "tensor " + to_string(shape_) + " is not a scalar");
  return data_[0];
}

void Tensor::fill(double value) noexcept {
  for (auto& v : data_) v = value;
}

bool Tensor::all_finite() const noexcept {
  for (auto v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace stc::ad
