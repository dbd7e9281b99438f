#include "sumkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "sumkit/errors.hpp"

namespace sumkit {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 3) {
    throw ShapeError("tensor rank must be 1..3, got " + std::to_string(shape.size()));
  }
  std::size_t n = 1;
  for (std::size_t extent : shape) {
    if (extent == 0) throw ShapeError("tensor extents must be positive: " + shape_string(shape));
    n *= extent;
  }
  return n;
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape, float fill)
    : shape_(std::move(shape)), data_(checked_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_product(shape_) != data_.size()) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + sumkit::shape_string(shape_));
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, float fill) {
  return Tensor({rows, cols}, fill);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<float> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0f;
  return t;
}

std::size_t Tensor::rows() const {
  switch (shape_.size()) {
    case 1: return 1;
    case 2: return shape_[0];
    default: throw ShapeError("rows() requires rank <= 2, got " + sumkit::shape_string(shape_));
  }
}

std::size_t Tensor::cols() const {
  switch (shape_.size()) {
    case 1: return shape_[0];
    case 2: return shape_[1];
    default: throw ShapeError("cols() requires rank <= 2, got " + sumkit::shape_string(shape_));
  }
}

std::vector<float>& Tensor::grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0f);
  return grad_;
}

void Tensor::zero_grad() {
  if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0f);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const { return sumkit::shape_string(shape_); }

}  // namespace sumkit
