#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sumkit {

// Dense row-major float32 array of rank 1..3 with an optional gradient buffer.
//
// Rank-1 tensors behave as a single row (rows() == 1) in the 2-D helpers,
// which is how biases and gains are consumed by the model code.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, float fill = 0.0f);
  Tensor(std::vector<std::size_t> shape, std::vector<float> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, float fill = 0.0f);
  static Tensor from_rows(std::initializer_list<std::initializer_list<float>> rows);
  static Tensor identity(std::size_t n);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const;
  std::size_t cols() const;

  float& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool has_grad() const { return !grad_.empty(); }
  std::vector<float>& grad();  // allocates a zero buffer on first use
  const std::vector<float>& grad() const { return grad_; }
  void zero_grad();
  void drop_grad() { grad_.clear(); }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  std::string shape_string() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
  std::vector<float> grad_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace sumkit
