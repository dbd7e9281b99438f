#pragma once

// Tape-based reverse-mode differentiation over a fixed vocabulary of
// 2-D operations. A Tape owns every intermediate value created while a
// forward pass is recorded; calling backward() on a 1x1 output walks the
// tape in reverse and accumulates gradients into the bound parameters.
//
// A Tape is single-threaded. Parameters bound with Tape::param() must
// outlive the tape and must not be mutated until backward() has finished.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "sumkit/tensor.hpp"

namespace sumkit {

class Tape;

// Lightweight handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  // With record_gradients=false no backward closures are stored; use this
  // for inference.
  explicit Tape(bool record_gradients = true) : recording_(record_gradients) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var param(Tensor& parameter);

  const Tensor& value(const Var& v) const;
  const Tensor& value_at(std::size_t id) const;
  bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

  // Seeds d(out)/d(out) = 1 and propagates. `out` must be 1x1.
  void backward(const Var& out);

  // Gradient buffer of a recorded value; empty if nothing flowed into it.
  std::span<const float> grad(const Var& v) const { return nodes_[v.id()].grad; }

  std::size_t size() const { return nodes_.size(); }
  bool recording() const { return recording_; }

  // Piecewise ops (relu, top-k selection) fold the branch they took into a
  // running hash, so a gradient check can tell when a probe crossed a kink.
  void note_branch(std::uint64_t value) { branches_ = (branches_ ^ value) * 0x100000001b3ULL; }
  std::uint64_t branch_signature() const { return branches_; }

  // Op-author interface.
  Var push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  std::vector<float>& grad_buffer(std::size_t id);
  const std::vector<float>& output_grad(std::size_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor* parameter = nullptr;
    std::vector<float> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  bool recording_;
  std::uint64_t branches_ = 0xcbf29ce484222325ULL;
  std::deque<Node> nodes_;
};

namespace ops {

Var matmul(const Var& a, const Var& b);     // [n x k] * [k x m]
Var matmul_nt(const Var& a, const Var& b);  // [n x k] * [m x k]^T
Var add(const Var& a, const Var& b);
Var add_row(const Var& a, const Var& row);  // broadcast a 1 x m row over n x m
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float factor);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var softmax_rows(const Var& a);
Var layer_norm(const Var& x, const Var& gain, const Var& bias, float eps = 1e-5f);

Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var gather_rows(const Var& a, std::span<const std::size_t> indices);
Var pad_rows(const Var& a, std::size_t rows);  // zero rows appended
Var reshape(const Var& a, std::size_t rows, std::size_t cols);

Var sum(const Var& a);
Var mean(const Var& a);

// -(1/N) * sum_i [w_pos * y_i * log(x_i) + w_neg * (1 - y_i) * log(1 - x_i)]
// with both log arguments clamped below at `clamp`. x is any N-element value.
Var weighted_bce(const Var& scores, std::span<const float> labels, float w_pos, float w_neg,
                 float clamp = 1e-7f);

// (1/n) * sum_i ||a_i - b_i||^2 (squared) or ||a_i - b_i|| (unsquared).
Var row_distance_mean(const Var& a, const Var& b, bool squared);

// 1/(n(n-1)) * sum_{i != j} cos(a_i, a_j); 0 when n < 2. Row norms are
// clamped below at norm_clamp.
Var mean_pairwise_cosine(const Var& a, float norm_clamp = 1e-8f);

}  // namespace ops

namespace detail {

// out[i, j] (+)= sum_p a[i, p] * b[j, p], accumulated in double.
void gemm_nt(std::span<const float> a, std::size_t a_rows, std::span<const float> b,
             std::size_t b_rows, std::size_t inner, std::span<float> out, bool accumulate);

std::vector<float> transpose(std::span<const float> a, std::size_t rows, std::size_t cols);

}  // namespace detail

}  // namespace sumkit
