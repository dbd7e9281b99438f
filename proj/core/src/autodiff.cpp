#include "sumkit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "sumkit/errors.hpp"

namespace sumkit {

const Tensor& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Tensor& parameter) {
  Node node;
  node.parameter = &parameter;
  node.requires_grad = recording_;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(const Var& v) const { return value_at(v.id()); }

const Tensor& Tape::value_at(std::size_t id) const {
  const Node& node = nodes_[id];
  return node.parameter ? *node.parameter : node.value;
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (recording_) {
    for (const Var& in : inputs) {
      if (in.tape_ != this) throw UsageError("op mixes values from different tapes");
      node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::vector<float>& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(value_at(id).size(), 0.0f);
  return node.grad;
}

void Tape::backward(const Var& out) {
  if (!recording_) throw UsageError("backward() on a tape created without gradient recording");
  if (out.tape_ != this) throw UsageError("backward() on a value from another tape");
  if (value(out).size() != 1) {
    throw ShapeError("backward() requires a scalar output, got " + value(out).shape_string());
  }
  for (Node& node : nodes_) node.grad.clear();
  grad_buffer(out.id())[0] = 1.0f;
  for (std::size_t i = out.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty() || !node.requires_grad) continue;
    if (node.backward) node.backward(*this, i);
    if (node.parameter) {
      std::vector<float>& dst = node.parameter->grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
    }
  }
}

namespace detail {

void gemm_nt(std::span<const float> a, std::size_t a_rows, std::span<const float> b,
             std::size_t b_rows, std::size_t inner, std::span<float> out, bool accumulate) {
  for (std::size_t i = 0; i < a_rows; ++i) {
    const float* ar = a.data() + i * inner;
    float* orow = out.data() + i * b_rows;
    for (std::size_t j = 0; j < b_rows; ++j) {
      const float* br = b.data() + j * inner;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      std::size_t p = 0;
      for (; p + 4 <= inner; p += 4) {
        s0 += static_cast<double>(ar[p]) * br[p];
        s1 += static_cast<double>(ar[p + 1]) * br[p + 1];
        s2 += static_cast<double>(ar[p + 2]) * br[p + 2];
        s3 += static_cast<double>(ar[p + 3]) * br[p + 3];
      }
      for (; p < inner; ++p) s0 += static_cast<double>(ar[p]) * br[p];
      const float v = static_cast<float>((s0 + s1) + (s2 + s3));
      orow[j] = accumulate ? orow[j] + v : v;
    }
  }
}

std::vector<float> transpose(std::span<const float> a, std::size_t rows, std::size_t cols) {
  std::vector<float> t(a.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = a[r * cols + c];
  return t;
}

}  // namespace detail

namespace ops {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

std::string dims(const Var& v) { return v.value().shape_string(); }

void accumulate(std::vector<float>& dst, std::span<const float> src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  require(b.rows() == k, "matmul: inner dimensions differ " + dims(a) + " * " + dims(b));
  Tensor out = Tensor::matrix(n, m);
  const std::vector<float> bt = detail::transpose(b.value().data(), k, m);
  detail::gemm_nt(a.value().data(), n, bt, m, k, out.data(), false);
  return a.tape().push(std::move(out), {a, b}, [a, b, n, k, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    if (t.needs_grad(a.id())) {
      // dA = dO * B^T
      detail::gemm_nt(g, n, b.value().data(), k, m, t.grad_buffer(a.id()), true);
    }
    if (t.needs_grad(b.id())) {
      // dB = A^T * dO
      const std::vector<float> at = detail::transpose(a.value().data(), n, k);
      const std::vector<float> gt = detail::transpose(g, n, m);
      detail::gemm_nt(at, k, gt, m, n, t.grad_buffer(b.id()), true);
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  require(b.cols() == k, "matmul_nt: inner dimensions differ " + dims(a) + " * " + dims(b) + "^T");
  Tensor out = Tensor::matrix(n, m);
  detail::gemm_nt(a.value().data(), n, b.value().data(), m, k, out.data(), false);
  return a.tape().push(std::move(out), {a, b}, [a, b, n, k, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    if (t.needs_grad(a.id())) {
      // dA = dO * B
      const std::vector<float> bt = detail::transpose(b.value().data(), m, k);
      detail::gemm_nt(g, n, bt, k, m, t.grad_buffer(a.id()), true);
    }
    if (t.needs_grad(b.id())) {
      // dB = dO^T * A
      const std::vector<float> gt = detail::transpose(g, n, m);
      const std::vector<float> at = detail::transpose(a.value().data(), n, k);
      detail::gemm_nt(gt, m, at, k, n, t.grad_buffer(b.id()), true);
    }
  });
}

Var add(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "add: shape mismatch " + dims(a) + " vs " + dims(b));
  Tensor out = a.value();
  out.drop_grad();
  const auto& bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += bv[i];
  return a.tape().push(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    if (t.needs_grad(a.id())) accumulate(t.grad_buffer(a.id()), g);
    if (t.needs_grad(b.id())) accumulate(t.grad_buffer(b.id()), g);
  });
}

Var add_row(const Var& a, const Var& row) {
  const std::size_t n = a.rows(), m = a.cols();
  require(row.value().size() == m, "add_row: row " + dims(row) + " does not broadcast over " + dims(a));
  Tensor out = Tensor::matrix(n, m);
  const auto& av = a.value().data();
  const auto& rv = row.value().data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.data()[i * m + j] = av[i * m + j] + rv[j];
  return a.tape().push(std::move(out), {a, row}, [a, row, n, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    if (t.needs_grad(a.id())) accumulate(t.grad_buffer(a.id()), g);
    if (t.needs_grad(row.id())) {
      std::vector<float>& dr = t.grad_buffer(row.id());
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += g[i * m + j];
        dr[j] += static_cast<float>(s);
      }
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "mul: shape mismatch " + dims(a) + " vs " + dims(b));
  Tensor out = a.value();
  out.drop_grad();
  const auto& bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= bv[i];
  return a.tape().push(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    if (t.needs_grad(a.id())) {
      std::vector<float>& da = t.grad_buffer(a.id());
      const auto& bv = b.value().data();
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * bv[i];
    }
    if (t.needs_grad(b.id())) {
      std::vector<float>& db = t.grad_buffer(b.id());
      const auto& av = a.value().data();
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += g[i] * av[i];
    }
  });
}

Var scale(const Var& a, float factor) {
  Tensor out = a.value();
  out.drop_grad();
  for (float& v : out.data()) v *= factor;
  return a.tape().push(std::move(out), {a}, [a, factor](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * factor;
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a.value();
  out.drop_grad();
  for (float& v : out.data()) {
    // keep the exp() argument non-positive
    if (v >= 0.0f) {
      v = 1.0f / (1.0f + std::exp(-v));
    } else {
      const float e = std::exp(v);
      v = e / (1.0f + e);
    }
  }
  return a.tape().push(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    const std::vector<float>& y = t.value_at(self).data();
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * y[i] * (1.0f - y[i]);
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  out.drop_grad();
  std::uint64_t active = 0;
  std::size_t i = 0;
  for (float& v : out.data()) {
    if (v > 0.0f) active ^= (i + 1) * 0x9E3779B97F4A7C15ULL;
    else v = 0.0f;
    ++i;
  }
  a.tape().note_branch(active);
  return a.tape().push(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    const std::vector<float>& x = a.value().data();
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t i = 0; i < da.size(); ++i)
      if (x[i] > 0.0f) da[i] += g[i];
  });
}

Var softmax_rows(const Var& a) {
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = Tensor::matrix(n, m);
  const auto& x = a.value().data();
  for (std::size_t i = 0; i < n; ++i) {
    const float* xr = x.data() + i * m;
    float* yr = out.data().data() + i * m;
    const float mx = *std::max_element(xr, xr + m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double e = std::exp(static_cast<double>(xr[j]) - mx);
      yr[j] = static_cast<float>(e);
      total += e;
    }
    for (std::size_t j = 0; j < m; ++j) yr[j] = static_cast<float>(yr[j] / total);
  }
  return a.tape().push(std::move(out), {a}, [a, n, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    const std::vector<float>& y = t.value_at(self).data();
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += static_cast<double>(g[i * m + j]) * y[i * m + j];
      for (std::size_t j = 0; j < m; ++j)
        da[i * m + j] += static_cast<float>(y[i * m + j] * (g[i * m + j] - dot));
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, float eps) {
  const std::size_t n = x.rows(), d = x.cols();
  require(d >= 1, "layer_norm: empty rows");
  require(gain.value().size() == d && bias.value().size() == d,
          "layer_norm: gain/bias " + dims(gain) + "/" + dims(bias) + " vs rows of " + dims(x));
  Tensor out = Tensor::matrix(n, d);
  // normalized values and inverse std per row, kept for backward
  auto xhat = std::make_shared<std::vector<double>>(n * d);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  const auto& xv = x.value().data();
  const auto& gv = gain.value().data();
  const auto& bv = bias.value().data();
  for (std::size_t i = 0; i < n; ++i) {
    const float* xr = xv.data() + i * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xr[j] - mu) * is;
      (*xhat)[i * d + j] = h;
      out.data()[i * d + j] = static_cast<float>(h * gv[j] + bv[j]);
    }
  }
  return x.tape().push(std::move(out), {x, gain, bias},
                       [x, gain, bias, n, d, xhat, inv_std](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    const auto& gv = gain.value().data();
    if (t.needs_grad(gain.id()) || t.needs_grad(bias.id())) {
      std::vector<double> dg(d, 0.0), db(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          dg[j] += g[i * d + j] * (*xhat)[i * d + j];
          db[j] += g[i * d + j];
        }
      if (t.needs_grad(gain.id())) {
        std::vector<float>& dst = t.grad_buffer(gain.id());
        for (std::size_t j = 0; j < d; ++j) dst[j] += static_cast<float>(dg[j]);
      }
      if (t.needs_grad(bias.id())) {
        std::vector<float>& dst = t.grad_buffer(bias.id());
        for (std::size_t j = 0; j < d; ++j) dst[j] += static_cast<float>(db[j]);
      }
    }
    if (t.needs_grad(x.id())) {
      std::vector<float>& dx = t.grad_buffer(x.id());
      for (std::size_t i = 0; i < n; ++i) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = static_cast<double>(g[i * d + j]) * gv[j];
          m1 += dh;
          m2 += dh * (*xhat)[i * d + j];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = static_cast<double>(g[i * d + j]) * gv[j];
          dx[i * d + j] +=
              static_cast<float>((*inv_std)[i] * (dh - m1 - (*xhat)[i * d + j] * m2));
        }
      }
    }
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  const std::size_t m = a.cols();
  require(begin < end && end <= a.rows(), "slice_rows: bad range for " + dims(a));
  const auto& av = a.value().data();
  Tensor out({end - begin, m},
             std::vector<float>(av.begin() + begin * m, av.begin() + end * m));
  return a.tape().push(std::move(out), {a}, [a, begin, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t k = 0; k < g.size(); ++k) da[begin * m + k] += g[k];
  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  const std::size_t n = a.rows(), m = a.cols(), w = end - begin;
  require(begin < end && end <= m, "slice_cols: bad range for " + dims(a));
  Tensor out = Tensor::matrix(n, w);
  const auto& av = a.value().data();
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(av.begin() + i * m + begin, w, out.data().begin() + i * w);
  return a.tape().push(std::move(out), {a}, [a, begin, n, m, w](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) da[i * m + begin + j] += g[i * w + j];
  });
}

namespace {

// Ops with a variable number of inputs register against the first input and
// fan gradients out to the rest themselves.
Var push_multi(std::span<const Var> parts, Tensor out, Tape::BackwardFn fn) {
  Tape& tape = parts.front().tape();
  bool any = false;
  for (const Var& p : parts) any = any || tape.requires_grad(p);
  if (!any) return tape.push(std::move(out), {parts.front()}, fn);
  // pick an input that requires grad so the node is marked differentiable
  for (const Var& p : parts)
    if (tape.requires_grad(p)) return tape.push(std::move(out), {parts.front(), p}, fn);
  return tape.push(std::move(out), {parts.front()}, fn);
}

}  // namespace

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const std::size_t m = parts.front().cols();
  std::size_t n = 0;
  for (const Var& p : parts) {
    require(p.cols() == m, "concat_rows: column mismatch " + dims(p));
    n += p.rows();
  }
  Tensor out = Tensor::matrix(n, m);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + offset);
    offset += p.value().size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push_multi(parts, std::move(out), [inputs](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::size_t off = 0;
    for (const Var& p : inputs) {
      const std::size_t len = p.value().size();
      if (t.needs_grad(p.id())) {
        std::vector<float>& dp = t.grad_buffer(p.id());
        for (std::size_t k = 0; k < len; ++k) dp[k] += g[off + k];
      }
      off += len;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t n = parts.front().rows();
  std::size_t m = 0;
  for (const Var& p : parts) {
    require(p.rows() == n, "concat_cols: row mismatch " + dims(p));
    m += p.cols();
  }
  Tensor out = Tensor::matrix(n, m);
  std::size_t col = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.cols();
    const auto& pv = p.value().data();
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(pv.begin() + i * w, w, out.data().begin() + i * m + col);
    col += w;
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push_multi(parts, std::move(out), [inputs, n, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::size_t c = 0;
    for (const Var& p : inputs) {
      const std::size_t w = p.cols();
      if (t.needs_grad(p.id())) {
        std::vector<float>& dp = t.grad_buffer(p.id());
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < w; ++j) dp[i * w + j] += g[i * m + c + j];
      }
      c += w;
    }
  });
}

Var gather_rows(const Var& a, std::span<const std::size_t> indices) {
  const std::size_t m = a.cols();
  require(!indices.empty(), "gather_rows: no indices");
  Tensor out = Tensor::matrix(indices.size(), m);
  const auto& av = a.value().data();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] < a.rows(), "gather_rows: index out of range for " + dims(a));
    std::copy_n(av.begin() + indices[r] * m, m, out.data().begin() + r * m);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return a.tape().push(std::move(out), {a}, [a, idx, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < m; ++j) da[idx[r] * m + j] += g[r * m + j];
  });
}

Var pad_rows(const Var& a, std::size_t rows) {
  const std::size_t n = a.rows(), m = a.cols();
  require(rows >= n, "pad_rows: target smaller than " + dims(a));
  Tensor out = Tensor::matrix(rows, m);
  std::copy(a.value().data().begin(), a.value().data().end(), out.data().begin());
  return a.tape().push(std::move(out), {a}, [a, n, m](Tape& t, std::size_t self) {
    const std::vector<float>& g = t.output_grad(self);
    std::vector<float>& da = t.grad_buffer(a.id());
    for (std::size_t k = 0; k < n * m; ++k) da[k] += g[k];
  });
}

Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
  require(rows * cols == a.value().size(), "reshape: element count differs for " + dims(a));
  Tensor out({rows, cols}, a.value().data());
  return a.tape().push(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    accumulate(t.grad_buffer(a.id()), t.output_grad(self));
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (float v : a.value().data()) s += v;
  Tensor out = Tensor::matrix(1, 1, static_cast<float>(s));
  return a.tape().push(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    const float g = t.output_grad(self)[0];
    for (float& v : t.grad_buffer(a.id())) v += g;
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  double s = 0.0;
  for (float v : a.value().data()) s += v;
  Tensor out = Tensor::matrix(1, 1, static_cast<float>(s / n));
  return a.tape().push(std::move(out), {a}, [a, n](Tape& t, std::size_t self) {
    const float g = static_cast<float>(t.output_grad(self)[0] / n);
    for (float& v : t.grad_buffer(a.id())) v += g;
  });
}

Var weighted_bce(const Var& scores, std::span<const float> labels, float w_pos, float w_neg,
                 float clamp) {
  const std::size_t n = scores.value().size();
  require(labels.size() == n, "weighted_bce: " + std::to_string(labels.size()) +
                                  " labels for " + dims(scores));
  require(n >= 1, "weighted_bce: empty input");
  const auto& x = scores.value().data();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::max(static_cast<double>(x[i]), static_cast<double>(clamp));
    const double q = std::max(1.0 - static_cast<double>(x[i]), static_cast<double>(clamp));
    total += w_pos * labels[i] * std::log(p) + w_neg * (1.0 - labels[i]) * std::log(q);
  }
  Tensor out = Tensor::matrix(1, 1, static_cast<float>(-total / static_cast<double>(n)));
  std::vector<float> y(labels.begin(), labels.end());
  return scores.tape().push(std::move(out), {scores},
                            [scores, y, w_pos, w_neg, clamp, n](Tape& t, std::size_t self) {
    const double g = t.output_grad(self)[0];
    const auto& x = scores.value().data();
    std::vector<float>& dx = t.grad_buffer(scores.id());
    const double c = -g / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      double d = 0.0;
      if (xi > clamp) d += w_pos * y[i] / xi;
      if (1.0 - xi > clamp) d -= w_neg * (1.0 - y[i]) / (1.0 - xi);
      dx[i] += static_cast<float>(c * d);
    }
  });
}

Var row_distance_mean(const Var& a, const Var& b, bool squared) {
  require(a.value().same_shape(b.value()),
          "row_distance_mean: shape mismatch " + dims(a) + " vs " + dims(b));
  const std::size_t n = a.rows(), m = a.cols();
  const auto& av = a.value().data();
  const auto& bv = b.value().data();
  auto norms = std::make_shared<std::vector<double>>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = static_cast<double>(av[i * m + j]) - bv[i * m + j];
      s += diff * diff;
    }
    (*norms)[i] = std::sqrt(s);
    total += squared ? s : (*norms)[i];
  }
  Tensor out = Tensor::matrix(1, 1, static_cast<float>(total / static_cast<double>(n)));
  return a.tape().push(std::move(out), {a, b},
                       [a, b, n, m, squared, norms](Tape& t, std::size_t self) {
    const double g = t.output_grad(self)[0] / static_cast<double>(n);
    const auto& av = a.value().data();
    const auto& bv = b.value().data();
    std::vector<float>* da = t.needs_grad(a.id()) ? &t.grad_buffer(a.id()) : nullptr;
    std::vector<float>* db = t.needs_grad(b.id()) ? &t.grad_buffer(b.id()) : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      double coef;
      if (squared) {
        coef = 2.0 * g;
      } else {
        if ((*norms)[i] == 0.0) continue;  // subgradient 0 at the kink
        coef = g / (*norms)[i];
      }
      for (std::size_t j = 0; j < m; ++j) {
        const float d = static_cast<float>(coef * (static_cast<double>(av[i * m + j]) - bv[i * m + j]));
        if (da) (*da)[i * m + j] += d;
        if (db) (*db)[i * m + j] -= d;
      }
    }
  });
}

Var mean_pairwise_cosine(const Var& a, float norm_clamp) {
  const std::size_t n = a.rows(), m = a.cols();
  const auto& av = a.value().data();
  auto unit = std::make_shared<std::vector<double>>(n * m);
  auto norms = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += static_cast<double>(av[i * m + j]) * av[i * m + j];
    const double nr = std::max(std::sqrt(s), static_cast<double>(norm_clamp));
    (*norms)[i] = nr;
    for (std::size_t j = 0; j < m; ++j) (*unit)[i * m + j] = av[i * m + j] / nr;
  }
  double total = 0.0;
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == k) continue;
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += (*unit)[i * m + j] * (*unit)[k * m + j];
        total += dot;
      }
    total /= static_cast<double>(n * (n - 1));
  }
  Tensor out = Tensor::matrix(1, 1, static_cast<float>(total));
  return a.tape().push(std::move(out), {a},
                       [a, n, m, unit, norms, norm_clamp](Tape& t, std::size_t self) {
    if (n < 2) return;
    const double g = t.output_grad(self)[0] * 2.0 / static_cast<double>(n * (n - 1));
    std::vector<double> total_unit(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) total_unit[j] += (*unit)[i * m + j];
    std::vector<float>& da = t.grad_buffer(a.id());
    std::vector<double> gu(m);
    for (std::size_t i = 0; i < n; ++i) {
      // d/du_i of sum_{p != q} u_p . u_q = 2 (sum_u - u_i)
      double proj = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        gu[j] = g * (total_unit[j] - (*unit)[i * m + j]);
        proj += gu[j] * (*unit)[i * m + j];
      }
      const bool clamped = (*norms)[i] <= static_cast<double>(norm_clamp);
      for (std::size_t j = 0; j < m; ++j) {
        const double d = clamped ? gu[j] : gu[j] - (*unit)[i * m + j] * proj;
        da[i * m + j] += static_cast<float>(d / (*norms)[i]);
      }
    }
  });
}

}  // namespace ops
}  // namespace sumkit
