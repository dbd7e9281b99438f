#include "sumkit/attention.hpp"

#include <cmath>
#include <vector>

#include "sumkit/errors.hpp"

namespace sumkit {

Var attention_weights(const Var& q, const Var& k, const Var* key_mask) {
  if (q.cols() != k.cols() || q.cols() == 0) {
    throw ShapeError("attention: query " + q.value().shape_string() + " vs key " +
                     k.value().shape_string());
  }
  Var logits = ops::scale(ops::matmul_nt(q, k), 1.0f / std::sqrt(static_cast<float>(q.cols())));
  if (key_mask) logits = ops::add_row(logits, *key_mask);
  return ops::softmax_rows(logits);
}

Var attention(const Var& q, const Var& k, const Var& v, const Var* key_mask) {
  if (k.rows() != v.rows()) {
    throw ShapeError("attention: " + std::to_string(k.rows()) + " keys but " +
                     std::to_string(v.rows()) + " values");
  }
  return ops::matmul(attention_weights(q, k, key_mask), v);
}

AttentionParams AttentionParams::init(std::size_t dim, Rng& rng) {
  AttentionParams p = zeros(dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  init_uniform(p.wq, rng, bound);
  init_uniform(p.wk, rng, bound);
  init_uniform(p.wv, rng, bound);
  init_uniform(p.wo, rng, bound);
  return p;
}

AttentionParams AttentionParams::zeros(std::size_t dim) {
  AttentionParams p;
  p.wq = p.wk = p.wv = p.wo = Tensor::matrix(dim, dim);
  return p;
}

void AttentionParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "wq", &wq});
  out.push_back({prefix + "wk", &wk});
  out.push_back({prefix + "wv", &wv});
  out.push_back({prefix + "wo", &wo});
}

BoundAttention bind(Tape& tape, AttentionParams& p) {
  return {tape.param(p.wq), tape.param(p.wk), tape.param(p.wv), tape.param(p.wo)};
}

Var multi_head_attention(const Var& queries, const Var& keys_values, const BoundAttention& w,
                         std::size_t heads, const Var* key_mask) {
  const std::size_t dim = w.wq.cols();
  if (heads == 0 || dim % heads != 0) throw ShapeError("attention heads must divide the model dim");
  const Var q = ops::matmul(queries, w.wq);
  const Var k = ops::matmul(keys_values, w.wk);
  const Var v = ops::matmul(keys_values, w.wv);
  if (heads == 1) return ops::matmul(attention(q, k, v, key_mask), w.wo);
  const std::size_t dh = dim / heads;
  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t b = h * dh, e = b + dh;
    outs.push_back(attention(ops::slice_cols(q, b, e), ops::slice_cols(k, b, e),
                             ops::slice_cols(v, b, e), key_mask));
  }
  return ops::matmul(ops::concat_cols(outs), w.wo);
}

LgaParams LgaParams::init(std::size_t dim, std::size_t heads, Rng& rng) {
  LgaParams p;
  p.heads = heads;
  p.proj = AttentionParams::init(dim, rng);
  return p;
}

void LgaParams::collect(ParamList& out, const std::string& prefix) { proj.collect(out, prefix); }

Var language_guided_attention(Tape& tape, const Var& frames, const Var& text_tokens,
                              LgaParams& params, bool residual) {
  if (!frames.valid() || !text_tokens.valid() || frames.value().empty() || text_tokens.value().empty()) {
    throw UsageError("language-guided attention needs at least one frame and one text token");
  }
  if (frames.cols() != params.proj.wq.rows() || text_tokens.cols() != params.proj.wk.rows()) {
    throw ShapeError("language-guided attention: embedding dim does not match parameters");
  }
  const Var out =
      multi_head_attention(frames, text_tokens, bind(tape, params.proj), params.heads, nullptr);
  return residual ? ops::add(out, frames) : out;
}

}  // namespace sumkit
