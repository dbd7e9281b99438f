#pragma once

#include <optional>
#include <string>

#include "sumkit/autodiff.hpp"
#include "sumkit/params.hpp"

namespace sumkit {

// softmax(Q K^T / sqrt(d_k) + mask) as an [n x m] matrix. The optional mask
// is a 1 x m row added to every row of logits (0 for live keys, a large
// negative value for padded keys).
Var attention_weights(const Var& q, const Var& k, const Var* key_mask = nullptr);

// softmax(Q K^T / sqrt(d_k)) V
Var attention(const Var& q, const Var& k, const Var& v, const Var* key_mask = nullptr);

// Projection matrices of one multi-head attention block. Heads are column
// blocks of the D x D projections: head i uses columns [i*D/h, (i+1)*D/h).
struct AttentionParams {
  Tensor wq, wk, wv, wo;  // D x D each

  static AttentionParams init(std::size_t dim, Rng& rng);
  static AttentionParams zeros(std::size_t dim);
  void collect(ParamList& out, const std::string& prefix);
};

struct BoundAttention {
  Var wq, wk, wv, wo;
};
BoundAttention bind(Tape& tape, AttentionParams& p);

// Concat(head_1..head_h) W^O with head_i = Attention(X_q W^Q_i, X_kv W^K_i, X_kv W^V_i).
Var multi_head_attention(const Var& queries, const Var& keys_values, const BoundAttention& w,
                         std::size_t heads, const Var* key_mask = nullptr);

// Language-guided attention: frames are queries, text tokens are keys/values.
struct LgaParams {
  std::size_t heads = 4;
  AttentionParams proj;

  static LgaParams init(std::size_t dim, std::size_t heads, Rng& rng);
  void collect(ParamList& out, const std::string& prefix);
};

// Returns F' (N x D). With residual=true the raw frames are added to the
// attention output. Throws UsageError when frames or tokens are empty.
Var language_guided_attention(Tape& tape, const Var& frames, const Var& text_tokens,
                              LgaParams& params, bool residual);

}  // namespace sumkit
