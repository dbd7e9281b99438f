#pragma once

// Encoder-decoder frame-scoring transformer. Both stacks receive the
// attended frame embeddings plus sinusoidal positions; decoder
// self-attention is not causally masked. Blocks are pre-norm with
// residuals, and the score head is a linear map followed by a sigmoid.

#include <string>
#include <vector>

#include "sumkit/attention.hpp"
#include "sumkit/autodiff.hpp"
#include "sumkit/params.hpp"

namespace sumkit {

// PE(pos, 2i) = sin(pos / 10000^(2i/D)), PE(pos, 2i+1) = cos(same).
// Throws ConfigError for odd D.
Tensor positional_encoding(std::size_t length, std::size_t dim);

struct PaddedWindow {
  Tensor features;         // window_len x D, rows >= valid_len are zero
  std::size_t valid_len = 0;
  std::size_t offset = 0;  // index of the first frame in the source video
  std::vector<float> mask;  // 1 for valid rows

  std::size_t length() const { return features.rows(); }
};

// Contiguous, non-overlapping windows; the last one is zero padded.
std::vector<PaddedWindow> window_video(const Tensor& frames, std::size_t window_len);

struct LayerNormParams {
  Tensor gain, bias;  // 1 x D

  static LayerNormParams init(std::size_t dim);
  void collect(ParamList& out, const std::string& prefix);
};

struct FeedForwardParams {
  Tensor w1, b1;  // D x 4D, 1 x 4D
  Tensor w2, b2;  // 4D x D, 1 x D

  static FeedForwardParams init(std::size_t dim, Rng& rng);
  void collect(ParamList& out, const std::string& prefix);
};

struct EncoderLayerParams {
  LayerNormParams norm1;
  AttentionParams self_attn;
  LayerNormParams norm2;
  FeedForwardParams ffn;
};

struct DecoderLayerParams {
  LayerNormParams norm1;
  AttentionParams self_attn;
  LayerNormParams norm2;
  AttentionParams cross_attn;
  LayerNormParams norm3;
  FeedForwardParams ffn;
};

struct TransformerParams {
  std::size_t heads = 8;
  std::vector<EncoderLayerParams> encoder;
  std::vector<DecoderLayerParams> decoder;
  LayerNormParams encoder_norm;
  LayerNormParams decoder_norm;
  Tensor head_weight;  // D x 1
  Tensor head_bias;    // 1 x 1

  static TransformerParams init(std::size_t dim, std::size_t heads, std::size_t enc_layers,
                                std::size_t dec_layers, Rng& rng);
  std::size_t dim() const { return head_weight.rows(); }
  void collect(ParamList& out, const std::string& prefix);
};

struct TransformerOptions {
  std::size_t window_len = 256;
  bool positional_encoding = true;
  double dropout = 0.0;      // applied only when dropout_rng is set
  Rng* dropout_rng = nullptr;
};

struct ScoreOutput {
  Var scores;    // N x 1, in (0, 1)
  Var features;  // N x D, decoder output after the final norm
};

// Runs every window independently and concatenates the valid positions.
// Throws NumericError naming the layer if an activation becomes non-finite.
ScoreOutput score_frames(Tape& tape, const Var& fprime, TransformerParams& params,
                         const TransformerOptions& options);

}  // namespace sumkit
