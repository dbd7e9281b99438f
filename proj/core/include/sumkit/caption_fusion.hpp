#pragma once

#include <string>
#include <vector>

#include "sumkit/autodiff.hpp"
#include "sumkit/feature_io.hpp"
#include "sumkit/params.hpp"

namespace sumkit {

// Linear map from m_fixed concatenated caption embeddings to one D-vector.
struct FusionParams {
  Tensor weight;  // (m_fixed * D) x D
  Tensor bias;    // 1 x D

  static FusionParams init(std::size_t m_fixed, std::size_t dim, Rng& rng);
  std::size_t m_fixed() const { return weight.rows() / bias.cols(); }
  std::size_t dim() const { return bias.cols(); }
  void collect(ParamList& out, const std::string& prefix);
};

// round(j * (M - 1) / (m_fixed - 1)) for j = 0..m_fixed-1, halves rounded up.
// With m_fixed == 1 the middle caption is taken. Throws ConfigError when
// m_fixed < 1 and UsageError when M < 1.
std::vector<std::size_t> caption_sample_indices(std::size_t num_captions, std::size_t m_fixed);
Tensor sample_captions(const Tensor& captions, std::size_t m_fixed);

// Concatenates the sampled rows into one row and applies the linear map.
Var fuse_text(const Var& sampled, const Var& weight, const Var& bias);
Var fuse_text(Tape& tape, const Tensor& sampled, FusionParams& params);

enum class TextMode { generic, query };

// Key/value tokens for language-guided attention.
//   query   -> the single query row (T = 1)
//   generic -> m_fixed sampled captions followed by the fused vector
//              (T = m_fixed + 1), or only the fused vector when fused_only.
Var text_tokens_for_attention(Tape& tape, const Tensor& text, FeatureKind kind, TextMode mode,
                              FusionParams& params, bool fused_only);

TextMode text_mode_for(FeatureKind kind);

}  // namespace sumkit
