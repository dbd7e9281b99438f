#include "sumkit/caption_fusion.hpp"

#include <cmath>

#include "sumkit/errors.hpp"

namespace sumkit {

FusionParams FusionParams::init(std::size_t m_fixed, std::size_t dim, Rng& rng) {
  FusionParams p;
  p.weight = Tensor::matrix(m_fixed * dim, dim);
  p.bias = Tensor::matrix(1, dim);
  init_uniform(p.weight, rng, 1.0 / std::sqrt(static_cast<double>(m_fixed * dim)));
  return p;
}

void FusionParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "weight", &weight});
  out.push_back({prefix + "bias", &bias});
}

std::vector<std::size_t> caption_sample_indices(std::size_t num_captions, std::size_t m_fixed) {
  if (m_fixed < 1) throw ConfigError("m_fixed must be >= 1");
  if (num_captions < 1) throw UsageError("at least one caption is required");
  std::vector<std::size_t> idx(m_fixed);
  if (m_fixed == 1) {
    idx[0] = (num_captions - 1 + 1) / 2;
    return idx;
  }
  const std::size_t span = num_captions - 1, steps = m_fixed - 1;
  for (std::size_t j = 0; j < m_fixed; ++j) {
    // floor((2 j span + steps) / (2 steps)) == round-half-up of j span / steps
    idx[j] = (2 * j * span + steps) / (2 * steps);
  }
  return idx;
}

Tensor sample_captions(const Tensor& captions, std::size_t m_fixed) {
  const auto idx = caption_sample_indices(captions.rows(), m_fixed);
  const std::size_t d = captions.cols();
  Tensor out = Tensor::matrix(m_fixed, d);
  for (std::size_t j = 0; j < m_fixed; ++j) {
    const auto src = captions.row(idx[j]);
    std::copy(src.begin(), src.end(), out.row(j).begin());
  }
  return out;
}

Var fuse_text(const Var& sampled, const Var& weight, const Var& bias) {
  const std::size_t flat = sampled.value().size();
  if (weight.rows() != flat || bias.value().size() != weight.cols()) {
    throw ShapeError("fuse_text: sampled " + sampled.value().shape_string() + " vs weight " +
                     weight.value().shape_string());
  }
  return ops::add_row(ops::matmul(ops::reshape(sampled, 1, flat), weight), bias);
}

Var fuse_text(Tape& tape, const Tensor& sampled, FusionParams& params) {
  return fuse_text(tape.constant(sampled), tape.param(params.weight), tape.param(params.bias));
}

TextMode text_mode_for(FeatureKind kind) {
  return kind == FeatureKind::query ? TextMode::query : TextMode::generic;
}

Var text_tokens_for_attention(Tape& tape, const Tensor& text, FeatureKind kind, TextMode mode,
                              FusionParams& params, bool fused_only) {
  if (mode == TextMode::query) {
    if (kind != FeatureKind::query) throw UsageError("query mode requires query features");
    if (text.rows() != 1) throw UsageError("query features must be a single row");
    return tape.constant(text);
  }
  if (kind != FeatureKind::captions) throw UsageError("generic mode requires caption features");
  const Tensor sampled = sample_captions(text, params.m_fixed());
  const Var fused = fuse_text(tape, sampled, params);
  if (fused_only) return fused;
  const Var parts[] = {tape.constant(sampled), fused};
  return ops::concat_rows(parts);
}

}  // namespace sumkit
