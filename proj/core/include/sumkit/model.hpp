#pragma once

#include <cstdint>
#include <vector>

#include "sumkit/attention.hpp"
#include "sumkit/caption_fusion.hpp"
#include "sumkit/config.hpp"
#include "sumkit/feature_io.hpp"
#include "sumkit/losses.hpp"
#include "sumkit/transformer.hpp"

namespace sumkit {

// Every learned tensor of the summarizer.
struct ModelParams {
  ModelConfig config;
  FusionParams fusion;
  LgaParams lga;
  TransformerParams transformer;
  ReconstructorParams reconstructor;

  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  // Stable order: fusion, lga, transformer, reconstructor.
  ParamList parameters();
};

struct ForwardResult {
  Var text_tokens;
  Var attended;  // F'
  ScoreOutput output;
};

// Caption fusion -> language-guided attention -> frame-scoring transformer.
// `dropout_rng` enables dropout (training only).
ForwardResult forward(Tape& tape, ModelParams& model, const Tensor& frames, const Tensor& text,
                      FeatureKind text_kind, Rng* dropout_rng = nullptr);

// Inference helper returning one score per frame.
std::vector<float> score_video(ModelParams& model, const FeatureBundle& bundle);

}  // namespace sumkit
