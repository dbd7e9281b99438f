#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sumkit/autodiff.hpp"
#include "sumkit/config.hpp"
#include "sumkit/params.hpp"

namespace sumkit {

struct LossWeights {
  double alpha = 0.5;
  double beta = 0.3;
  double lambda = 0.2;

  static LossWeights from(const LossConfig& c) { return {c.alpha, c.beta, c.lambda}; }
};

// Position-wise (1x1 convolution) decoder mapping transformer features back
// to the frame-feature space. Layers are D -> D with ReLU between them.
struct ReconstructorParams {
  std::vector<Tensor> weights;  // D x D
  std::vector<Tensor> biases;   // 1 x D

  static ReconstructorParams init(std::size_t dim, std::size_t layers, Rng& rng);
  std::size_t dim() const { return weights.front().rows(); }
  void collect(ParamList& out, const std::string& prefix);
};

struct KeyframeSelection {
  std::vector<std::size_t> indices;  // strictly increasing
};

// Class weights used on keyframe / background terms. The default keeps the
// literal weighting (#keyframes/N on keyframes); `invert` swaps them.
struct ClassWeights {
  float keyframe = 0.0f;
  float background = 0.0f;
  bool degenerate = false;  // no keyframes or no background frames
};
ClassWeights class_weights(std::span<const float> labels, bool invert);

// Weighted binary cross entropy over frames; log arguments clamped at 1e-7.
Var classification_loss(const Var& scores, std::span<const float> labels,
                        bool invert_class_weight = false, bool* degenerate = nullptr);

// Top ceil(fraction * N) frames by score, ties to the lower index, at least
// two frames when N >= 2. Returned indices are sorted.
KeyframeSelection select_keyframes(std::span<const float> scores, double fraction);

Var reconstruct(Tape& tape, const Var& selected, ReconstructorParams& params);

// mse: (1/|X|) sum ||x - y||^2 ; l2: (1/|X|) sum ||x - y||.
Var reconstruction_loss(const Var& original, const Var& reconstructed, ReconMode mode);

// Mean pairwise cosine similarity of the rows; 0 for fewer than two rows.
Var diversity_loss(const Var& reconstructed);

struct LossBreakdown {
  Var total;
  double total_value = 0.0;
  double classification = 0.0;
  double diversity = 0.0;
  double reconstruction = 0.0;
  bool degenerate_labels = false;
  KeyframeSelection selection;
};

struct LossInputs {
  Var scores;                    // N x 1
  Var transformer_features;      // N x D
  const Tensor* frame_features;  // N x D, the raw input embeddings
  std::optional<std::span<const float>> labels;
};

// supervised: alpha Lc + beta Ld + lambda Lr ; unsupervised: beta Ld + lambda Lr.
// Keyframes for Ld/Lr are picked from the current scores and held fixed.
// Throws UsageError in supervised mode without labels.
LossBreakdown combined_loss(Tape& tape, const LossInputs& inputs, ReconstructorParams& recon,
                            const LossConfig& config, TrainMode mode);

}  // namespace sumkit
