#include "sumkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sumkit/errors.hpp"

namespace sumkit {

ReconstructorParams ReconstructorParams::init(std::size_t dim, std::size_t layers, Rng& rng) {
  if (layers < 1) throw ConfigError("reconstructor needs at least one layer");
  ReconstructorParams p;
  for (std::size_t i = 0; i < layers; ++i) {
    p.weights.push_back(Tensor::matrix(dim, dim));
    p.biases.push_back(Tensor::matrix(1, dim));
    init_uniform(p.weights.back(), rng, 1.0 / std::sqrt(static_cast<double>(dim)));
  }
  return p;
}

void ReconstructorParams::collect(ParamList& out, const std::string& prefix) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back({prefix + "layer" + std::to_string(i) + ".weight", &weights[i]});
    out.push_back({prefix + "layer" + std::to_string(i) + ".bias", &biases[i]});
  }
}

ClassWeights class_weights(std::span<const float> labels, bool invert) {
  const double n = static_cast<double>(labels.size());
  double k = 0.0;
  for (float y : labels) k += y;
  ClassWeights w;
  const double ratio = n > 0 ? k / n : 0.0;
  w.keyframe = static_cast<float>(invert ? 1.0 - ratio : ratio);
  w.background = static_cast<float>(invert ? ratio : 1.0 - ratio);
  w.degenerate = k == 0.0 || k == n;
  return w;
}

Var classification_loss(const Var& scores, std::span<const float> labels, bool invert_class_weight,
                        bool* degenerate) {
  if (scores.value().size() != labels.size()) {
    throw ShapeError("classification_loss: " + std::to_string(scores.value().size()) +
                     " scores vs " + std::to_string(labels.size()) + " labels");
  }
  const ClassWeights w = class_weights(labels, invert_class_weight);
  if (degenerate) *degenerate = w.degenerate;
  return ops::weighted_bce(scores, labels, w.keyframe, w.background);
}

KeyframeSelection select_keyframes(std::span<const float> scores, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("select fraction must lie in (0, 1]");
  const std::size_t n = scores.size();
  KeyframeSelection sel;
  if (n == 0) return sel;
  std::size_t k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, std::min<std::size_t>(2, n), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  sel.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(sel.indices.begin(), sel.indices.end());
  return sel;
}

Var reconstruct(Tape& tape, const Var& selected, ReconstructorParams& params) {
  if (selected.rows() == 0) throw UsageError("reconstruct: no selected frames");
  if (selected.cols() != params.dim()) {
    throw ShapeError("reconstruct: feature dim " + std::to_string(selected.cols()) +
                     " vs reconstructor dim " + std::to_string(params.dim()));
  }
  Var x = selected;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (i > 0) x = ops::relu(x);
    x = ops::add_row(ops::matmul(x, tape.param(params.weights[i])), tape.param(params.biases[i]));
  }
  return x;
}

Var reconstruction_loss(const Var& original, const Var& reconstructed, ReconMode mode) {
  if (original.rows() == 0) throw UsageError("reconstruction_loss: empty selection");
  return ops::row_distance_mean(original, reconstructed, mode == ReconMode::mse);
}

Var diversity_loss(const Var& reconstructed) { return ops::mean_pairwise_cosine(reconstructed); }

LossBreakdown combined_loss(Tape& tape, const LossInputs& in, ReconstructorParams& recon,
                            const LossConfig& config, TrainMode mode) {
  if (mode == TrainMode::supervised && !in.labels) {
    throw UsageError("supervised loss requires keyframe labels");
  }
  LossBreakdown out;
  const std::vector<float>& score_values = in.scores.value().data();
  out.selection = select_keyframes(score_values, config.select_fraction);
  for (std::size_t i : out.selection.indices) tape.note_branch(i + 1);

  const Var selected = ops::gather_rows(in.transformer_features, out.selection.indices);
  const Var reconstructed = reconstruct(tape, selected, recon);
  const Var original = ops::gather_rows(tape.constant(*in.frame_features), out.selection.indices);
  const Var lr = reconstruction_loss(original, reconstructed, config.recon_mode);
  const Var ld = diversity_loss(reconstructed);
  out.reconstruction = lr.value().data()[0];
  out.diversity = ld.value().data()[0];

  Var total = ops::add(ops::scale(ld, static_cast<float>(config.beta)),
                       ops::scale(lr, static_cast<float>(config.lambda)));
  if (mode == TrainMode::supervised) {
    const Var lc = classification_loss(in.scores, *in.labels, config.invert_class_weight,
                                       &out.degenerate_labels);
    out.classification = lc.value().data()[0];
    total = ops::add(ops::scale(lc, static_cast<float>(config.alpha)), total);
  }
  out.total = total;
  out.total_value = total.value().data()[0];
  return out;
}

}  // namespace sumkit
