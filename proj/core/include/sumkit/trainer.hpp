#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sumkit/checkpoint.hpp"
#include "sumkit/config.hpp"
#include "sumkit/evaluation.hpp"
#include "sumkit/feature_io.hpp"

namespace sumkit {

// One training video held in memory. `labels` stays empty in unsupervised
// runs; the loader never opens ground truth for them.
struct TrainVideo {
  std::string video_id;
  Tensor frames;
  Tensor text;
  FeatureKind text_kind = FeatureKind::captions;
  std::optional<std::vector<float>> labels;
};

// Loads the entries tagged `split` ("all" selects every entry).
std::vector<TrainVideo> load_training_videos(const DatasetManifest& manifest, const RunConfig& config,
                                             std::string_view split = "train");

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  std::size_t windows = 0;
  std::size_t steps = 0;
  double loss = 0.0;  // means over windows
  double classification = 0.0;
  double diversity = 0.0;
  double reconstruction = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Window-level minibatch training. Windows of every video are shuffled each
// epoch; each batch of `batch_size` windows averages its losses and takes one
// Adam step. `resume` continues from an earlier checkpoint.
TrainResult train(const std::vector<TrainVideo>& videos, const RunConfig& config,
                  std::optional<Checkpoint> resume = std::nullopt,
                  const EpochCallback& on_epoch = {});

TrainResult train(const DatasetManifest& manifest, const RunConfig& config,
                  std::string_view split = "train", const EpochCallback& on_epoch = {});

std::string epoch_log_json(const EpochLog& entry);

struct EvalProtocol {
  std::string split = "test";  // "all" evaluates every entry
  double budget_fraction = 0.15;
  TauVariant tau_variant = TauVariant::b;
  TextSource text_source = TextSource::automatic;
  std::optional<F1Aggregation> f1_mode;  // defaults to the manifest's convention

  static EvalProtocol from(const RunConfig& config, std::string split = "test");
};

// Summary of `scores` scored against the ground truth: F1 over the reference
// summaries (or the keyshots of the labels when none are stored) and, when
// annotator scores exist, mean tau / rho.
VideoMetrics evaluate_scores(const std::string& video_id, std::span<const float> scores,
                             const GroundTruth& gt, double fps, const EvalProtocol& protocol,
                             F1Aggregation f1_mode);

MetricReport evaluate_checkpoint(ModelParams& model, const DatasetManifest& manifest,
                                 const EvalProtocol& protocol);

}  // namespace sumkit
