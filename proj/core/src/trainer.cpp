#include "sumkit/trainer.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "sumkit/errors.hpp"
#include "sumkit/losses.hpp"
#include "sumkit/model.hpp"
#include "sumkit/summary.hpp"

namespace sumkit {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5f;
constexpr std::uint64_t kDropoutStream = 0xd7;

struct WindowRef {
  std::size_t video = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
};

Tensor row_block(const Tensor& t, std::size_t first, std::size_t count) {
  std::vector<float> data(t.data().begin() + static_cast<std::ptrdiff_t>(first * t.cols()),
                          t.data().begin() + static_cast<std::ptrdiff_t>((first + count) * t.cols()));
  return Tensor({count, t.cols()}, std::move(data));
}

std::string describe(const WindowRef& w, const std::vector<TrainVideo>& videos) {
  return videos[w.video].video_id + " frames [" + std::to_string(w.offset) + ", " +
         std::to_string(w.offset + w.length) + ")";
}

}  // namespace

std::vector<TrainVideo> load_training_videos(const DatasetManifest& manifest, const RunConfig& config,
                                             std::string_view split) {
  const auto entries = manifest.split(split);
  if (entries.empty()) throw UsageError("no manifest entries in split '" + std::string(split) + "'");
  const bool supervised = config.train.mode == TrainMode::supervised;
  std::vector<TrainVideo> out;
  for (const ManifestEntry* e : entries) {
    if (supervised && !e->ground_truth) {
      throw ConfigError("supervised training needs ground truth for every video; " + e->video_id +
                        " has none");
    }
    FeatureBundle b = load_bundle(*e, config.train.text_source);
    TrainVideo v;
    v.video_id = e->video_id;
    v.frames = std::move(b.frames);
    v.text = std::move(b.text);
    v.text_kind = b.text_kind;
    if (supervised) {
      GroundTruth gt = read_ground_truth(*e->ground_truth);
      if (!gt.has_labels()) throw ConfigError(e->video_id + ": ground truth has no keyframe labels");
      if (gt.num_frames != v.frames.rows()) {
        throw ValidationError(e->video_id + ": ground truth covers " + std::to_string(gt.num_frames) +
                              " frames but features have " + std::to_string(v.frames.rows()));
      }
      v.labels = std::move(gt.keyframe_labels);
    }
    out.push_back(std::move(v));
  }
  return out;
}

TrainResult train(const std::vector<TrainVideo>& videos, const RunConfig& config,
                  std::optional<Checkpoint> resume, const EpochCallback& on_epoch) {
  config.validate();
  if (videos.empty()) throw UsageError("nothing to train on");
  const bool supervised = config.train.mode == TrainMode::supervised;
  const std::size_t window = config.model.window_len;

  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  if (resume) {
    require_matching_config(*resume, config.model);
    ck = std::move(*resume);
  } else {
    ck.model = ModelParams::init(config.model, config.train.seed);
    ck.config_hash = model_config_hash(config.model);
  }
  ck.optimizer.options.lr = config.train.lr;
  ck.optimizer.options.weight_decay = config.train.weight_decay;

  std::vector<WindowRef> windows;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const TrainVideo& tv = videos[v];
    if (supervised && !tv.labels) throw ConfigError(tv.video_id + ": supervised training needs labels");
    if (tv.labels && tv.labels->size() != tv.frames.rows()) {
      throw ShapeError(tv.video_id + ": label count does not match frame count");
    }
    for (std::size_t off = 0; off < tv.frames.rows(); off += window) {
      windows.push_back({v, off, std::min(window, tv.frames.rows() - off)});
    }
  }

  const ParamList params = ck.model.parameters();

  for (std::size_t epoch = 0; epoch < config.train.epochs; ++epoch) {
    // streams keyed by the absolute epoch so a resumed run continues exactly
    Rng shuffle_rng(mix_seed(mix_seed(config.train.seed, kShuffleStream), ck.epoch));
    Rng dropout_rng(mix_seed(mix_seed(config.train.seed, kDropoutStream), ck.epoch));
    Rng* dropout = config.model.dropout > 0.0 ? &dropout_rng : nullptr;
    std::vector<WindowRef> order = windows;
    shuffle_rng.shuffle(order);
    EpochLog log;
    log.epoch = ck.epoch + 1;

    for (std::size_t start = 0; start < order.size(); start += config.train.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.train.batch_size);
      const float inv_batch = 1.0f / static_cast<float>(stop - start);
      zero_grads(params);
      for (std::size_t i = start; i < stop; ++i) {
        const WindowRef& w = order[i];
        const TrainVideo& tv = videos[w.video];
        const Tensor frames = row_block(tv.frames, w.offset, w.length);
        std::optional<std::span<const float>> labels;
        if (supervised) labels = std::span<const float>(*tv.labels).subspan(w.offset, w.length);

        Tape tape;
        std::optional<ForwardResult> fwd;
        try {
          fwd = forward(tape, ck.model, frames, tv.text, tv.text_kind, dropout);
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(log.epoch) + ", " + describe(w, videos) + ": " + e.what());
        }
        LossInputs in{fwd->output.scores, fwd->output.features, &frames, labels};
        const LossBreakdown loss =
            combined_loss(tape, in, ck.model.reconstructor, config.loss, config.train.mode);
        if (!std::isfinite(loss.total_value)) {
          std::ostringstream os;
          os << "non-finite loss in epoch " << log.epoch << " on " << describe(w, videos)
             << ": classification=" << loss.classification << " diversity=" << loss.diversity
             << " reconstruction=" << loss.reconstruction;
          throw NumericError(os.str());
        }
        tape.backward(ops::scale(loss.total, inv_batch));
        log.loss += loss.total_value;
        log.classification += loss.classification;
        log.diversity += loss.diversity;
        log.reconstruction += loss.reconstruction;
        ++log.windows;
      }
      adam_step(params, ck.optimizer);
      ++log.steps;
    }
    const double n = static_cast<double>(log.windows);
    log.loss /= n;
    log.classification /= n;
    log.diversity /= n;
    log.reconstruction /= n;
    ++ck.epoch;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  zero_grads(params);
  for (const auto& p : params) p.tensor->drop_grad();
  return result;
}

TrainResult train(const DatasetManifest& manifest, const RunConfig& config, std::string_view split,
                  const EpochCallback& on_epoch) {
  return train(load_training_videos(manifest, config, split), config, std::nullopt, on_epoch);
}

std::string epoch_log_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["windows"] = e.windows;
  j["steps"] = e.steps;
  j["loss"] = e.loss;
  j["classification"] = e.classification;
  j["diversity"] = e.diversity;
  j["reconstruction"] = e.reconstruction;
  return j.dump();
}

EvalProtocol EvalProtocol::from(const RunConfig& config, std::string split) {
  EvalProtocol p;
  p.split = std::move(split);
  p.budget_fraction = config.eval.budget_fraction;
  p.tau_variant = config.eval.tau_variant;
  p.text_source = config.train.text_source;
  return p;
}

VideoMetrics evaluate_scores(const std::string& video_id, std::span<const float> scores,
                             const GroundTruth& gt, double fps, const EvalProtocol& protocol,
                             F1Aggregation f1_mode) {
  if (gt.num_frames != scores.size()) {
    throw ShapeError(video_id + ": " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(gt.num_frames) + " ground-truth frames");
  }
  const auto boundaries = shot_boundaries_for(&gt, scores.size(), fps);
  const Summary summary = build_summary(scores, boundaries, protocol.budget_fraction);

  std::vector<std::vector<std::uint8_t>> refs;
  for (const auto& r : gt.reference_summaries) {
    std::vector<std::uint8_t> mask(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) mask[i] = r[i] > 0.5f ? 1 : 0;
    refs.push_back(std::move(mask));
  }
  if (refs.empty() && gt.has_labels()) refs.push_back(keyframes_to_keyshots(gt.keyframe_labels, boundaries, protocol.budget_fraction));
  if (refs.empty()) throw UsageError(video_id + ": ground truth has neither references nor labels");

  VideoMetrics m;
  m.video_id = video_id;
  for (const auto& r : refs) m.per_reference.push_back(prf1(summary.frame_mask, r));
  m.f1 = multi_ref_f1(summary.frame_mask, refs, f1_mode);
  if (!gt.annotator_scores.empty() && scores.size() >= 2) {
    const RankMetrics rm = rank_metrics_per_annotator(scores, gt.annotator_scores, protocol.tau_variant);
    m.has_rank_metrics = true;
    m.tau = rm.tau;
    m.rho = rm.rho;
  }
  return m;
}

MetricReport evaluate_checkpoint(ModelParams& model, const DatasetManifest& manifest,
                                 const EvalProtocol& protocol) {
  const auto entries = manifest.split(protocol.split);
  if (entries.empty()) {
    throw UsageError("no manifest entries to evaluate in split '" + protocol.split + "'");
  }
  const F1Aggregation mode = protocol.f1_mode.value_or(parse_f1_aggregation(manifest.f1_mode));
  MetricReport report;
  report.f1_mode = mode == F1Aggregation::max ? "max" : "avg";
  for (const ManifestEntry* e : entries) {
    if (!e->ground_truth) throw UsageError(e->video_id + ": evaluation needs ground truth");
    const FeatureBundle bundle = load_bundle(*e, protocol.text_source);
    const GroundTruth gt = read_ground_truth(*e->ground_truth);
    const std::vector<float> scores = score_video(model, bundle);
    report.videos.push_back(evaluate_scores(e->video_id, scores, gt, bundle.fps, protocol, mode));
  }
  report.finalize();
  return report;
}

}  // namespace sumkit
