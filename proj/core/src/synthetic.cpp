#include "sumkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sumkit/errors.hpp"
#include "sumkit/rng.hpp"
#include "sumkit/summary.hpp"

namespace sumkit {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTopicStream = 0x70;
constexpr std::uint64_t kVideoStream = 0x1000;
constexpr std::uint64_t kTwoTopicStream = 0x2000;

std::vector<float> random_unit(Rng& rng, std::size_t d) {
  std::vector<float> v(d);
  double norm = 0.0;
  while (norm < 1e-12) {
    norm = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(rng.normal());
      norm += static_cast<double>(x) * x;
    }
  }
  const double inv = 1.0 / std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x * inv);
  return v;
}

double norm_for(const SyntheticOptions& o) {
  return o.embedding_norm > 0.0 ? o.embedding_norm : std::sqrt(static_cast<double>(o.dim));
}

// length * normalize(base + noise * g / sqrt(d)) written into `out`; the
// noise vector has expected norm `noise` relative to the unit base.
void noisy_copy(std::span<const float> base, double noise, Rng& rng, std::span<float> out,
                double length) {
  const double scale = noise / std::sqrt(static_cast<double>(base.size()));
  double norm = 0.0;
  std::vector<double> tmp(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    tmp[i] = base[i] + scale * rng.normal();
    norm += tmp[i] * tmp[i];
  }
  const double inv = norm > 0.0 ? length / std::sqrt(norm) : 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = static_cast<float>(tmp[i] * inv);
}

std::string video_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn%03zu", index);
  return buf;
}

std::vector<std::size_t> full_length_shots(const std::vector<std::size_t>& b) {
  std::size_t longest = 0;
  for (std::size_t s = 0; s + 1 < b.size(); ++s) longest = std::max(longest, b[s + 1] - b[s]);
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s + 1 < b.size(); ++s) {
    if (b[s + 1] - b[s] == longest) out.push_back(s);
  }
  return out;
}

void fill_background(Tensor& frames, const std::vector<std::size_t>& b, std::size_t shot,
                     std::size_t first, double noise, double length, Rng& rng) {
  const auto scene = random_unit(rng, frames.cols());
  for (std::size_t f = first; f < b[shot + 1]; ++f) noisy_copy(scene, noise, rng, frames.row(f), length);
}

}  // namespace

void SyntheticOptions::validate() const {
  if (!(keyframe_fraction > 0.0 && keyframe_fraction < 1.0)) {
    throw ConfigError("keyframe_fraction must lie in (0, 1)");
  }
  if (dim < 4) throw ConfigError("synthetic dim must be >= 4");
  if (n_videos < 1 || n_frames < 2) throw ConfigError("need >= 1 video of >= 2 frames");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (n_topics < 1 || n_captions < 1 || annotators < 1) {
    throw ConfigError("n_topics, n_captions and annotators must be >= 1");
  }
  if (distractor_shots > 0 && n_topics < 2) throw ConfigError("distractors need >= 2 topics");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in [0, 1)");
  if (frame_noise < 0 || caption_noise < 0 || query_noise < 0) throw ConfigError("noise must be >= 0");
  if (!(embedding_norm >= 0.0)) throw ConfigError("embedding_norm must be >= 0");
}

Tensor synthetic_topics(const SyntheticOptions& options) {
  Rng rng(mix_seed(options.seed, kTopicStream));
  Tensor topics = Tensor::matrix(options.n_topics, options.dim);
  for (std::size_t t = 0; t < options.n_topics; ++t) {
    const auto v = random_unit(rng, options.dim);
    std::copy(v.begin(), v.end(), topics.row(t).begin());
  }
  return topics;
}

SyntheticVideo synthesize_video(const SyntheticOptions& options, std::size_t index,
                                const Tensor& topics) {
  options.validate();
  Rng rng(mix_seed(options.seed, kVideoStream + index));
  const std::size_t n = options.n_frames;
  const std::size_t d = options.dim;

  const double len = norm_for(options);
  SyntheticVideo v;
  v.video_id = video_name(index);
  v.topic = index % options.n_topics;
  v.frames = Tensor::matrix(n, d);

  const auto boundaries = uniform_shot_boundaries(n, options.fps);
  const std::size_t shot_len = boundaries[1] - boundaries[0];
  const auto k = static_cast<std::size_t>(
      std::max(1.0, std::round(options.keyframe_fraction * static_cast<double>(n))));
  const std::size_t key_shots = (k + shot_len - 1) / shot_len;

  auto candidates = full_length_shots(boundaries);
  if (candidates.size() < key_shots + options.distractor_shots) {
    throw ConfigError("video too short for the requested keyframes and distractors");
  }
  rng.shuffle(candidates);
  v.keyframe_shots.assign(candidates.begin(), candidates.begin() + key_shots);
  v.distractor_shots.assign(candidates.begin() + key_shots,
                            candidates.begin() + key_shots + options.distractor_shots);
  std::sort(v.keyframe_shots.begin(), v.keyframe_shots.end());
  std::sort(v.distractor_shots.begin(), v.distractor_shots.end());

  std::vector<float> labels(n, 0.0f);
  std::size_t remaining = k;
  for (std::size_t s : v.keyframe_shots) {
    for (std::size_t f = boundaries[s]; f < boundaries[s + 1] && remaining > 0; ++f, --remaining) {
      labels[f] = 1.0f;
    }
  }

  const auto topic = topics.row(v.topic);
  std::vector<std::uint8_t> kind(boundaries.size() - 1, 0);  // 0 background, 1 key, 2 distractor
  for (std::size_t s : v.keyframe_shots) kind[s] = 1;
  for (std::size_t s : v.distractor_shots) kind[s] = 2;
  for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
    if (kind[s] == 1) {
      std::size_t f = boundaries[s];
      for (; f < boundaries[s + 1] && labels[f] > 0.5f; ++f) {
        noisy_copy(topic, options.frame_noise, rng, v.frames.row(f), len);
      }
      if (f < boundaries[s + 1]) fill_background(v.frames, boundaries, s, f, options.frame_noise, len, rng);
    } else if (kind[s] == 2) {
      const std::size_t other = (v.topic + 1 + rng.below(options.n_topics - 1)) % options.n_topics;
      for (std::size_t f = boundaries[s]; f < boundaries[s + 1]; ++f) {
        noisy_copy(topics.row(other), options.frame_noise, rng, v.frames.row(f), len);
      }
    } else {
      fill_background(v.frames, boundaries, s, boundaries[s], options.frame_noise, len, rng);
    }
  }

  v.captions = Tensor::matrix(options.n_captions, d);
  for (std::size_t c = 0; c < options.n_captions; ++c) {
    noisy_copy(topic, options.caption_noise, rng, v.captions.row(c), len);
  }
  v.query = Tensor::matrix(1, d);
  noisy_copy(topic, options.query_noise, rng, v.query.row(0), len);

  GroundTruth& gt = v.ground_truth;
  gt.video_id = v.video_id;
  gt.num_frames = n;
  gt.keyframe_labels = labels;
  gt.shot_boundaries = boundaries;
  for (std::size_t a = 0; a < options.annotators; ++a) {
    std::vector<float> scores(n);
    for (std::size_t f = 0; f < n; ++f) {
      scores[f] = static_cast<float>(labels[f] > 0.5f ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.4));
    }
    gt.annotator_scores.push_back(std::move(scores));
  }
  const auto keyshots = keyframes_to_keyshots(labels, boundaries, 0.15);
  for (std::size_t a = 0; a < options.annotators; ++a) {
    gt.reference_summaries.emplace_back(keyshots.begin(), keyshots.end());
  }
  return v;
}

DatasetManifest generate_synthetic_dataset(const SyntheticOptions& options, const fs::path& out_dir) {
  options.validate();
  if (!fs::is_directory(out_dir)) {
    throw ConfigError("output directory does not exist: " + out_dir.string());
  }
  const Tensor topics = synthetic_topics(options);
  std::size_t n_test = static_cast<std::size_t>(
      std::round(options.test_fraction * static_cast<double>(options.n_videos)));
  if (options.test_fraction > 0.0 && options.n_videos >= 2) n_test = std::max<std::size_t>(n_test, 1);
  n_test = std::min(n_test, options.n_videos - 1);

  DatasetManifest manifest;
  manifest.dataset = "synthetic";
  manifest.f1_mode = "avg";
  for (std::size_t i = 0; i < options.n_videos; ++i) {
    SyntheticVideo v = synthesize_video(options, i, topics);
    ManifestEntry e;
    e.video_id = v.video_id;
    e.frames = out_dir / (v.video_id + ".frames.feat");
    e.captions = out_dir / (v.video_id + ".captions.feat");
    e.query = out_dir / (v.video_id + ".query.feat");
    e.ground_truth = out_dir / (v.video_id + ".gt.json");
    e.split = i + n_test >= options.n_videos ? "test" : "train";

    write_feature_file({v.video_id, FeatureKind::frames, options.fps, v.frames}, e.frames);
    write_feature_file({v.video_id, FeatureKind::captions, options.fps, v.captions}, *e.captions);
    write_feature_file({v.video_id, FeatureKind::query, options.fps, v.query}, *e.query);
    write_ground_truth(v.ground_truth, *e.ground_truth);
    manifest.entries.push_back(std::move(e));
  }
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

TwoTopicVideo synthesize_two_topic_video(const SyntheticOptions& options, std::size_t topic_a,
                                         std::size_t topic_b, std::size_t shots_per_topic) {
  options.validate();
  if (topic_a >= options.n_topics || topic_b >= options.n_topics || topic_a == topic_b) {
    throw UsageError("two distinct topics below n_topics are required");
  }
  const Tensor topics = synthetic_topics(options);
  Rng rng(mix_seed(options.seed, kTwoTopicStream + topic_a * options.n_topics + topic_b));

  const double len = norm_for(options);
  TwoTopicVideo v;
  v.fps = options.fps;
  v.boundaries = uniform_shot_boundaries(options.n_frames, options.fps);
  v.frames = Tensor::matrix(options.n_frames, options.dim);
  auto candidates = full_length_shots(v.boundaries);
  if (candidates.size() < 2 * shots_per_topic) throw ConfigError("video too short for two topics");
  rng.shuffle(candidates);
  v.shots_a.assign(candidates.begin(), candidates.begin() + shots_per_topic);
  v.shots_b.assign(candidates.begin() + shots_per_topic, candidates.begin() + 2 * shots_per_topic);
  std::sort(v.shots_a.begin(), v.shots_a.end());
  std::sort(v.shots_b.begin(), v.shots_b.end());

  for (std::size_t s = 0; s + 1 < v.boundaries.size(); ++s) {
    const bool in_a = std::binary_search(v.shots_a.begin(), v.shots_a.end(), s);
    const bool in_b = std::binary_search(v.shots_b.begin(), v.shots_b.end(), s);
    if (in_a || in_b) {
      const auto topic = topics.row(in_a ? topic_a : topic_b);
      for (std::size_t f = v.boundaries[s]; f < v.boundaries[s + 1]; ++f) {
        noisy_copy(topic, options.frame_noise, rng, v.frames.row(f), len);
      }
    } else {
      fill_background(v.frames, v.boundaries, s, v.boundaries[s], options.frame_noise, len, rng);
    }
  }
  v.query_a = Tensor::matrix(1, options.dim);
  v.query_b = Tensor::matrix(1, options.dim);
  noisy_copy(topics.row(topic_a), options.query_noise, rng, v.query_a.row(0), len);
  noisy_copy(topics.row(topic_b), options.query_noise, rng, v.query_b.row(0), len);
  return v;
}

}  // namespace sumkit
