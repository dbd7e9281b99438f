#pragma once

// Seeded synthetic datasets with a known answer.
//
// A small vocabulary of unit "topic" directions is drawn from the seed.
// Video v is about topic v % n_topics: its keyframes are noisy copies of that
// topic, its captions and query are (less) noisy copies too. The remaining
// shots are background (a random scene direction per shot). Optional
// distractor shots are built from a different topic; with them a scorer that
// ignores the text cannot tell keyframes from distractors.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sumkit/feature_io.hpp"

namespace sumkit {

struct SyntheticOptions {
  std::uint64_t seed = 0;
  std::size_t n_videos = 8;
  std::size_t n_frames = 200;
  std::size_t dim = 32;
  double keyframe_fraction = 0.15;
  double fps = 2.0;
  std::size_t n_topics = 4;
  std::size_t n_captions = 5;
  std::size_t distractor_shots = 0;
  std::size_t annotators = 3;
  double frame_noise = 0.5;
  double caption_noise = 0.3;
  double query_noise = 0.1;
  // Norm of every generated embedding; 0 means sqrt(dim), i.e. roughly unit
  // scale per coordinate, comparable to the positional encodings.
  double embedding_norm = 0.0;
  double test_fraction = 0.25;  // trailing videos tagged "test"

  void validate() const;  // ConfigError on out-of-range values
};

struct SyntheticVideo {
  std::string video_id;
  std::size_t topic = 0;
  Tensor frames;    // N x D
  Tensor captions;  // n_captions x D
  Tensor query;     // 1 x D
  GroundTruth ground_truth;
  std::vector<std::size_t> keyframe_shots;
  std::vector<std::size_t> distractor_shots;
};

// n_topics x dim, unit rows (directions only; embeddings are rescaled).
Tensor synthetic_topics(const SyntheticOptions& options);

SyntheticVideo synthesize_video(const SyntheticOptions& options, std::size_t index,
                                const Tensor& topics);

// Writes manifest.json plus <id>.frames.feat, <id>.captions.feat,
// <id>.query.feat and <id>.gt.json into an existing directory.
DatasetManifest generate_synthetic_dataset(const SyntheticOptions& options,
                                           const std::filesystem::path& out_dir);

// One video containing keyframe-like shots of two topics. Queries are built
// exactly as for ordinary synthetic videos of those topics.
struct TwoTopicVideo {
  Tensor frames;
  double fps = 0.0;
  std::vector<std::size_t> boundaries;
  Tensor query_a;
  Tensor query_b;
  std::vector<std::size_t> shots_a;
  std::vector<std::size_t> shots_b;
};

TwoTopicVideo synthesize_two_topic_video(const SyntheticOptions& options, std::size_t topic_a,
                                         std::size_t topic_b, std::size_t shots_per_topic = 3);

}  // namespace sumkit
