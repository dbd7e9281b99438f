#pragma once

// Embedding files, ground truth, and dataset manifests.
//
// Feature file layout (all integers and floats little-endian):
//   bytes 0..7    magic "SUMFEAT1"
//   bytes 8..11   uint32 header length H
//   bytes 12..    H bytes of UTF-8 JSON:
//                 {"video_id":..,"kind":"frames"|"captions"|"query","rows":R,"dim":D,"fps":..}
//   remainder     exactly R*D float32 values, row-major

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sumkit/tensor.hpp"

namespace sumkit {

inline constexpr std::string_view kFeatureMagic = "SUMFEAT1";

enum class FeatureKind { frames, captions, query };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

// Contents of one feature file.
struct FeatureFile {
  std::string video_id;
  FeatureKind kind = FeatureKind::frames;
  double fps = 0.0;
  Tensor values;  // rows x dim

  // Throws ValidationError on empty/non-finite values or a multi-row query.
  void validate() const;
};

FeatureFile read_feature_file(const std::filesystem::path& path);
void write_feature_file(const FeatureFile& file, const std::filesystem::path& path);

// Per-video model input: frame embeddings plus caption or query embeddings.
struct FeatureBundle {
  std::string video_id;
  Tensor frames;  // N x D
  double fps = 0.0;
  Tensor text;    // M x D (captions) or 1 x D (query)
  FeatureKind text_kind = FeatureKind::captions;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
  void validate() const;
};

FeatureBundle make_bundle(const FeatureFile& frames, const FeatureFile& text);

struct GroundTruth {
  std::string video_id;
  std::size_t num_frames = 0;
  std::vector<float> keyframe_labels;               // empty when unlabeled
  std::vector<std::vector<float>> annotator_scores;  // A x N, values in [0,1]
  std::vector<std::vector<float>> reference_summaries;  // A x N binary masks
  std::vector<std::size_t> shot_boundaries;          // 0 = b0 < ... < bk = N; may be empty

  bool has_labels() const { return !keyframe_labels.empty(); }
  void validate() const;
};

GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

// Uniform segmentation into shots of ceil(seconds * fps) frames.
std::vector<std::size_t> uniform_shot_boundaries(std::size_t num_frames, double fps,
                                                 double seconds = 5.0);
void validate_boundaries(const std::vector<std::size_t>& boundaries, std::size_t num_frames);

// Ground-truth boundaries when present, otherwise uniform 5-second shots.
std::vector<std::size_t> shot_boundaries_for(const GroundTruth* gt, std::size_t num_frames,
                                             double fps);

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path frames;
  std::optional<std::filesystem::path> captions;
  std::optional<std::filesystem::path> query;
  std::optional<std::filesystem::path> ground_truth;
  std::string split = "train";
};

struct DatasetManifest {
  std::string dataset;
  std::string f1_mode = "avg";  // "avg" (TVSum convention) or "max" (SumMe)
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(std::string_view tag) const;
};

// Relative paths are resolved against the manifest's directory. Rejects
// duplicate video ids and referenced files that do not exist.
DatasetManifest load_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest directory when possible.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

enum class TextSource { automatic, captions, query };

TextSource parse_text_source(std::string_view text);
std::string_view to_string(TextSource source);

// Reads the frame file and the selected text file of an entry.
FeatureBundle load_bundle(const ManifestEntry& entry, TextSource source = TextSource::automatic);

}  // namespace sumkit
