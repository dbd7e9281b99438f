#include "sumkit/feature_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"
#include "sumkit/errors.hpp"

namespace sumkit {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint32_t to_le32(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_all(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

template <typename T>
T json_get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw FormatError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(where + ": bad value for '" + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_or_absolute(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  fs::path rel = fs::relative(p, base, ec);
  if (ec || rel.empty()) return p.string();
  return rel.generic_string();
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::frames: return "frames";
    case FeatureKind::captions: return "captions";
    case FeatureKind::query: return "query";
  }
  return "frames";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "frames") return FeatureKind::frames;
  if (text == "captions") return FeatureKind::captions;
  if (text == "query") return FeatureKind::query;
  throw FormatError("unknown feature kind '" + std::string(text) + "'");
}

void FeatureFile::validate() const {
  if (values.empty() || values.rank() != 2) {
    throw ValidationError(video_id + ": feature matrix must be rows x dim with rows, dim >= 1");
  }
  if (!values.all_finite()) throw ValidationError(video_id + ": non-finite feature value");
  if (kind == FeatureKind::query && values.rows() != 1) {
    throw ValidationError(video_id + ": query features must have exactly one row");
  }
  if (!std::isfinite(fps) || fps < 0.0) throw ValidationError(video_id + ": invalid fps");
}

FeatureFile read_feature_file(const fs::path& path) {
  const std::string bytes = read_all(path);
  const std::string where = path.string();
  if (bytes.size() < kFeatureMagic.size() ||
      std::string_view(bytes).substr(0, kFeatureMagic.size()) != kFeatureMagic) {
    throw FormatError(where + ": bad magic (expected SUMFEAT1)");
  }
  if (bytes.size() < 12) throw IoError(where + ": truncated header length");
  std::uint32_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 4);
  header_len = to_le32(header_len);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len)) {
    throw IoError(where + ": truncated header");
  }
  json header;
  try {
    header = json::parse(bytes.substr(12, header_len));
  } catch (const json::exception& e) {
    throw FormatError(where + ": header is not valid JSON: " + e.what());
  }
  if (!header.is_object()) throw FormatError(where + ": header is not a JSON object");

  FeatureFile file;
  file.video_id = json_get<std::string>(header, "video_id", where);
  file.kind = parse_feature_kind(json_get<std::string>(header, "kind", where));
  const auto rows = json_get<std::int64_t>(header, "rows", where);
  const auto dim = json_get<std::int64_t>(header, "dim", where);
  file.fps = json_get<double>(header, "fps", where);
  if (rows < 1 || dim < 1) throw FormatError(where + ": rows and dim must be positive");

  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim);
  const std::size_t payload = bytes.size() - 12 - header_len;
  if (payload != count * 4) {
    throw IoError(where + ": payload holds " + std::to_string(payload) + " bytes, header implies " +
                  std::to_string(count * 4));
  }
  std::vector<float> data(count);
  const char* src = bytes.data() + 12 + header_len;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t raw = 0;
    std::memcpy(&raw, src + 4 * i, 4);
    data[i] = std::bit_cast<float>(to_le32(raw));
  }
  file.values = Tensor({static_cast<std::size_t>(rows), static_cast<std::size_t>(dim)},
                       std::move(data));
  file.validate();
  return file;
}

void write_feature_file(const FeatureFile& file, const fs::path& path) {
  file.validate();
  ordered_json header;
  header["video_id"] = file.video_id;
  header["kind"] = std::string(to_string(file.kind));
  header["rows"] = file.values.rows();
  header["dim"] = file.values.cols();
  header["fps"] = file.fps;
  const std::string text = header.dump();

  std::string bytes;
  bytes.reserve(12 + text.size() + 4 * file.values.size());
  bytes.append(kFeatureMagic);
  const std::uint32_t len = to_le32(static_cast<std::uint32_t>(text.size()));
  bytes.append(reinterpret_cast<const char*>(&len), 4);
  bytes.append(text);
  for (float v : file.values.data()) {
    const std::uint32_t raw = to_le32(std::bit_cast<std::uint32_t>(v));
    bytes.append(reinterpret_cast<const char*>(&raw), 4);
  }
  write_text_file(path, bytes);
}

void FeatureBundle::validate() const {
  if (frames.empty() || frames.rank() != 2) throw ValidationError(video_id + ": no frames");
  if (text.empty() || text.rank() != 2) throw ValidationError(video_id + ": no text embeddings");
  if (text.cols() != frames.cols()) {
    throw ValidationError(video_id + ": text dim " + std::to_string(text.cols()) +
                          " differs from frame dim " + std::to_string(frames.cols()));
  }
  if (!frames.all_finite() || !text.all_finite()) {
    throw ValidationError(video_id + ": non-finite embedding");
  }
  if (text_kind == FeatureKind::query && text.rows() != 1) {
    throw ValidationError(video_id + ": query must be a single row");
  }
  if (text_kind == FeatureKind::frames) throw ValidationError(video_id + ": text kind is frames");
}

FeatureBundle make_bundle(const FeatureFile& frames, const FeatureFile& text) {
  if (frames.kind != FeatureKind::frames) {
    throw ValidationError(frames.video_id + ": expected a frames file");
  }
  FeatureBundle b;
  b.video_id = frames.video_id;
  b.frames = frames.values;
  b.fps = frames.fps;
  b.text = text.values;
  b.text_kind = text.kind;
  b.validate();
  return b;
}

void validate_boundaries(const std::vector<std::size_t>& boundaries, std::size_t num_frames) {
  if (boundaries.size() < 2 || boundaries.front() != 0 || boundaries.back() != num_frames) {
    throw ValidationError("shot boundaries must start at 0 and end at N=" +
                          std::to_string(num_frames));
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      throw ValidationError("shot boundaries must be strictly increasing");
    }
  }
}

void GroundTruth::validate() const {
  if (num_frames == 0) throw ValidationError(video_id + ": ground truth has zero frames");
  auto check_row = [&](const std::vector<float>& row, const char* what, bool binary) {
    if (row.size() != num_frames) {
      throw ValidationError(video_id + ": " + what + " length " + std::to_string(row.size()) +
                            " != " + std::to_string(num_frames));
    }
    for (float v : row) {
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f || (binary && v != 0.0f && v != 1.0f)) {
        throw ValidationError(video_id + ": invalid value in " + what);
      }
    }
  };
  if (!keyframe_labels.empty()) check_row(keyframe_labels, "keyframe_labels", true);
  for (const auto& s : annotator_scores) check_row(s, "annotator_scores", false);
  for (const auto& s : reference_summaries) check_row(s, "reference_summaries", true);
  if (!shot_boundaries.empty()) validate_boundaries(shot_boundaries, num_frames);
}

GroundTruth read_ground_truth(const fs::path& path) {
  const json j = parse_json_file(path);
  const std::string where = path.string();
  GroundTruth gt;
  gt.video_id = json_get<std::string>(j, "video_id", where);
  gt.num_frames = json_get<std::size_t>(j, "n_frames", where);
  if (j.contains("keyframe_labels")) {
    gt.keyframe_labels = json_get<std::vector<float>>(j, "keyframe_labels", where);
  }
  if (j.contains("annotator_scores")) {
    gt.annotator_scores = json_get<std::vector<std::vector<float>>>(j, "annotator_scores", where);
  }
  if (j.contains("reference_summaries")) {
    gt.reference_summaries =
        json_get<std::vector<std::vector<float>>>(j, "reference_summaries", where);
  }
  if (j.contains("shot_boundaries")) {
    gt.shot_boundaries = json_get<std::vector<std::size_t>>(j, "shot_boundaries", where);
  }
  gt.validate();
  return gt;
}

void write_ground_truth(const GroundTruth& gt, const fs::path& path) {
  gt.validate();
  ordered_json j;
  j["video_id"] = gt.video_id;
  j["n_frames"] = gt.num_frames;
  if (!gt.keyframe_labels.empty()) {
    std::vector<int> labels(gt.keyframe_labels.begin(), gt.keyframe_labels.end());
    j["keyframe_labels"] = labels;
  }
  if (!gt.annotator_scores.empty()) j["annotator_scores"] = gt.annotator_scores;
  if (!gt.reference_summaries.empty()) {
    std::vector<std::vector<int>> masks;
    for (const auto& m : gt.reference_summaries) masks.emplace_back(m.begin(), m.end());
    j["reference_summaries"] = masks;
  }
  if (!gt.shot_boundaries.empty()) j["shot_boundaries"] = gt.shot_boundaries;
  write_text_file(path, j.dump() + "\n");
}

std::vector<std::size_t> uniform_shot_boundaries(std::size_t num_frames, double fps,
                                                 double seconds) {
  if (num_frames == 0) throw UsageError("uniform_shot_boundaries: zero frames");
  std::size_t len = static_cast<std::size_t>(std::ceil(seconds * fps));
  if (len == 0) len = 1;
  std::vector<std::size_t> b;
  for (std::size_t s = 0; s < num_frames; s += len) b.push_back(s);
  b.push_back(num_frames);
  return b;
}

std::vector<std::size_t> shot_boundaries_for(const GroundTruth* gt, std::size_t num_frames,
                                             double fps) {
  if (gt && !gt->shot_boundaries.empty()) {
    validate_boundaries(gt->shot_boundaries, num_frames);
    return gt->shot_boundaries;
  }
  return uniform_shot_boundaries(num_frames, fps);
}

std::vector<const ManifestEntry*> DatasetManifest::split(std::string_view tag) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (tag.empty() || tag == "all" || e.split == tag) out.push_back(&e);
  return out;
}

DatasetManifest load_manifest(const fs::path& path) {
  const json j = parse_json_file(path);
  const std::string where = path.string();
  const fs::path base = path.parent_path();
  DatasetManifest m;
  m.dataset = j.value("dataset", std::string());
  m.f1_mode = j.value("f1_mode", std::string("avg"));
  if (m.f1_mode != "avg" && m.f1_mode != "max") {
    throw ValidationError(where + ": f1_mode must be 'avg' or 'max'");
  }
  if (!j.contains("videos") || !j.at("videos").is_array()) {
    throw FormatError(where + ": missing 'videos' array");
  }
  std::set<std::string> seen;
  for (const json& v : j.at("videos")) {
    ManifestEntry e;
    e.video_id = json_get<std::string>(v, "video_id", where);
    if (!seen.insert(e.video_id).second) {
      throw ValidationError(where + ": duplicate video_id '" + e.video_id + "'");
    }
    e.frames = resolve(base, json_get<std::string>(v, "frames", where));
    if (v.contains("captions")) e.captions = resolve(base, json_get<std::string>(v, "captions", where));
    if (v.contains("query")) e.query = resolve(base, json_get<std::string>(v, "query", where));
    if (v.contains("ground_truth")) {
      e.ground_truth = resolve(base, json_get<std::string>(v, "ground_truth", where));
    }
    e.split = v.value("split", std::string("train"));
    if (!e.captions && !e.query) {
      throw ValidationError(where + ": '" + e.video_id + "' has neither captions nor query");
    }
    for (const auto* p : {&e.frames}) {
      if (!fs::exists(*p)) throw ValidationError(where + ": missing file " + p->string());
    }
    for (const auto* p : {&e.captions, &e.query, &e.ground_truth}) {
      if (*p && !fs::exists(**p)) throw ValidationError(where + ": missing file " + (*p)->string());
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  ordered_json j;
  j["dataset"] = manifest.dataset;
  j["f1_mode"] = manifest.f1_mode;
  ordered_json videos = ordered_json::array();
  for (const auto& e : manifest.entries) {
    ordered_json v;
    v["video_id"] = e.video_id;
    v["frames"] = relative_or_absolute(e.frames, base);
    if (e.captions) v["captions"] = relative_or_absolute(*e.captions, base);
    if (e.query) v["query"] = relative_or_absolute(*e.query, base);
    if (e.ground_truth) v["ground_truth"] = relative_or_absolute(*e.ground_truth, base);
    v["split"] = e.split;
    videos.push_back(std::move(v));
  }
  j["videos"] = std::move(videos);
  write_text_file(path, j.dump(2) + "\n");
}

TextSource parse_text_source(std::string_view text) {
  if (text == "auto") return TextSource::automatic;
  if (text == "captions") return TextSource::captions;
  if (text == "query") return TextSource::query;
  throw ConfigError("text_source must be auto, captions or query");
}

std::string_view to_string(TextSource source) {
  switch (source) {
    case TextSource::automatic: return "auto";
    case TextSource::captions: return "captions";
    case TextSource::query: return "query";
  }
  return "auto";
}

FeatureBundle load_bundle(const ManifestEntry& entry, TextSource source) {
  const FeatureFile frames = read_feature_file(entry.frames);
  std::optional<fs::path> text_path;
  switch (source) {
    case TextSource::automatic: text_path = entry.captions ? entry.captions : entry.query; break;
    case TextSource::captions: text_path = entry.captions; break;
    case TextSource::query: text_path = entry.query; break;
  }
  if (!text_path) {
    throw UsageError(entry.video_id + ": no " + std::string(to_string(source)) + " features");
  }
  const FeatureFile text = read_feature_file(*text_path);
  FeatureBundle b = make_bundle(frames, text);
  b.video_id = entry.video_id;
  return b;
}

}  // namespace sumkit
