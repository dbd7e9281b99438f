// sumkit command-line tool.
//
// Exit codes: 0 success, 2 bad flags / config / usage, 1 runtime failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sumkit/checkpoint.hpp"
#include "sumkit/config.hpp"
#include "sumkit/errors.hpp"
#include "sumkit/evaluation.hpp"
#include "sumkit/feature_io.hpp"
#include "sumkit/model.hpp"
#include "sumkit/summary.hpp"
#include "sumkit/synthetic.hpp"
#include "sumkit/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace sumkit;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool show_config = false;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg;
  if (const char* env = std::getenv("SUMKIT_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      cfg.train.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("SUMKIT_SEED is not an unsigned integer: ") + env);
    }
  }
  if (!g.config_path.empty()) cfg = load_run_config(g.config_path, cfg);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.train.seed = *g.seed;
  cfg.validate();
  return cfg;
}

// Output files go into existing directories only.
void require_parent_dir(const fs::path& out) {
  const fs::path parent = out.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory does not exist: " + parent.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  require_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text << '\n';
  } else {
    write_text(out_path, text + "\n");
  }
}

FeatureBundle bundle_from_files(const std::string& frames, const std::string& captions,
                                const std::string& query) {
  if (captions.empty() && query.empty()) throw UsageError("pass --captions or --query");
  const FeatureFile f = read_feature_file(frames);
  // a query, when given, selects query-focused mode
  const FeatureFile t = read_feature_file(query.empty() ? captions : query);
  return make_bundle(f, t);
}

ordered_json scores_json(const std::vector<float>& scores) {
  ordered_json a = ordered_json::array();
  for (float s : scores) a.push_back(s);
  return a;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::size_t videos = 8;
  std::size_t frames = 200;
  std::size_t dim = 32;
  double keyframe_fraction = 0.15;
  double fps = 2.0;
  std::size_t topics = 4;
  std::size_t captions = 5;
  std::size_t distractors = 2;
  double test_fraction = 0.25;
};

int cmd_gen_synthetic(const GenArgs& a, const RunConfig& cfg) {
  SyntheticOptions o;
  o.seed = cfg.train.seed;
  o.n_videos = a.videos;
  o.n_frames = a.frames;
  o.dim = a.dim;
  o.keyframe_fraction = a.keyframe_fraction;
  o.fps = a.fps;
  o.n_topics = a.topics;
  o.n_captions = a.captions;
  o.distractor_shots = a.distractors;
  o.test_fraction = a.test_fraction;
  const DatasetManifest m = generate_synthetic_dataset(o, a.out);
  std::cerr << "wrote " << m.entries.size() << " videos to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string out;
  std::string split = "train";
  std::string log;
  std::string resume;
  std::string mode;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
};

int cmd_train(const TrainArgs& a, RunConfig cfg) {
  if (!a.mode.empty()) cfg.train.mode = parse_train_mode(a.mode);
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.batch_size) cfg.train.batch_size = *a.batch_size;
  if (a.lr) cfg.train.lr = *a.lr;
  cfg.validate();
  require_parent_dir(a.out);
  if (!a.log.empty()) require_parent_dir(a.log);

  const DatasetManifest manifest = load_manifest(a.manifest);
  const auto videos = load_training_videos(manifest, cfg, a.split);
  std::optional<Checkpoint> resume;
  if (!a.resume.empty()) resume = read_checkpoint(a.resume);

  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::trunc);
    if (!log_file) throw IoError("cannot write " + a.log);
  }
  const TrainResult r = train(videos, cfg, std::move(resume), [&](const EpochLog& e) {
    const std::string line = epoch_log_json(e);
    std::cerr << line << "\n";
    if (log_file) log_file << line << "\n" << std::flush;
  });
  write_checkpoint(r.checkpoint, a.out);
  return 0;
}

struct ScoreArgs {
  std::string checkpoint;
  std::string frames;
  std::string captions;
  std::string query;
  std::string out;
};

int cmd_score(const ScoreArgs& a) {
  Checkpoint ck = read_checkpoint(a.checkpoint);
  const FeatureBundle b = bundle_from_files(a.frames, a.captions, a.query);
  const std::vector<float> scores = score_video(ck.model, b);
  ordered_json j;
  j["video_id"] = b.video_id;
  j["text_kind"] = std::string(to_string(b.text_kind));
  j["frame_scores"] = scores_json(scores);
  emit(a.out, j.dump());
  return 0;
}

struct SummarizeArgs {
  std::string checkpoint;
  std::string frames;
  std::string captions;
  std::string query;
  std::string ground_truth;
  std::optional<double> budget;
  std::string out;
};

int cmd_summarize(const SummarizeArgs& a, const RunConfig& cfg) {
  const double budget = a.budget.value_or(cfg.eval.budget_fraction);
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("--budget must lie in (0, 1]");
  Checkpoint ck = read_checkpoint(a.checkpoint);
  const FeatureBundle b = bundle_from_files(a.frames, a.captions, a.query);
  std::optional<GroundTruth> gt;
  if (!a.ground_truth.empty()) gt = read_ground_truth(a.ground_truth);
  const auto boundaries = shot_boundaries_for(gt ? &*gt : nullptr, b.num_frames(), b.fps);
  const std::vector<float> scores = score_video(ck.model, b);
  const Summary s = build_summary(scores, boundaries, budget);

  ordered_json j;
  j["video_id"] = b.video_id;
  j["mode"] = b.text_kind == FeatureKind::query ? "query" : "generic";
  j["budget_fraction"] = budget;
  ordered_json shots = ordered_json::array();
  for (std::size_t idx : s.selected_shots) {
    const ShotScore& sh = s.shots[idx];
    shots.push_back({{"start", sh.start}, {"end", sh.end}, {"value", sh.value}});
  }
  j["selected_shots"] = std::move(shots);
  j["selected_frames"] = s.selected_frames;
  j["budget_frames"] = s.budget_frames;
  j["frame_mask"] = run_length_encode(s.frame_mask);
  j["frame_scores"] = scores_json(scores);
  emit(a.out, j.dump());
  return 0;
}

struct EvaluateArgs {
  std::string manifest;
  std::string checkpoint;
  std::vector<std::string> scores;
  std::string split = "test";
  std::string f1_mode;
  std::string out;
  std::string csv;
};

std::map<std::string, std::vector<float>> read_score_files(const std::vector<std::string>& paths) {
  std::map<std::string, std::vector<float>> out;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      out[j.at("video_id").get<std::string>()] = j.at("frame_scores").get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(p + ": not a score file: " + e.what());
    }
  }
  return out;
}

int cmd_evaluate(const EvaluateArgs& a, const RunConfig& cfg) {
  if (a.checkpoint.empty() == a.scores.empty()) {
    throw UsageError("pass exactly one of --checkpoint or --scores");
  }
  if (!a.out.empty() && a.out != "-") require_parent_dir(a.out);
  if (!a.csv.empty()) require_parent_dir(a.csv);

  const DatasetManifest manifest = load_manifest(a.manifest);
  EvalProtocol protocol = EvalProtocol::from(cfg, a.split);
  if (!a.f1_mode.empty()) protocol.f1_mode = parse_f1_aggregation(a.f1_mode);

  MetricReport report;
  if (!a.checkpoint.empty()) {
    Checkpoint ck = read_checkpoint(a.checkpoint);
    report = evaluate_checkpoint(ck.model, manifest, protocol);
  } else {
    const auto scores = read_score_files(a.scores);
    const F1Aggregation mode = protocol.f1_mode.value_or(parse_f1_aggregation(manifest.f1_mode));
    report.f1_mode = mode == F1Aggregation::max ? "max" : "avg";
    const auto entries = manifest.split(a.split);
    if (entries.empty()) throw UsageError("no manifest entries in split '" + a.split + "'");
    for (const ManifestEntry* e : entries) {
      auto it = scores.find(e->video_id);
      if (it == scores.end()) throw UsageError("no scores given for " + e->video_id);
      if (!e->ground_truth) throw UsageError(e->video_id + ": evaluation needs ground truth");
      const GroundTruth gt = read_ground_truth(*e->ground_truth);
      const FeatureFile frames = read_feature_file(e->frames);
      report.videos.push_back(evaluate_scores(e->video_id, it->second, gt, frames.fps, protocol, mode));
    }
    report.finalize();
  }
  emit(a.out, report.to_json());
  if (!a.csv.empty()) write_text(a.csv, report.to_csv());
  return 0;
}

int cmd_inspect(const std::vector<std::string>& files, const std::string& manifest_path) {
  if (files.empty() && manifest_path.empty()) throw UsageError("nothing to inspect");
  for (const auto& f : files) {
    const FeatureFile file = read_feature_file(f);
    file.validate();
    ordered_json j;
    j["path"] = f;
    j["video_id"] = file.video_id;
    j["kind"] = std::string(to_string(file.kind));
    j["rows"] = file.values.rows();
    j["dim"] = file.values.cols();
    j["fps"] = file.fps;
    j["valid"] = true;
    std::cout << j.dump() << "\n";
  }
  if (!manifest_path.empty()) {
    const DatasetManifest m = load_manifest(manifest_path);
    for (const auto& e : m.entries) {
      const FeatureBundle b = load_bundle(e);
      b.validate();
      if (e.ground_truth) {
        const GroundTruth gt = read_ground_truth(*e.ground_truth);
        if (gt.num_frames != b.num_frames()) {
          throw ValidationError(e.video_id + ": ground truth frame count differs from features");
        }
      }
    }
    std::cout << ordered_json{{"manifest", manifest_path}, {"videos", m.entries.size()}, {"valid", true}}.dump()
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sumkit: language-guided video summarization"};
  app.require_subcommand(0, 1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed (fallback: SUMKIT_SEED)");
  app.add_option("--set", g.overrides, "override one config key, key=value")->take_all();
  app.add_flag("--show-config", g.show_config, "print the resolved config and exit");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "write a seeded synthetic dataset");
  gen_cmd->add_option("--out", gen.out, "existing output directory")->required();
  gen_cmd->add_option("--videos", gen.videos);
  gen_cmd->add_option("--frames", gen.frames);
  gen_cmd->add_option("--dim", gen.dim);
  gen_cmd->add_option("--keyframe-fraction", gen.keyframe_fraction);
  gen_cmd->add_option("--fps", gen.fps);
  gen_cmd->add_option("--topics", gen.topics);
  gen_cmd->add_option("--captions", gen.captions);
  gen_cmd->add_option("--distractors", gen.distractors);
  gen_cmd->add_option("--test-fraction", gen.test_fraction);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cmd->add_option("--manifest", tr.manifest)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"supervised", "unsupervised"}));
  train_cmd->add_option("--split", tr.split, "manifest split to train on ('all' for every entry)");
  train_cmd->add_option("--log", tr.log, "per-epoch JSON lines");
  train_cmd->add_option("--resume", tr.resume)->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--batch-size", tr.batch_size);
  train_cmd->add_option("--lr", tr.lr);

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "per-frame scores for one video");
  score_cmd->add_option("--checkpoint", sc.checkpoint)->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--frames", sc.frames)->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--captions", sc.captions)->check(CLI::ExistingFile);
  score_cmd->add_option("--query", sc.query)->check(CLI::ExistingFile);
  score_cmd->add_option("--out", sc.out);

  SummarizeArgs su;
  auto* sum_cmd = app.add_subcommand("summarize", "budgeted keyshot summary of one video");
  sum_cmd->add_option("--checkpoint", su.checkpoint)->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("--frames", su.frames)->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("--captions", su.captions)->check(CLI::ExistingFile);
  sum_cmd->add_option("--query", su.query, "query features; selects query-focused mode")
      ->check(CLI::ExistingFile);
  sum_cmd->add_option("--ground-truth", su.ground_truth, "take shot boundaries from this file")
      ->check(CLI::ExistingFile);
  sum_cmd->add_option("--budget", su.budget, "fraction of frames, (0, 1]");
  sum_cmd->add_option("--out", su.out);

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "F1 / tau / rho against ground truth");
  eval_cmd->add_option("--manifest", ev.manifest)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->check(CLI::ExistingFile);
  eval_cmd->add_option("--scores", ev.scores, "score JSON files written by `score`")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", ev.split);
  eval_cmd->add_option("--f1-mode", ev.f1_mode)->check(CLI::IsMember({"avg", "max"}));
  eval_cmd->add_option("--out", ev.out, "report JSON path");
  eval_cmd->add_option("--csv", ev.csv, "per-video CSV path");

  std::vector<std::string> inspect_files;
  std::string inspect_manifest;
  auto* inspect_cmd = app.add_subcommand("inspect-features", "validate feature files or a manifest");
  inspect_cmd->add_option("files", inspect_files)->check(CLI::ExistingFile);
  inspect_cmd->add_option("--manifest", inspect_manifest)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig cfg = resolve_config(g);
    if (g.show_config) {
      std::cout << dump_run_config(cfg) << "\n";
      return 0;
    }
    if (*gen_cmd) return cmd_gen_synthetic(gen, cfg);
    if (*train_cmd) return cmd_train(tr, cfg);
    if (*score_cmd) return cmd_score(sc);
    if (*sum_cmd) return cmd_summarize(su, cfg);
    if (*eval_cmd) return cmd_evaluate(ev, cfg);
    if (*inspect_cmd) return cmd_inspect(inspect_files, inspect_manifest);
    std::cerr << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
