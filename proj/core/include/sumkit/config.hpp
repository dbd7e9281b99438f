#pragma once

// Run configuration shared by the library and the CLI. Every key is flat in
// the JSON form, e.g. {"embed_dim": 32, "tf_enc_layers": 2, "alpha": 0.5}.

#include <cstdint>
#include <string>
#include <string_view>

#include "sumkit/feature_io.hpp"

namespace sumkit {

struct ModelConfig {
  std::size_t embed_dim = 512;
  // caption fusion
  std::size_t m_fixed = 7;
  bool fused_only = false;
  // language-guided attention
  std::size_t lga_heads = 4;
  bool lga_residual = true;
  // frame-scoring transformer
  std::size_t tf_heads = 8;
  std::size_t tf_enc_layers = 6;
  std::size_t tf_dec_layers = 6;
  std::size_t window_len = 256;
  double dropout = 0.0;
  bool disable_pos_enc = false;
  // reconstructor: number of position-wise linear layers (D -> D each)
  std::size_t recon_layers = 2;

  void validate() const;
};

enum class ReconMode { mse, l2 };
enum class TrainMode { supervised, unsupervised };
enum class TauVariant { a, b };

struct LossConfig {
  double alpha = 0.5;
  double beta = 0.3;
  double lambda = 0.2;
  ReconMode recon_mode = ReconMode::mse;
  bool invert_class_weight = false;
  double select_fraction = 0.15;

  void validate() const;
};

struct TrainConfig {
  TrainMode mode = TrainMode::supervised;
  std::size_t epochs = 20;
  std::size_t batch_size = 100;  // windows per optimizer step
  double lr = 1e-4;
  double weight_decay = 1e-3;
  std::uint64_t seed = 0;
  TextSource text_source = TextSource::automatic;

  void validate() const;
};

struct EvalConfig {
  double budget_fraction = 0.15;
  TauVariant tau_variant = TauVariant::b;

  void validate() const;
};

struct RunConfig {
  ModelConfig model;
  LossConfig loss;
  TrainConfig train;
  EvalConfig eval;

  void validate() const;
};

std::string_view to_string(ReconMode mode);
std::string_view to_string(TrainMode mode);
std::string_view to_string(TauVariant variant);
TrainMode parse_train_mode(std::string_view text);

// Overlays the keys of a JSON object onto `base`. Unknown keys and badly
// typed values raise ConfigError.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// Sets one key from its textual form ("true", "0.5", "mse", ...).
void set_config_key(RunConfig& config, std::string_view key, std::string_view value);

std::string dump_run_config(const RunConfig& config, int indent = 2);
std::string dump_model_config(const ModelConfig& config);
ModelConfig parse_model_config(std::string_view json_text);

// FNV-1a over the canonical JSON of the model section.
std::uint64_t model_config_hash(const ModelConfig& config);

}  // namespace sumkit
