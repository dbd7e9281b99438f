#pragma once

// Checkpoint layout: "SUMCKPT1", uint32 LE header length, JSON header
// {"format":1,"epoch":..,"config_hash":"<16 hex>","model_config":{..},
//  "adam":{"step":..,"lr":..,...},"tensors":[{"name":..,"shape":[..]},..]},
// then every listed tensor's float32 LE payload in header order.

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "sumkit/adam.hpp"
#include "sumkit/model.hpp"

namespace sumkit {

inline constexpr std::string_view kCheckpointMagic = "SUMCKPT1";

struct Checkpoint {
  ModelParams model;
  AdamState optimizer;
  std::size_t epoch = 0;
  std::uint64_t config_hash = 0;
};

// Writes to a temporary file next to `path` and renames it into place.
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Throws ConfigError when the checkpoint was produced for a different model config.
void require_matching_config(const Checkpoint& checkpoint, const ModelConfig& config);

}  // namespace sumkit
