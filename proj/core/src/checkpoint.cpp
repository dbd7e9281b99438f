#include "sumkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "sumkit/errors.hpp"

namespace sumkit {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct TensorRef {
  std::string name;
  Tensor* tensor;
};

std::vector<TensorRef> all_tensors(Checkpoint& c) {
  std::vector<TensorRef> out;
  const ParamList params = c.model.parameters();
  for (const auto& p : params) out.push_back({p.name, p.tensor});
  for (std::size_t i = 0; i < c.optimizer.first_moment.size(); ++i) {
    out.push_back({"adam.m." + params.at(i).name, &c.optimizer.first_moment[i]});
  }
  for (std::size_t i = 0; i < c.optimizer.second_moment.size(); ++i) {
    out.push_back({"adam.v." + params.at(i).name, &c.optimizer.second_moment[i]});
  }
  return out;
}

}  // namespace

void write_checkpoint(const Checkpoint& checkpoint, const fs::path& path) {
  // parameters() hands out mutable pointers; nothing is modified here
  Checkpoint& c = const_cast<Checkpoint&>(checkpoint);
  const std::vector<TensorRef> tensors = all_tensors(c);

  ordered_json header;
  header["format"] = 1;
  header["epoch"] = c.epoch;
  header["config_hash"] = hex64(c.config_hash);
  header["model_config"] = ordered_json::parse(dump_model_config(c.model.config));
  const AdamOptions& o = c.optimizer.options;
  header["adam"] = {{"step", c.optimizer.step}, {"lr", o.lr},       {"weight_decay", o.weight_decay},
                    {"beta1", o.beta1},          {"beta2", o.beta2}, {"eps", o.eps}};
  ordered_json list = ordered_json::array();
  for (const auto& t : tensors) list.push_back({{"name", t.name}, {"shape", t.tensor->shape()}});
  header["tensors"] = std::move(list);
  const std::string text = header.dump();

  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
    const auto len = static_cast<std::uint32_t>(text.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : tensors) {
      out.write(reinterpret_cast<const char*>(t.tensor->data().data()),
                static_cast<std::streamsize>(t.tensor->size() * sizeof(float)));
    }
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || std::string_view(bytes).substr(0, 8) != kCheckpointMagic) {
    throw FormatError(where + ": not a SUMCKPT1 checkpoint");
  }
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 4);
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw IoError(where + ": truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(12, len));
  } catch (const json::exception& e) {
    throw FormatError(where + ": bad header: " + e.what());
  }

  Checkpoint c;
  try {
    c.model = ModelParams::init(parse_model_config(header.at("model_config").dump()), 0);
    c.epoch = header.at("epoch").get<std::size_t>();
    c.config_hash = std::stoull(header.at("config_hash").get<std::string>(), nullptr, 16);
    const json& a = header.at("adam");
    c.optimizer.step = a.at("step").get<std::uint64_t>();
    c.optimizer.options.lr = a.at("lr").get<double>();
    c.optimizer.options.weight_decay = a.at("weight_decay").get<double>();
    c.optimizer.options.beta1 = a.at("beta1").get<double>();
    c.optimizer.options.beta2 = a.at("beta2").get<double>();
    c.optimizer.options.eps = a.at("eps").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(where + ": bad header field: " + e.what());
  }

  const json& list = header.at("tensors");
  const ParamList params = c.model.parameters();
  const std::size_t n_params = params.size();
  if (list.size() != n_params && list.size() != 3 * n_params) {
    throw FormatError(where + ": tensor count does not match the model config");
  }
  if (list.size() == 3 * n_params) {
    for (const auto& p : params) {
      c.optimizer.first_moment.emplace_back(p.tensor->shape(), 0.0f);
      c.optimizer.second_moment.emplace_back(p.tensor->shape(), 0.0f);
    }
  }
  const std::vector<TensorRef> tensors = all_tensors(c);
  std::size_t offset = 12 + len;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const json& entry = list.at(i);
    if (entry.at("name").get<std::string>() != tensors[i].name ||
        entry.at("shape").get<std::vector<std::size_t>>() != tensors[i].tensor->shape()) {
      throw FormatError(where + ": unexpected tensor " + entry.at("name").get<std::string>());
    }
    const std::size_t nbytes = tensors[i].tensor->size() * sizeof(float);
    if (offset + nbytes > bytes.size()) throw IoError(where + ": truncated payload");
    std::memcpy(tensors[i].tensor->data().data(), bytes.data() + offset, nbytes);
    offset += nbytes;
  }
  if (offset != bytes.size()) throw IoError(where + ": trailing bytes after payload");
  if (c.config_hash != model_config_hash(c.model.config)) {
    throw ValidationError(where + ": config hash does not match the stored model config");
  }
  return c;
}

void require_matching_config(const Checkpoint& checkpoint, const ModelConfig& config) {
  if (checkpoint.config_hash != model_config_hash(config)) {
    throw ConfigError("checkpoint was trained with a different model config (hash " +
                      hex64(checkpoint.config_hash) + " vs " + hex64(model_config_hash(config)) + ")");
  }
}

}  // namespace sumkit
