#include "sumkit/config.hpp"

#include <fstream>
#include <functional>
#include <iterator>
#include <map>

#include "json.hpp"
#include "sumkit/errors.hpp"

namespace sumkit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ReconMode mode) { return mode == ReconMode::mse ? "mse" : "l2"; }

std::string_view to_string(TrainMode mode) {
  return mode == TrainMode::supervised ? "supervised" : "unsupervised";
}

std::string_view to_string(TauVariant variant) { return variant == TauVariant::a ? "a" : "b"; }

TrainMode parse_train_mode(std::string_view text) {
  if (text == "supervised") return TrainMode::supervised;
  if (text == "unsupervised") return TrainMode::unsupervised;
  throw ConfigError("mode must be 'supervised' or 'unsupervised', got '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (embed_dim < 2 || embed_dim % 2 != 0) throw ConfigError("embed_dim must be even and >= 2");
  if (m_fixed < 1) throw ConfigError("m_fixed must be >= 1");
  if (lga_heads < 1 || embed_dim % lga_heads != 0) {
    throw ConfigError("lga_heads must divide embed_dim");
  }
  if (tf_heads < 1 || embed_dim % tf_heads != 0) throw ConfigError("tf_heads must divide embed_dim");
  if (tf_enc_layers < 1 || tf_dec_layers < 1) throw ConfigError("transformer needs >= 1 layer per stack");
  if (window_len < 1) throw ConfigError("window_len must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (recon_layers < 1) throw ConfigError("recon_layers must be >= 1");
}

void LossConfig::validate() const {
  if (alpha < 0 || beta < 0 || lambda < 0) throw ConfigError("loss weights must be nonnegative");
  if (alpha == 0 && beta == 0 && lambda == 0) throw ConfigError("at least one loss weight must be > 0");
  if (!(select_fraction > 0.0 && select_fraction <= 1.0)) {
    throw ConfigError("select_fraction must lie in (0, 1]");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

void EvalConfig::validate() const {
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) {
    throw ConfigError("budget_fraction must lie in (0, 1]");
  }
}

void RunConfig::validate() const {
  model.validate();
  loss.validate();
  train.validate();
  eval.validate();
}

namespace {

struct Key {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as(const json& v, std::string_view key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
        throw ConfigError("");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + std::string(key) + "' has a value of the wrong type");
  }
}

template <typename T, typename Section>
Key field(Section RunConfig::*section, T Section::*member, const char* name) {
  return Key{[=](const RunConfig& c) { return json((c.*section).*member); },
             [=](RunConfig& c, const json& v) { (c.*section).*member = as<T>(v, name); }};
}

const std::map<std::string, Key, std::less<>>& registry() {
  static const std::map<std::string, Key, std::less<>> keys = [] {
    std::map<std::string, Key, std::less<>> k;
    using R = RunConfig;
    k["embed_dim"] = field(&R::model, &ModelConfig::embed_dim, "embed_dim");
    k["m_fixed"] = field(&R::model, &ModelConfig::m_fixed, "m_fixed");
    k["fused_only"] = field(&R::model, &ModelConfig::fused_only, "fused_only");
    k["lga_heads"] = field(&R::model, &ModelConfig::lga_heads, "lga_heads");
    k["lga_residual"] = field(&R::model, &ModelConfig::lga_residual, "lga_residual");
    k["tf_heads"] = field(&R::model, &ModelConfig::tf_heads, "tf_heads");
    k["tf_enc_layers"] = field(&R::model, &ModelConfig::tf_enc_layers, "tf_enc_layers");
    k["tf_dec_layers"] = field(&R::model, &ModelConfig::tf_dec_layers, "tf_dec_layers");
    k["window_len"] = field(&R::model, &ModelConfig::window_len, "window_len");
    k["dropout"] = field(&R::model, &ModelConfig::dropout, "dropout");
    k["disable_pos_enc"] = field(&R::model, &ModelConfig::disable_pos_enc, "disable_pos_enc");
    k["recon_layers"] = field(&R::model, &ModelConfig::recon_layers, "recon_layers");

    k["alpha"] = field(&R::loss, &LossConfig::alpha, "alpha");
    k["beta"] = field(&R::loss, &LossConfig::beta, "beta");
    k["lambda"] = field(&R::loss, &LossConfig::lambda, "lambda");
    k["recon_mode"] = Key{
        [](const R& c) { return json(std::string(to_string(c.loss.recon_mode))); },
        [](R& c, const json& v) {
          const auto s = as<std::string>(v, "recon_mode");
          if (s == "mse") c.loss.recon_mode = ReconMode::mse;
          else if (s == "l2") c.loss.recon_mode = ReconMode::l2;
          else throw ConfigError("recon_mode must be 'mse' or 'l2'");
        }};
    k["invert_class_weight"] =
        field(&R::loss, &LossConfig::invert_class_weight, "invert_class_weight");
    k["select_fraction"] = field(&R::loss, &LossConfig::select_fraction, "select_fraction");

    k["mode"] = Key{[](const R& c) { return json(std::string(to_string(c.train.mode))); },
                    [](R& c, const json& v) { c.train.mode = parse_train_mode(as<std::string>(v, "mode")); }};
    k["epochs"] = field(&R::train, &TrainConfig::epochs, "epochs");
    k["batch_size"] = field(&R::train, &TrainConfig::batch_size, "batch_size");
    k["lr"] = field(&R::train, &TrainConfig::lr, "lr");
    k["weight_decay"] = field(&R::train, &TrainConfig::weight_decay, "weight_decay");
    k["seed"] = field(&R::train, &TrainConfig::seed, "seed");
    k["text_source"] = Key{
        [](const R& c) { return json(std::string(to_string(c.train.text_source))); },
        [](R& c, const json& v) { c.train.text_source = parse_text_source(as<std::string>(v, "text_source")); }};

    k["budget_fraction"] = field(&R::eval, &EvalConfig::budget_fraction, "budget_fraction");
    k["tau_variant"] = Key{
        [](const R& c) { return json(std::string(to_string(c.eval.tau_variant))); },
        [](R& c, const json& v) {
          const auto s = as<std::string>(v, "tau_variant");
          if (s == "a") c.eval.tau_variant = TauVariant::a;
          else if (s == "b") c.eval.tau_variant = TauVariant::b;
          else throw ConfigError("tau_variant must be 'a' or 'b'");
        }};
    return k;
  }();
  return keys;
}

const char* const kModelKeys[] = {"embed_dim",     "m_fixed",       "fused_only",   "lga_heads",
                                  "lga_residual",  "tf_heads",      "tf_enc_layers", "tf_dec_layers",
                                  "window_len",    "dropout",       "disable_pos_enc", "recon_layers"};

}  // namespace

RunConfig parse_run_config(std::string_view json_text, RunConfig base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& keys = registry();
  for (const auto& [name, value] : j.items()) {
    auto it = keys.find(name);
    if (it == keys.end()) throw ConfigError("unknown config key '" + name + "'");
    it->second.set(base, value);
  }
  base.validate();
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text, std::move(base));
}

void set_config_key(RunConfig& config, std::string_view key, std::string_view value) {
  const auto& keys = registry();
  auto it = keys.find(key);
  if (it == keys.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = std::string(value);  // bare word such as mse or supervised
  }
  it->second.set(config, v);
}

std::string dump_run_config(const RunConfig& config, int indent) {
  ordered_json j;
  for (const auto& [name, key] : registry()) j[name] = key.get(config);
  return j.dump(indent);
}

std::string dump_model_config(const ModelConfig& config) {
  RunConfig rc;
  rc.model = config;
  const auto& keys = registry();
  ordered_json j;
  for (const char* name : kModelKeys) j[name] = keys.find(name)->second.get(rc);
  return j.dump();
}

ModelConfig parse_model_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model config is not valid JSON: ") + e.what());
  }
  RunConfig rc;
  const auto& keys = registry();
  for (const auto& [name, value] : j.items()) {
    bool is_model_key = false;
    for (const char* k : kModelKeys) is_model_key = is_model_key || name == k;
    if (!is_model_key) throw FormatError("unexpected model config key '" + name + "'");
    keys.find(name)->second.set(rc, value);
  }
  rc.model.validate();
  return rc.model;
}

std::uint64_t model_config_hash(const ModelConfig& config) {
  const std::string text = dump_model_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sumkit
