#include "sumkit/transformer.hpp"

#include <cmath>

#include "sumkit/errors.hpp"

namespace sumkit {

Tensor positional_encoding(std::size_t length, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("positional encoding needs an even dimension");
  Tensor pe = Tensor::matrix(length, dim);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
      pe.at(pos, 2 * i) = static_cast<float>(std::sin(angle));
      pe.at(pos, 2 * i + 1) = static_cast<float>(std::cos(angle));
    }
  }
  return pe;
}

std::vector<PaddedWindow> window_video(const Tensor& frames, std::size_t window_len) {
  if (window_len < 1) throw ConfigError("window_len must be >= 1");
  const std::size_t n = frames.rows(), d = frames.cols();
  std::vector<PaddedWindow> out;
  for (std::size_t start = 0; start < n; start += window_len) {
    PaddedWindow w;
    w.offset = start;
    w.valid_len = std::min(window_len, n - start);
    w.features = Tensor::matrix(window_len, d);
    std::copy_n(frames.data().begin() + start * d, w.valid_len * d, w.features.data().begin());
    w.mask.assign(window_len, 0.0f);
    std::fill_n(w.mask.begin(), w.valid_len, 1.0f);
    out.push_back(std::move(w));
  }
  return out;
}

LayerNormParams LayerNormParams::init(std::size_t dim) {
  return {Tensor::matrix(1, dim, 1.0f), Tensor::matrix(1, dim, 0.0f)};
}

void LayerNormParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "gain", &gain});
  out.push_back({prefix + "bias", &bias});
}

FeedForwardParams FeedForwardParams::init(std::size_t dim, Rng& rng) {
  FeedForwardParams p;
  p.w1 = Tensor::matrix(dim, 4 * dim);
  p.b1 = Tensor::matrix(1, 4 * dim);
  p.w2 = Tensor::matrix(4 * dim, dim);
  p.b2 = Tensor::matrix(1, dim);
  init_uniform(p.w1, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
  init_uniform(p.w2, rng, 1.0 / std::sqrt(static_cast<double>(4 * dim)));
  return p;
}

void FeedForwardParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "w1", &w1});
  out.push_back({prefix + "b1", &b1});
  out.push_back({prefix + "w2", &w2});
  out.push_back({prefix + "b2", &b2});
}

TransformerParams TransformerParams::init(std::size_t dim, std::size_t heads,
                                          std::size_t enc_layers, std::size_t dec_layers,
                                          Rng& rng) {
  TransformerParams p;
  p.heads = heads;
  for (std::size_t i = 0; i < enc_layers; ++i) {
    EncoderLayerParams l;
    l.norm1 = LayerNormParams::init(dim);
    l.self_attn = AttentionParams::init(dim, rng);
    l.norm2 = LayerNormParams::init(dim);
    l.ffn = FeedForwardParams::init(dim, rng);
    p.encoder.push_back(std::move(l));
  }
  for (std::size_t i = 0; i < dec_layers; ++i) {
    DecoderLayerParams l;
    l.norm1 = LayerNormParams::init(dim);
    l.self_attn = AttentionParams::init(dim, rng);
    l.norm2 = LayerNormParams::init(dim);
    l.cross_attn = AttentionParams::init(dim, rng);
    l.norm3 = LayerNormParams::init(dim);
    l.ffn = FeedForwardParams::init(dim, rng);
    p.decoder.push_back(std::move(l));
  }
  p.encoder_norm = LayerNormParams::init(dim);
  p.decoder_norm = LayerNormParams::init(dim);
  p.head_weight = Tensor::matrix(dim, 1);
  p.head_bias = Tensor::matrix(1, 1);
  init_uniform(p.head_weight, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
  return p;
}

void TransformerParams::collect(ParamList& out, const std::string& prefix) {
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    const std::string pre = prefix + "enc" + std::to_string(i) + ".";
    encoder[i].norm1.collect(out, pre + "norm1.");
    encoder[i].self_attn.collect(out, pre + "self_attn.");
    encoder[i].norm2.collect(out, pre + "norm2.");
    encoder[i].ffn.collect(out, pre + "ffn.");
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    const std::string pre = prefix + "dec" + std::to_string(i) + ".";
    decoder[i].norm1.collect(out, pre + "norm1.");
    decoder[i].self_attn.collect(out, pre + "self_attn.");
    decoder[i].norm2.collect(out, pre + "norm2.");
    decoder[i].cross_attn.collect(out, pre + "cross_attn.");
    decoder[i].norm3.collect(out, pre + "norm3.");
    decoder[i].ffn.collect(out, pre + "ffn.");
  }
  encoder_norm.collect(out, prefix + "enc_norm.");
  decoder_norm.collect(out, prefix + "dec_norm.");
  out.push_back({prefix + "head.weight", &head_weight});
  out.push_back({prefix + "head.bias", &head_bias});
}

namespace {

constexpr float kMaskedLogit = -1e9f;

Var norm(Tape& tape, const Var& x, LayerNormParams& p) {
  return ops::layer_norm(x, tape.param(p.gain), tape.param(p.bias));
}

Var feed_forward(Tape& tape, const Var& x, FeedForwardParams& p) {
  const Var h = ops::relu(ops::add_row(ops::matmul(x, tape.param(p.w1)), tape.param(p.b1)));
  return ops::add_row(ops::matmul(h, tape.param(p.w2)), tape.param(p.b2));
}

Var maybe_dropout(Tape& tape, const Var& x, const TransformerOptions& o) {
  if (o.dropout <= 0.0 || o.dropout_rng == nullptr) return x;
  Tensor mask(x.value().shape(), 0.0f);
  const float keep_scale = static_cast<float>(1.0 / (1.0 - o.dropout));
  for (float& m : mask.data()) m = o.dropout_rng->uniform() < o.dropout ? 0.0f : keep_scale;
  return ops::mul(x, tape.constant(std::move(mask)));
}

void check_finite(const Var& x, const char* stack, std::size_t layer) {
  if (!x.value().all_finite()) {
    throw NumericError(std::string("non-finite activation in ") + stack + " layer " +
                       std::to_string(layer));
  }
}

ScoreOutput score_window(Tape& tape, const Var& input, const Var& key_mask,
                         TransformerParams& p, const TransformerOptions& o) {
  Var x = input;
  for (std::size_t i = 0; i < p.encoder.size(); ++i) {
    EncoderLayerParams& l = p.encoder[i];
    const Var h = norm(tape, x, l.norm1);
    x = ops::add(x, maybe_dropout(tape, multi_head_attention(h, h, bind(tape, l.self_attn),
                                                             p.heads, &key_mask), o));
    x = ops::add(x, maybe_dropout(tape, feed_forward(tape, norm(tape, x, l.norm2), l.ffn), o));
    check_finite(x, "encoder", i);
  }
  const Var memory = norm(tape, x, p.encoder_norm);

  Var y = input;
  for (std::size_t i = 0; i < p.decoder.size(); ++i) {
    DecoderLayerParams& l = p.decoder[i];
    const Var h = norm(tape, y, l.norm1);
    y = ops::add(y, maybe_dropout(tape, multi_head_attention(h, h, bind(tape, l.self_attn),
                                                             p.heads, &key_mask), o));
    const Var c = norm(tape, y, l.norm2);
    y = ops::add(y, maybe_dropout(tape, multi_head_attention(c, memory, bind(tape, l.cross_attn),
                                                             p.heads, &key_mask), o));
    y = ops::add(y, maybe_dropout(tape, feed_forward(tape, norm(tape, y, l.norm3), l.ffn), o));
    check_finite(y, "decoder", i);
  }
  const Var features = norm(tape, y, p.decoder_norm);
  const Var logits = ops::add_row(ops::matmul(features, tape.param(p.head_weight)),
                                  tape.param(p.head_bias));
  return {ops::sigmoid(logits), features};
}

}  // namespace

ScoreOutput score_frames(Tape& tape, const Var& fprime, TransformerParams& params,
                         const TransformerOptions& options) {
  const std::size_t n = fprime.rows(), d = fprime.cols();
  if (n == 0) throw UsageError("score_frames: empty video");
  if (d != params.dim()) {
    throw ShapeError("score_frames: input dim " + std::to_string(d) + " vs model dim " +
                     std::to_string(params.dim()));
  }
  if (!fprime.value().all_finite()) throw NumericError("non-finite transformer input");
  const std::size_t len = options.window_len;
  if (len < 1) throw ConfigError("window_len must be >= 1");

  Var pe;
  if (options.positional_encoding) pe = tape.constant(positional_encoding(len, d));

  std::vector<Var> scores, features;
  for (std::size_t start = 0; start < n; start += len) {
    const std::size_t valid = std::min(len, n - start);
    Var window = ops::slice_rows(fprime, start, start + valid);
    if (valid < len) window = ops::pad_rows(window, len);
    if (options.positional_encoding) window = ops::add(window, pe);
    Tensor mask = Tensor::matrix(1, len, 0.0f);
    for (std::size_t j = valid; j < len; ++j) mask.at(0, j) = kMaskedLogit;
    const Var key_mask = tape.constant(std::move(mask));

    ScoreOutput out = score_window(tape, window, key_mask, params, options);
    if (valid < len) {
      out.scores = ops::slice_rows(out.scores, 0, valid);
      out.features = ops::slice_rows(out.features, 0, valid);
    }
    scores.push_back(out.scores);
    features.push_back(out.features);
  }
  if (scores.size() == 1) return {scores.front(), features.front()};
  return {ops::concat_rows(scores), ops::concat_rows(features)};
}

}  // namespace sumkit
