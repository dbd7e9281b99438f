#include "sumkit/model.hpp"

#include "sumkit/errors.hpp"

namespace sumkit {

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams m;
  m.config = config;
  const std::size_t d = config.embed_dim;
  Rng fusion_rng(mix_seed(seed, 1));
  Rng lga_rng(mix_seed(seed, 2));
  Rng tf_rng(mix_seed(seed, 3));
  Rng recon_rng(mix_seed(seed, 4));
  m.fusion = FusionParams::init(config.m_fixed, d, fusion_rng);
  m.lga = LgaParams::init(d, config.lga_heads, lga_rng);
  m.transformer = TransformerParams::init(d, config.tf_heads, config.tf_enc_layers,
                                          config.tf_dec_layers, tf_rng);
  m.reconstructor = ReconstructorParams::init(d, config.recon_layers, recon_rng);
  return m;
}

ParamList ModelParams::parameters() {
  ParamList out;
  fusion.collect(out, "fusion.");
  lga.collect(out, "lga.");
  transformer.collect(out, "transformer.");
  reconstructor.collect(out, "reconstructor.");
  return out;
}

ForwardResult forward(Tape& tape, ModelParams& model, const Tensor& frames, const Tensor& text,
                      FeatureKind text_kind, Rng* dropout_rng) {
  const ModelConfig& c = model.config;
  if (frames.cols() != c.embed_dim || text.cols() != c.embed_dim) {
    throw ShapeError("features have dim " + std::to_string(frames.cols()) + "/" +
                     std::to_string(text.cols()) + " but the model expects " +
                     std::to_string(c.embed_dim));
  }
  ForwardResult r;
  r.text_tokens = text_tokens_for_attention(tape, text, text_kind, text_mode_for(text_kind),
                                            model.fusion, c.fused_only);
  r.attended = language_guided_attention(tape, tape.constant(frames), r.text_tokens, model.lga,
                                         c.lga_residual);
  TransformerOptions opts;
  opts.window_len = c.window_len;
  opts.positional_encoding = !c.disable_pos_enc;
  opts.dropout = c.dropout;
  opts.dropout_rng = dropout_rng;
  r.output = score_frames(tape, r.attended, model.transformer, opts);
  return r;
}

std::vector<float> score_video(ModelParams& model, const FeatureBundle& bundle) {
  Tape tape(false);
  const ForwardResult r = forward(tape, model, bundle.frames, bundle.text, bundle.text_kind);
  return r.output.scores.value().data();
}

}  // namespace sumkit
