#include "gradient_cases.hpp"

#include <memory>

#include "sumkit/attention.hpp"
#include "sumkit/caption_fusion.hpp"
#include "sumkit/losses.hpp"
#include "sumkit/model.hpp"
#include "sumkit/rng.hpp"
#include "sumkit/synthetic.hpp"
#include "sumkit/transformer.hpp"

namespace sumkit::testing {

namespace {

Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::matrix(rows, cols);
  rng.fill_uniform(t.data(), lo, hi);
  return t;
}

// Keeps input tensors alive for the duration of one check.
struct Inputs {
  std::vector<std::unique_ptr<Tensor>> tensors;
  ParamList params;

  Tensor& add(const std::string& name, Tensor t) {
    tensors.push_back(std::make_unique<Tensor>(std::move(t)));
    params.push_back({name, tensors.back().get()});
    return *tensors.back();
  }
};

// sum(y * R) for a fixed random R, so every output coordinate matters.
Var project(Tape& tape, const Var& y, const Tensor& r) { return ops::sum(ops::mul(y, tape.constant(r))); }

GradCheckResult check(const LossBuilder& loss, const ParamList& params, std::uint64_t seed) {
  GradCheckOptions o;
  o.seed = seed;
  return finite_diff_check(loss, params, o);
}

using UnaryOp = Var (*)(const Var&);

GradientCase unary_case(std::string name, UnaryOp op, std::size_t rows, std::size_t cols) {
  return {name, [=](std::uint64_t seed) {
            Rng rng(seed);
            Inputs in;
            Tensor& x = in.add("x", random_tensor(rng, rows, cols, -2.0, 2.0));
            const Tensor r = random_tensor(rng, rows, cols);
            return check([&](Tape& t) { return project(t, op(t.param(x)), r); }, in.params, seed);
          }};
}

ModelConfig small_model(std::size_t dim) {
  ModelConfig c;
  c.embed_dim = dim;
  c.m_fixed = 3;
  c.lga_heads = 4;
  c.tf_heads = 8;
  c.tf_enc_layers = 2;
  c.tf_dec_layers = 2;
  c.window_len = 8;
  c.recon_layers = 2;
  return c;
}

SyntheticVideo eight_frame_video(std::uint64_t seed, std::size_t dim) {
  SyntheticOptions o;
  o.seed = seed;
  o.n_videos = 1;
  o.n_frames = 8;
  o.dim = dim;
  o.fps = 0.4;  // 2-frame shots
  o.keyframe_fraction = 0.25;
  o.distractor_shots = 1;
  o.n_captions = 4;
  return synthesize_video(o, 0, synthetic_topics(o));
}

GradientCase model_loss_case(std::string name, TrainMode mode, ReconMode recon) {
  return {name, [=](std::uint64_t seed) {
            const std::size_t dim = 16;
            const SyntheticVideo v = eight_frame_video(seed, dim);
            ModelParams model = ModelParams::init(small_model(dim), seed);
            LossConfig lc;
            lc.recon_mode = recon;
            const std::vector<float> labels = v.ground_truth.keyframe_labels;
            auto loss = [&](Tape& t) {
              const ForwardResult f = forward(t, model, v.frames, v.captions, FeatureKind::captions);
              LossInputs li{f.output.scores, f.output.features, &v.frames, std::nullopt};
              if (mode == TrainMode::supervised) li.labels = std::span<const float>(labels);
              return combined_loss(t, li, model.reconstructor, lc, mode).total;
            };
            return check(loss, model.parameters(), seed);
          }};
}

std::vector<GradientCase> build_cases() {
  std::vector<GradientCase> cases;

  cases.push_back({"matmul", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& a = in.add("a", random_tensor(rng, 3, 4));
                     Tensor& b = in.add("b", random_tensor(rng, 4, 2));
                     const Tensor r = random_tensor(rng, 3, 2);
                     return check([&](Tape& t) { return project(t, ops::matmul(t.param(a), t.param(b)), r); },
                                  in.params, seed);
                   }});
  cases.push_back({"matmul_nt", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& a = in.add("a", random_tensor(rng, 3, 4));
                     Tensor& b = in.add("b", random_tensor(rng, 5, 4));
                     const Tensor r = random_tensor(rng, 3, 5);
                     return check([&](Tape& t) { return project(t, ops::matmul_nt(t.param(a), t.param(b)), r); },
                                  in.params, seed);
                   }});
  cases.push_back({"add_mul_add_row", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& a = in.add("a", random_tensor(rng, 3, 4));
                     Tensor& b = in.add("b", random_tensor(rng, 3, 4));
                     Tensor& row = in.add("row", random_tensor(rng, 1, 4));
                     const Tensor r = random_tensor(rng, 3, 4);
                     auto f = [&](Tape& t) {
                       const Var x = ops::mul(ops::add(t.param(a), t.param(b)), t.param(a));
                       return project(t, ops::scale(ops::add_row(x, t.param(row)), 0.7f), r);
                     };
                     return check(f, in.params, seed);
                   }});
  cases.push_back(unary_case("sigmoid", &ops::sigmoid, 3, 5));
  cases.push_back(unary_case("relu", &ops::relu, 3, 5));
  cases.push_back(unary_case("softmax_rows", &ops::softmax_rows, 4, 6));
  cases.push_back({"layer_norm", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& x = in.add("x", random_tensor(rng, 4, 6, -2.0, 2.0));
                     Tensor& g = in.add("gain", random_tensor(rng, 1, 6, 0.5, 1.5));
                     Tensor& b = in.add("bias", random_tensor(rng, 1, 6));
                     const Tensor r = random_tensor(rng, 4, 6);
                     auto f = [&](Tape& t) {
                       return project(t, ops::layer_norm(t.param(x), t.param(g), t.param(b)), r);
                     };
                     return check(f, in.params, seed);
                   }});
  cases.push_back({"slice_concat_gather_pad_reshape", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& x = in.add("x", random_tensor(rng, 4, 6));
                     const Tensor r = random_tensor(rng, 3, 12);
                     const std::vector<std::size_t> idx = {3, 0, 3};
                     auto f = [&](Tape& t) {
                       const Var p = t.param(x);
                       const Var left = ops::slice_cols(p, 0, 2);
                       const Var right = ops::slice_cols(p, 4, 6);
                       const Var cols[] = {right, left};
                       const Var joined = ops::concat_cols(cols);  // 4 x 4
                       const Var top = ops::slice_rows(joined, 1, 3);
                       const Var g = ops::gather_rows(joined, idx);
                       const Var rows[] = {top, g};
                       const Var stacked = ops::pad_rows(ops::concat_rows(rows), 9);  // 9 x 4
                       return project(t, ops::reshape(stacked, 3, 12), r);
                     };
                     return check(f, in.params, seed);
                   }});
  cases.push_back({"sum_mean", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& x = in.add("x", random_tensor(rng, 3, 4));
                     auto f = [&](Tape& t) {
                       const Var p = t.param(x);
                       return ops::add(ops::sum(ops::mul(p, p)), ops::scale(ops::mean(p), 3.0f));
                     };
                     return check(f, in.params, seed);
                   }});
  cases.push_back({"attention", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& q = in.add("q", random_tensor(rng, 5, 4));
                     Tensor& k = in.add("k", random_tensor(rng, 3, 4));
                     Tensor& v = in.add("v", random_tensor(rng, 3, 4));
                     const Tensor r = random_tensor(rng, 5, 4);
                     return check([&](Tape& t) { return project(t, attention(t.param(q), t.param(k), t.param(v)), r); },
                                  in.params, seed);
                   }});
  cases.push_back({"multi_head_attention_masked", [](std::uint64_t seed) {
                     Rng rng(seed);
                     AttentionParams p = AttentionParams::init(8, rng);
                     Inputs in;
                     Tensor& x = in.add("x", random_tensor(rng, 6, 8));
                     p.collect(in.params, "mha.");
                     Tensor mask = Tensor::matrix(1, 6);
                     mask.data()[4] = mask.data()[5] = -1e9f;
                     const Tensor r = random_tensor(rng, 6, 8);
                     auto f = [&](Tape& t) {
                       const Var xv = t.param(x);
                       const Var m = t.constant(mask);
                       return project(t, multi_head_attention(xv, xv, bind(t, p), 4, &m), r);
                     };
                     return check(f, in.params, seed);
                   }});
  cases.push_back({"caption_fusion", [](std::uint64_t seed) {
                     Rng rng(seed);
                     FusionParams p = FusionParams::init(3, 8, rng);
                     rng.fill_uniform(p.bias.data(), -0.5, 0.5);
                     Inputs in;
                     Tensor& c = in.add("captions", random_tensor(rng, 3, 8));
                     p.collect(in.params, "fusion.");
                     const Tensor r = random_tensor(rng, 1, 8);
                     auto f = [&](Tape& t) {
                       return project(t, fuse_text(t.param(c), t.param(p.weight), t.param(p.bias)), r);
                     };
                     return check(f, in.params, seed);
                   }});
  for (bool residual : {true, false}) {
    cases.push_back({residual ? "language_guided_attention" : "language_guided_attention_no_residual",
                     [residual](std::uint64_t seed) {
                       Rng rng(seed);
                       LgaParams p = LgaParams::init(8, 4, rng);
                       FusionParams fp = FusionParams::init(3, 8, rng);
                       Inputs in;
                       Tensor& frames = in.add("frames", random_tensor(rng, 6, 8));
                       const Tensor captions = random_tensor(rng, 5, 8);
                       p.collect(in.params, "lga.");
                       fp.collect(in.params, "fusion.");
                       const Tensor r = random_tensor(rng, 6, 8);
                       auto f = [&](Tape& t) {
                         const Var tokens = text_tokens_for_attention(t, captions, FeatureKind::captions,
                                                                      TextMode::generic, fp, false);
                         return project(t, language_guided_attention(t, t.param(frames), tokens, p, residual), r);
                       };
                       return check(f, in.params, seed);
                     }});
  }
  for (std::size_t window : {std::size_t{8}, std::size_t{12}, std::size_t{5}}) {
    cases.push_back({"transformer_2x2_8frames_window" + std::to_string(window), [window](std::uint64_t seed) {
                       Rng rng(seed);
                       TransformerParams p = TransformerParams::init(16, 8, 2, 2, rng);
                       Inputs in;
                       Tensor& x = in.add("fprime", random_tensor(rng, 8, 16));
                       p.collect(in.params, "transformer.");
                       const Tensor r = random_tensor(rng, 8, 16);
                       TransformerOptions o;
                       o.window_len = window;
                       auto f = [&](Tape& t) {
                         const ScoreOutput s = score_frames(t, t.param(x), p, o);
                         // mean-normalized like the real losses so float32 rounding of the
                         // loss value stays well below the tolerance
                         return ops::add(ops::mean(s.scores), ops::mean(ops::mul(s.features, t.constant(r))));
                       };
                       return check(f, in.params, seed);
                     }});
  }
  cases.push_back({"reconstructor", [](std::uint64_t seed) {
                     Rng rng(seed);
                     ReconstructorParams p = ReconstructorParams::init(8, 2, rng);
                     for (auto& b : p.biases) rng.fill_uniform(b.data(), -0.3, 0.3);
                     Inputs in;
                     Tensor& x = in.add("selected", random_tensor(rng, 4, 8));
                     p.collect(in.params, "recon.");
                     const Tensor r = random_tensor(rng, 4, 8);
                     return check([&](Tape& t) { return project(t, reconstruct(t, t.param(x), p), r); },
                                  in.params, seed);
                   }});
  cases.push_back({"classification_loss", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& logits = in.add("logits", random_tensor(rng, 10, 1, -3.0, 3.0));
                     std::vector<float> labels(10, 0.0f);
                     labels[rng.below(10)] = 1.0f;
                     labels[rng.below(10)] = 1.0f;
                     auto f = [&](Tape& t) { return classification_loss(ops::sigmoid(t.param(logits)), labels); };
                     return check(f, in.params, seed);
                   }});
  for (ReconMode mode : {ReconMode::mse, ReconMode::l2}) {
    cases.push_back({mode == ReconMode::mse ? "reconstruction_loss_mse" : "reconstruction_loss_l2",
                     [mode](std::uint64_t seed) {
                       Rng rng(seed);
                       Inputs in;
                       Tensor& a = in.add("original", random_tensor(rng, 5, 6));
                       Tensor& b = in.add("reconstructed", random_tensor(rng, 5, 6));
                       auto f = [&](Tape& t) { return reconstruction_loss(t.param(a), t.param(b), mode); };
                       return check(f, in.params, seed);
                     }});
  }
  cases.push_back({"diversity_loss", [](std::uint64_t seed) {
                     Rng rng(seed);
                     Inputs in;
                     Tensor& x = in.add("reconstructed", random_tensor(rng, 5, 6));
                     return check([&](Tape& t) { return diversity_loss(t.param(x)); }, in.params, seed);
                   }});
  cases.push_back(model_loss_case("full_supervised_loss_8frames", TrainMode::supervised, ReconMode::mse));
  cases.push_back(model_loss_case("full_unsupervised_loss_8frames", TrainMode::unsupervised, ReconMode::l2));
  return cases;
}

}  // namespace

const std::vector<GradientCase>& gradient_cases() {
  static const std::vector<GradientCase> cases = build_cases();
  return cases;
}

}  // namespace sumkit::testing
