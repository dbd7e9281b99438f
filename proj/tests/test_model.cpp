#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "sumkit/attention.hpp"
#include "sumkit/caption_fusion.hpp"
#include "sumkit/errors.hpp"
#include "sumkit/losses.hpp"
#include "sumkit/model.hpp"
#include "sumkit/rng.hpp"
#include "sumkit/transformer.hpp"

namespace sumkit {
namespace {

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  rng.fill_uniform(t.data(), -scale, scale);
  return t;
}

void zero_all(ParamList params) {
  for (auto& p : params) std::fill(p.tensor->data().begin(), p.tensor->data().end(), 0.0f);
}

Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  Tensor out = t;
  for (std::size_t i = 0; i < perm.size(); ++i)
    std::copy(t.row(perm[i]).begin(), t.row(perm[i]).end(), out.row(i).begin());
  return out;
}

// caption fusion

TEST(CaptionSampling, Examples) {
  EXPECT_EQ(caption_sample_indices(7, 7), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(caption_sample_indices(13, 7), (std::vector<std::size_t>{0, 2, 4, 6, 8, 10, 12}));
  EXPECT_EQ(caption_sample_indices(5, 1), (std::vector<std::size_t>{2}));
  EXPECT_THROW(caption_sample_indices(5, 0), ConfigError);
  EXPECT_THROW(caption_sample_indices(0, 3), UsageError);
}

TEST(CaptionSampling, ShortListFollowsRoundingFormula) {
  // evaluate round(j * (M - 1) / (m - 1)) with halves up, independently
  for (std::size_t m_captions = 1; m_captions < 20; ++m_captions) {
    for (std::size_t m_fixed = 2; m_fixed < 16; ++m_fixed) {
      const auto got = caption_sample_indices(m_captions, m_fixed);
      ASSERT_EQ(got.size(), m_fixed);
      for (std::size_t j = 0; j < m_fixed; ++j) {
        const double x = static_cast<double>(j * (m_captions - 1)) / static_cast<double>(m_fixed - 1);
        EXPECT_EQ(got[j], static_cast<std::size_t>(std::floor(x + 0.5))) << m_captions << " " << m_fixed;
      }
    }
  }
  EXPECT_EQ(caption_sample_indices(3, 7), (std::vector<std::size_t>{0, 0, 1, 1, 1, 2, 2}));
}

TEST(CaptionFusion, ZeroParamsGiveBias) {
  Rng rng(1);
  FusionParams p = FusionParams::init(3, 4, rng);
  std::fill(p.weight.data().begin(), p.weight.data().end(), 0.0f);
  p.bias = Tensor::from_rows({{1, 2, 3, 4}});
  Tape tape;
  const Var out = fuse_text(tape, random_matrix(rng, 3, 4), p);
  EXPECT_EQ(out.value().data(), (std::vector<float>{1, 2, 3, 4}));
}

TEST(CaptionFusion, IsAffine) {
  Rng rng(2);
  FusionParams p = FusionParams::init(3, 5, rng);
  rng.fill_uniform(p.bias.data(), -1, 1);
  const Tensor x = random_matrix(rng, 3, 5), y = random_matrix(rng, 3, 5);
  const float a = 0.7f, b = -1.3f;
  Tensor mix = x;
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
  Tape tape;
  const Tensor fx = fuse_text(tape, x, p).value(), fy = fuse_text(tape, y, p).value();
  const Tensor fm = fuse_text(tape, mix, p).value();
  for (std::size_t j = 0; j < 5; ++j) {
    const double expect = a * fx.data()[j] + b * fy.data()[j] - (a + b - 1.0f) * p.bias.data()[j];
    EXPECT_NEAR(fm.data()[j], expect, 1e-5);
  }
}

TEST(CaptionFusion, ShapeMismatchThrows) {
  Rng rng(3);
  FusionParams p = FusionParams::init(3, 4, rng);
  Tape tape;
  EXPECT_THROW(fuse_text(tape, random_matrix(rng, 2, 4), p), ShapeError);
}

TEST(TextTokens, QueryAndGenericShapes) {
  Rng rng(4);
  FusionParams p = FusionParams::init(7, 6, rng);
  Tape tape;
  const Tensor q = random_matrix(rng, 1, 6);
  const Var qt = text_tokens_for_attention(tape, q, FeatureKind::query, TextMode::query, p, false);
  EXPECT_EQ(qt.value().data(), q.data());

  const Tensor caps = random_matrix(rng, 7, 6);
  const Var gt = text_tokens_for_attention(tape, caps, FeatureKind::captions, TextMode::generic, p, false);
  ASSERT_EQ(gt.rows(), 8u);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(gt.value().at(i, j), caps.at(i, j));
  EXPECT_EQ(text_tokens_for_attention(tape, caps, FeatureKind::captions, TextMode::generic, p, true).rows(), 1u);
  EXPECT_THROW(text_tokens_for_attention(tape, caps, FeatureKind::captions, TextMode::query, p, false),
               UsageError);
}

// attention

TEST(Attention, WeightsRowsSumToOne) {
  Rng rng(5);
  Tape tape;
  const Var w = attention_weights(tape.constant(random_matrix(rng, 6, 4, 3.0)),
                                  tape.constant(random_matrix(rng, 9, 4, 3.0)));
  for (std::size_t i = 0; i < 6; ++i) {
    const auto row = w.value().row(i);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-6);
  }
}

TEST(Attention, MaskedKeysGetNoWeight) {
  Rng rng(6);
  Tape tape;
  const Var mask = tape.constant(Tensor::from_rows({{0, 0, -1e9f}}));
  const Var w = attention_weights(tape.constant(random_matrix(rng, 2, 4)), tape.constant(random_matrix(rng, 3, 4)),
                                  &mask);
  EXPECT_EQ(w.value().at(0, 2), 0.0f);
  EXPECT_EQ(w.value().at(1, 2), 0.0f);
}

TEST(LanguageGuidedAttention, SingleTokenIdentityGivesTheToken) {
  Rng rng(7);
  LgaParams p = LgaParams::init(4, 1, rng);
  p.proj.wq = p.proj.wk = p.proj.wv = p.proj.wo = Tensor::identity(4);
  Tape tape;
  const Tensor text = random_matrix(rng, 1, 4);
  const Var out = language_guided_attention(tape, tape.constant(random_matrix(rng, 5, 4)), tape.constant(text), p,
                                            false);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out.value().at(i, j), text.data()[j], 1e-6);
}

TEST(LanguageGuidedAttention, ResidualAddsFrames) {
  Rng rng(8);
  LgaParams p = LgaParams::init(8, 4, rng);
  const Tensor frames = random_matrix(rng, 5, 8), text = random_matrix(rng, 3, 8);
  Tape tape;
  const Tensor plain = language_guided_attention(tape, tape.constant(frames), tape.constant(text), p, false).value();
  const Tensor res = language_guided_attention(tape, tape.constant(frames), tape.constant(text), p, true).value();
  for (std::size_t i = 0; i < res.size(); ++i) EXPECT_NEAR(res.data()[i], plain.data()[i] + frames.data()[i], 1e-6);
}

TEST(LanguageGuidedAttention, PermutationProperties) {
  Rng rng(9);
  LgaParams p = LgaParams::init(8, 4, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor frames = random_matrix(rng, 6, 8), text = random_matrix(rng, 4, 8);
    std::vector<std::size_t> fperm(6), tperm(4);
    std::iota(fperm.begin(), fperm.end(), 0);
    std::iota(tperm.begin(), tperm.end(), 0);
    rng.shuffle(fperm);
    rng.shuffle(tperm);
    Tape tape;
    const Tensor base = language_guided_attention(tape, tape.constant(frames), tape.constant(text), p, true).value();
    const Tensor pf = language_guided_attention(tape, tape.constant(permute_rows(frames, fperm)), tape.constant(text),
                                                p, true)
                          .value();
    const Tensor pt = language_guided_attention(tape, tape.constant(frames), tape.constant(permute_rows(text, tperm)),
                                                p, true)
                          .value();
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_NEAR(pf.at(i, j), base.at(fperm[i], j), 1e-5);
        EXPECT_NEAR(pt.at(i, j), base.at(i, j), 1e-5);
      }
  }
}

TEST(LanguageGuidedAttention, EmptyInputsThrow) {
  Rng rng(10);
  LgaParams p = LgaParams::init(4, 2, rng);
  Tape tape;
  const Var frames = tape.constant(random_matrix(rng, 3, 4));
  EXPECT_THROW(language_guided_attention(tape, frames, Var{}, p, true), UsageError);
  EXPECT_THROW(language_guided_attention(tape, frames, tape.constant(Tensor{}), p, true), UsageError);
}

// transformer

TEST(PositionalEncoding, Values) {
  const Tensor pe = positional_encoding(50, 16);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(pe.at(0, 2 * i), 0.0f);
    EXPECT_EQ(pe.at(0, 2 * i + 1), 1.0f);
  }
  EXPECT_NEAR(pe.at(1, 0), 0.84147098, 1e-6);
  for (float v : pe.data()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_NEAR(pe.at(7, 5), std::cos(7.0 / std::pow(10000.0, 4.0 / 16.0)), 1e-6);
  EXPECT_THROW(positional_encoding(4, 5), ConfigError);
}

TEST(Windowing, SplitsAndRoundTrips) {
  Rng rng(11);
  const Tensor one = random_matrix(rng, 256, 4);
  const auto w1 = window_video(one, 256);
  ASSERT_EQ(w1.size(), 1u);
  EXPECT_EQ(w1[0].valid_len, 256u);

  const Tensor frames = random_matrix(rng, 300, 4);
  const auto w = window_video(frames, 256);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].valid_len, 256u);
  EXPECT_EQ(w[1].valid_len, 44u);
  EXPECT_EQ(w[1].offset, 256u);
  EXPECT_EQ(w[1].length(), 256u);
  std::vector<float> joined;
  for (const auto& win : w) {
    for (std::size_t r = 0; r < win.length(); ++r) {
      const bool valid = r < win.valid_len;
      EXPECT_EQ(win.mask[r], valid ? 1.0f : 0.0f);
      if (valid) joined.insert(joined.end(), win.features.row(r).begin(), win.features.row(r).end());
      else
        for (float v : win.features.row(r)) EXPECT_EQ(v, 0.0f);
    }
  }
  EXPECT_EQ(joined, frames.data());
}

TransformerParams small_transformer(Rng& rng, std::size_t dim = 16) {
  return TransformerParams::init(dim, 4, 2, 2, rng);
}

std::vector<float> run_scores(TransformerParams& p, const Tensor& x, TransformerOptions o) {
  Tape tape(false);
  const auto out = score_frames(tape, tape.constant(x), p, o);
  return out.scores.value().data();
}

TEST(FrameScoring, ConstantNetworkGivesSigmoidBias) {
  Rng rng(12);
  TransformerParams p = small_transformer(rng);
  ParamList list;
  p.collect(list, "t.");
  zero_all(list);
  p.head_bias.data()[0] = 0.3f;
  const auto s = run_scores(p, random_matrix(rng, 10, 16), {.window_len = 4});
  ASSERT_EQ(s.size(), 10u);
  for (float v : s) EXPECT_NEAR(v, 1.0 / (1.0 + std::exp(-0.3)), 1e-7);
}

TEST(FrameScoring, OutputLengthAndRange) {
  Rng rng(13);
  TransformerParams p = small_transformer(rng);
  for (std::size_t n : {1u, 3u, 8u, 9u, 17u}) {
    const auto s = run_scores(p, random_matrix(rng, n, 16, 2.0), {.window_len = 8});
    ASSERT_EQ(s.size(), n);
    for (float v : s) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
    }
  }
}

TEST(FrameScoring, PaddingIndependence) {
  Rng rng(14);
  TransformerParams p = small_transformer(rng, 32);
  const Tensor x = random_matrix(rng, 44, 32, 2.0);
  const auto padded = run_scores(p, x, {.window_len = 256});
  const auto exact = run_scores(p, x, {.window_len = 44});
  ASSERT_EQ(padded.size(), 44u);
  for (std::size_t i = 0; i < 44; ++i) EXPECT_NEAR(padded[i], exact[i], 1e-5) << i;
}

TEST(FrameScoring, WindowsAreIndependent) {
  Rng rng(15);
  TransformerParams p = small_transformer(rng);
  const Tensor x = random_matrix(rng, 20, 16);
  const auto all = run_scores(p, x, {.window_len = 8});
  Tensor tail = Tensor::matrix(4, 16);
  std::copy(x.data().begin() + 16 * 16, x.data().end(), tail.data().begin());
  const auto last = run_scores(p, tail, {.window_len = 8});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(all[16 + i], last[i], 1e-6);
}

TEST(FrameScoring, PermutationEquivariantWithoutPositions) {
  Rng rng(16);
  TransformerParams p = small_transformer(rng);
  const Tensor x = random_matrix(rng, 8, 16, 2.0);
  std::vector<std::size_t> perm{3, 0, 7, 1, 6, 2, 5, 4};
  const TransformerOptions o{.window_len = 8, .positional_encoding = false};
  const auto base = run_scores(p, x, o);
  const auto permuted = run_scores(p, permute_rows(x, perm), o);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(permuted[i], base[perm[i]], 1e-5);
}

// losses

TEST(ClassificationLoss, HandCase) {
  Tape tape;
  const std::vector<float> labels{1, 0, 0, 0};
  const Var loss = classification_loss(tape.constant(Tensor::matrix(4, 1, 0.5f)), labels);
  EXPECT_NEAR(loss.value().data()[0], 0.625 * std::log(2.0), 1e-6);
}

TEST(ClassificationLoss, NearPerfectFitAndNonNegative) {
  Tape tape;
  const std::vector<float> labels{1, 0, 1, 0, 0};
  Tensor s = Tensor::matrix(5, 1);
  for (std::size_t i = 0; i < 5; ++i) s.data()[i] = labels[i] ? 0.9999f : 0.0001f;
  EXPECT_LT(classification_loss(tape.constant(s), labels).value().data()[0], 1e-3);
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    rng.fill_uniform(s.data(), 0.0, 1.0);
    std::vector<float> l(5);
    for (float& v : l) v = rng.uniform() < 0.4 ? 1.0f : 0.0f;
    EXPECT_GE(classification_loss(tape.constant(s), l, trial % 2 == 0).value().data()[0], 0.0f);
  }
}

TEST(ClassificationLoss, WeightsAndDegenerateLabels) {
  const std::vector<float> labels{1, 0, 0, 0};
  const ClassWeights w = class_weights(labels, false);
  EXPECT_FLOAT_EQ(w.keyframe, 0.25f);
  EXPECT_FLOAT_EQ(w.background, 0.75f);
  const ClassWeights inv = class_weights(labels, true);
  EXPECT_FLOAT_EQ(inv.keyframe, 0.75f);
  EXPECT_FLOAT_EQ(inv.background, 0.25f);
  EXPECT_TRUE(class_weights(std::vector<float>{0, 0, 0}, false).degenerate);
}

TEST(SelectKeyframes, Examples) {
  const std::vector<float> s{0.9f, 0.1f, 0.8f, 0.2f};
  EXPECT_EQ(select_keyframes(s, 0.5).indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_keyframes(s, 1.0).indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(select_keyframes(std::vector<float>(6, 0.5f), 0.5).indices, (std::vector<std::size_t>{0, 1, 2}));
  // at least two frames
  EXPECT_EQ(select_keyframes(s, 0.01).indices.size(), 2u);
}

TEST(Reconstructor, ZeroAndIdentity) {
  Rng rng(18);
  const Tensor x = random_matrix(rng, 5, 6);
  ReconstructorParams z = ReconstructorParams::init(6, 2, rng);
  ParamList list;
  z.collect(list, "r.");
  zero_all(list);
  Tape tape;
  for (float v : reconstruct(tape, tape.constant(x), z).value().data()) EXPECT_EQ(v, 0.0f);

  ReconstructorParams id = ReconstructorParams::init(6, 1, rng);
  id.weights[0] = Tensor::identity(6);
  std::fill(id.biases[0].data().begin(), id.biases[0].data().end(), 0.0f);
  EXPECT_EQ(reconstruct(tape, tape.constant(x), id).value().data(), x.data());
}

TEST(ReconstructionLoss, Examples) {
  Tape tape;
  const Var x = tape.constant(Tensor::from_rows({{1, 0}}));
  const Var y = tape.constant(Tensor::from_rows({{0, 0}}));
  EXPECT_FLOAT_EQ(reconstruction_loss(x, y, ReconMode::mse).value().data()[0], 1.0f);
  EXPECT_FLOAT_EQ(reconstruction_loss(x, y, ReconMode::l2).value().data()[0], 1.0f);
  EXPECT_EQ(reconstruction_loss(x, x, ReconMode::mse).value().data()[0], 0.0f);
  EXPECT_EQ(reconstruction_loss(x, x, ReconMode::l2).value().data()[0], 0.0f);
}

TEST(ReconstructionLoss, MatchesDirectSum) {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_matrix(rng, 2, 5), b = random_matrix(rng, 2, 5);
    double sq = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      double r = 0.0;
      for (std::size_t j = 0; j < 5; ++j) r += std::pow(a.at(i, j) - b.at(i, j), 2);
      sq += r;
      norm += std::sqrt(r);
    }
    Tape tape;
    EXPECT_NEAR(reconstruction_loss(tape.constant(a), tape.constant(b), ReconMode::mse).value().data()[0], sq / 2,
                1e-5);
    EXPECT_NEAR(reconstruction_loss(tape.constant(a), tape.constant(b), ReconMode::l2).value().data()[0], norm / 2,
                1e-5);
  }
}

TEST(DiversityLoss, Examples) {
  Tape tape;
  EXPECT_NEAR(diversity_loss(tape.constant(Tensor::from_rows({{1, 2}, {1, 2}, {1, 2}}))).value().data()[0], 1.0, 1e-6);
  EXPECT_NEAR(diversity_loss(tape.constant(Tensor::from_rows({{1, 0}, {0, 3}}))).value().data()[0], 0.0, 1e-6);
  EXPECT_NEAR(diversity_loss(tape.constant(Tensor::from_rows({{1, 0}, {-1, 0}}))).value().data()[0], -1.0, 1e-6);
  EXPECT_EQ(diversity_loss(tape.constant(Tensor::from_rows({{1, 0}}))).value().data()[0], 0.0f);
}

TEST(DiversityLoss, MatchesPairEnumeration) {
  Rng rng(20);
  const Tensor x = random_matrix(rng, 5, 3);
  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      double d = 0, ni = 0, nj = 0;
      for (std::size_t k = 0; k < 3; ++k) {
        d += x.at(i, k) * x.at(j, k);
        ni += x.at(i, k) * x.at(i, k);
        nj += x.at(j, k) * x.at(j, k);
      }
      total += d / std::sqrt(ni * nj);
      ++pairs;
    }
  Tape tape;
  EXPECT_NEAR(diversity_loss(tape.constant(x)).value().data()[0], total / pairs, 1e-6);
}

TEST(CombinedLoss, DefaultsAndDegenerateWeights) {
  const LossConfig defaults;
  EXPECT_EQ(defaults.alpha, 0.5);
  EXPECT_EQ(defaults.beta, 0.3);
  EXPECT_EQ(defaults.lambda, 0.2);

  Rng rng(21);
  ReconstructorParams recon = ReconstructorParams::init(4, 2, rng);
  const Tensor frames = random_matrix(rng, 6, 4);
  Tensor s = Tensor::matrix(6, 1);
  rng.fill_uniform(s.data(), 0.05, 0.95);
  const std::vector<float> labels{0, 1, 0, 0, 1, 0};
  LossConfig c;
  c.alpha = 1.0;
  c.beta = 0.0;
  c.lambda = 0.0;
  Tape tape;
  const LossInputs in{tape.constant(s), tape.constant(random_matrix(rng, 6, 4)), &frames, std::span<const float>(labels)};
  const LossBreakdown b = combined_loss(tape, in, recon, c, TrainMode::supervised);
  EXPECT_EQ(b.total.value().data()[0], classification_loss(tape.constant(s), labels).value().data()[0]);

  const LossInputs unlabeled{tape.constant(s), tape.constant(frames), &frames, std::nullopt};
  EXPECT_THROW(combined_loss(tape, unlabeled, recon, c, TrainMode::supervised), UsageError);
}

TEST(CombinedLoss, UnsupervisedVanishesForPerfectOrthogonalReconstruction) {
  Rng rng(22);
  ReconstructorParams id = ReconstructorParams::init(4, 1, rng);
  id.weights[0] = Tensor::identity(4);
  std::fill(id.biases[0].data().begin(), id.biases[0].data().end(), 0.0f);
  const Tensor frames = Tensor::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  Tape tape;
  const LossInputs in{tape.constant(Tensor::from_rows({{0.9f}, {0.2f}, {0.8f}, {0.1f}})), tape.constant(frames),
                      &frames, std::nullopt};
  const LossBreakdown b = combined_loss(tape, in, id, LossConfig{}, TrainMode::unsupervised);
  EXPECT_EQ(b.total.value().data()[0], 0.0f);
  EXPECT_EQ(b.selection.indices, (std::vector<std::size_t>{0, 2}));
}

// whole model

ModelConfig tiny_config() {
  ModelConfig mc;
  mc.embed_dim = 8;
  mc.m_fixed = 3;
  mc.lga_heads = 2;
  mc.tf_heads = 2;
  mc.tf_enc_layers = 1;
  mc.tf_dec_layers = 1;
  mc.window_len = 8;
  return mc;
}

TEST(Model, InitIsDeterministicAndOrdered) {
  ModelParams a = ModelParams::init(tiny_config(), 5), b = ModelParams::init(tiny_config(), 5);
  const ParamList pa = a.parameters(), pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_EQ(pa[i].tensor->data(), pb[i].tensor->data());
  }
  EXPECT_EQ(pa.front().name.rfind("fusion", 0), 0u);
  EXPECT_EQ(pa.back().name.rfind("reconstructor", 0), 0u);
  ModelParams c = ModelParams::init(tiny_config(), 6);
  EXPECT_NE(c.parameters()[0].tensor->data(), pa[0].tensor->data());
}

TEST(Model, ScoresOnePerFrameForEitherTextKind) {
  Rng rng(23);
  ModelParams m = ModelParams::init(tiny_config(), 1);
  const FeatureBundle caps{"v", random_matrix(rng, 19, 8), 2.0, random_matrix(rng, 5, 8), FeatureKind::captions};
  const FeatureBundle query{"v", caps.frames, 2.0, random_matrix(rng, 1, 8), FeatureKind::query};
  const auto sc = score_video(m, caps), sq = score_video(m, query);
  EXPECT_EQ(sc.size(), 19u);
  EXPECT_EQ(sq.size(), 19u);
  EXPECT_NE(sc, sq);
  EXPECT_EQ(score_video(m, caps), sc);
}

TEST(Model, DimensionMismatchRejected) {
  Rng rng(24);
  ModelParams m = ModelParams::init(tiny_config(), 1);
  const FeatureBundle wrong{"v", random_matrix(rng, 5, 6), 2.0, random_matrix(rng, 1, 6), FeatureKind::query};
  EXPECT_THROW(score_video(m, wrong), Error);
}

}  // namespace
}  // namespace sumkit
