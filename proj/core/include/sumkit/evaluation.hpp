#pragma once

#include <span>
#include <string>
#include <vector>

#include "sumkit/config.hpp"

namespace sumkit {

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Overlap-based scores of two binary masks. Empty prediction or reference
// yields 0 for the corresponding ratio; P = R = 0 yields F1 = 0.
PrecisionRecall prf1(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> ref);

enum class F1Aggregation { avg, max };
F1Aggregation parse_f1_aggregation(std::string_view text);

double multi_ref_f1(std::span<const std::uint8_t> pred,
                    std::span<const std::vector<std::uint8_t>> references, F1Aggregation mode);

// Kendall rank correlation. Variant b corrects for ties in both rankings and
// returns 0 when either ranking is constant. O(N log N).
double kendall_tau(std::span<const float> pred, std::span<const float> ref,
                   TauVariant variant = TauVariant::b);

// Pearson correlation of mid-ranks; 0 when either side has no rank variance.
double spearman_rho(std::span<const float> pred, std::span<const float> ref);

// Mid-ranks (1-based, ties share their average rank).
std::vector<double> average_ranks(std::span<const float> values);

struct RankMetrics {
  double tau = 0.0;
  double rho = 0.0;
};

RankMetrics rank_metrics_per_annotator(std::span<const float> pred,
                                       std::span<const std::vector<float>> annotator_scores,
                                       TauVariant variant = TauVariant::b);

// Human inter-annotator agreement on TVSum, for report context only.
inline constexpr double kHumanKendallTau = 0.177;
inline constexpr double kHumanSpearmanRho = 0.204;

struct VideoMetrics {
  std::string video_id;
  std::vector<PrecisionRecall> per_reference;
  double f1 = 0.0;
  bool has_rank_metrics = false;
  double tau = 0.0;
  double rho = 0.0;
};

struct MetricReport {
  std::string f1_mode = "avg";
  std::vector<VideoMetrics> videos;
  double mean_f1 = 0.0;
  double mean_tau = 0.0;
  double mean_rho = 0.0;
  std::size_t rank_videos = 0;

  void finalize();  // recompute the aggregate means from `videos`
  std::string to_json(int indent = 2) const;
  std::string to_csv() const;
};

}  // namespace sumkit
