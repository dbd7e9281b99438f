#pragma once

#include <span>
#include <string>
#include <vector>

namespace sumkit {

struct ShotScore {
  std::size_t index = 0;
  std::size_t start = 0;  // first frame
  std::size_t end = 0;    // one past the last frame
  double value = 0.0;     // mean frame score over [start, end)

  std::size_t length() const { return end - start; }
};

struct Summary {
  std::vector<std::size_t> selected_shots;  // increasing shot indices
  std::vector<ShotScore> shots;             // all shots, for reporting
  std::vector<std::uint8_t> frame_mask;     // 1 for frames of selected shots
  std::size_t selected_frames = 0;
  std::size_t budget_frames = 0;
  double objective = 0.0;  // sum over selected shots of value * length
};

std::vector<ShotScore> frame_to_shot_scores(std::span<const float> scores,
                                            std::span<const std::size_t> boundaries);

// Exact 0/1 knapsack over integer frame lengths maximizing
// sum(value * length) under sum(length) <= budget_frames. Among equal
// objectives the solution with fewer frames wins, then the lexicographically
// smallest set of shot indices.
Summary knapsack_select(std::span<const ShotScore> shots, std::size_t budget_frames,
                        std::size_t num_frames);

// budget_frames = floor(budget_fraction * N).
Summary build_summary(std::span<const float> scores, std::span<const std::size_t> boundaries,
                      double budget_fraction);

// Marks every shot containing a labeled keyframe, then keeps shots in order
// of descending keyframe density (ties to earlier shots) while they fit in
// floor(budget_fraction * N) frames.
std::vector<std::uint8_t> keyframes_to_keyshots(std::span<const float> labels,
                                                std::span<const std::size_t> boundaries,
                                                double budget_fraction = 0.15);

// Objective of a given subset, summed in increasing shot order.
double knapsack_objective(std::span<const ShotScore> shots, std::span<const std::size_t> chosen);

// Run-length code of a binary mask: lengths of alternating runs, starting
// with a (possibly empty) run of zeros.
std::vector<std::size_t> run_length_encode(std::span<const std::uint8_t> mask);
std::vector<std::uint8_t> run_length_decode(std::span<const std::size_t> runs);

}  // namespace sumkit
