#include "sumkit/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sumkit/errors.hpp"
#include "sumkit/feature_io.hpp"

namespace sumkit {

std::vector<ShotScore> frame_to_shot_scores(std::span<const float> scores,
                                            std::span<const std::size_t> boundaries) {
  validate_boundaries({boundaries.begin(), boundaries.end()}, scores.size());
  std::vector<ShotScore> shots;
  shots.reserve(boundaries.size() - 1);
  for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
    ShotScore shot;
    shot.index = s;
    shot.start = boundaries[s];
    shot.end = boundaries[s + 1];
    double total = 0.0;
    for (std::size_t f = shot.start; f < shot.end; ++f) total += scores[f];
    shot.value = total / static_cast<double>(shot.length());
    shots.push_back(shot);
  }
  return shots;
}

double knapsack_objective(std::span<const ShotScore> shots, std::span<const std::size_t> chosen) {
  double total = 0.0;
  for (std::size_t i : chosen) total += shots[i].value * static_cast<double>(shots[i].length());
  return total;
}

namespace {

struct Best {
  double value = 0.0;
  std::size_t frames = 0;
};

// True when a is strictly preferred to b.
bool better(const Best& a, const Best& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.frames < b.frames;
}

}  // namespace

Summary knapsack_select(std::span<const ShotScore> shots, std::size_t budget_frames,
                        std::size_t num_frames) {
  const std::size_t n = shots.size();
  const std::size_t cap = std::min(budget_frames, num_frames);

  // best[i][c]: optimum over shots i..n-1 with capacity c, built from the back
  // so that the forward walk can prefer earlier shots on ties.
  std::vector<Best> next(cap + 1), cur(cap + 1);
  std::vector<std::uint8_t> take(n * (cap + 1), 0);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t w = shots[i].length();
    const double v = shots[i].value * static_cast<double>(w);
    for (std::size_t c = 0; c <= cap; ++c) {
      cur[c] = next[c];
      if (w <= c) {
        const Best with{v + next[c - w].value, w + next[c - w].frames};
        if (!better(cur[c], with)) {
          cur[c] = with;
          take[i * (cap + 1) + c] = 1;
        }
      }
    }
    std::swap(cur, next);
  }

  Summary s;
  s.budget_frames = budget_frames;
  s.shots.assign(shots.begin(), shots.end());
  s.frame_mask.assign(num_frames, 0);
  std::size_t c = cap;
  for (std::size_t i = 0; i < n; ++i) {
    if (take[i * (cap + 1) + c]) {
      s.selected_shots.push_back(i);
      c -= shots[i].length();
    }
  }
  for (std::size_t i : s.selected_shots) {
    for (std::size_t f = shots[i].start; f < shots[i].end && f < num_frames; ++f) s.frame_mask[f] = 1;
    s.selected_frames += shots[i].length();
  }
  s.objective = knapsack_objective(shots, s.selected_shots);
  return s;
}

Summary build_summary(std::span<const float> scores, std::span<const std::size_t> boundaries,
                      double budget_fraction) {
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) {
    throw ConfigError("budget_fraction must lie in (0, 1]");
  }
  const std::size_t n = scores.size();
  const auto budget = static_cast<std::size_t>(std::floor(budget_fraction * static_cast<double>(n)));
  const std::vector<ShotScore> shots = frame_to_shot_scores(scores, boundaries);
  return knapsack_select(shots, budget, n);
}

std::vector<std::uint8_t> keyframes_to_keyshots(std::span<const float> labels,
                                                std::span<const std::size_t> boundaries,
                                                double budget_fraction) {
  const std::size_t n = labels.size();
  validate_boundaries({boundaries.begin(), boundaries.end()}, n);
  const auto budget = static_cast<std::size_t>(std::floor(budget_fraction * static_cast<double>(n)));

  struct Candidate {
    std::size_t shot, start, end, keyframes;
  };
  std::vector<Candidate> marked;
  for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
    std::size_t k = 0;
    for (std::size_t f = boundaries[s]; f < boundaries[s + 1]; ++f) k += labels[f] > 0.5f;
    if (k > 0) marked.push_back({s, boundaries[s], boundaries[s + 1], k});
  }
  // density k/len compared exactly via cross multiplication
  std::stable_sort(marked.begin(), marked.end(), [](const Candidate& a, const Candidate& b) {
    return a.keyframes * (b.end - b.start) > b.keyframes * (a.end - a.start);
  });

  std::vector<std::uint8_t> mask(n, 0);
  std::size_t used = 0;
  for (const Candidate& c : marked) {
    const std::size_t len = c.end - c.start;
    if (used + len > budget) continue;
    used += len;
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(c.start),
              mask.begin() + static_cast<std::ptrdiff_t>(c.end), 1);
  }
  return mask;
}

std::vector<std::size_t> run_length_encode(std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> runs;
  std::uint8_t current = 0;
  std::size_t len = 0;
  for (std::uint8_t v : mask) {
    const std::uint8_t b = v ? 1 : 0;
    if (b == current) {
      ++len;
    } else {
      runs.push_back(len);
      current = b;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

std::vector<std::uint8_t> run_length_decode(std::span<const std::size_t> runs) {
  std::vector<std::uint8_t> mask;
  std::uint8_t current = 0;
  for (std::size_t len : runs) {
    mask.insert(mask.end(), len, current);
    current ^= 1;
  }
  return mask;
}

}  // namespace sumkit
