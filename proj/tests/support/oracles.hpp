#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sumkit/config.hpp"
#include "sumkit/summary.hpp"

namespace sumkit::oracle {

struct Subset {
  double objective = 0.0;
  std::size_t frames = 0;
  std::vector<std::size_t> shots;
};

// Every subset of up to ~20 shots, same tie rule as the library.
Subset brute_force_knapsack(std::span<const ShotScore> shots, std::size_t budget);

// tau by enumerating all N(N-1)/2 pairs.
double kendall_tau_pairs(std::span<const float> a, std::span<const float> b, TauVariant variant);

// Quadratic mid-rank assignment, then Pearson.
double spearman_direct(std::span<const float> a, std::span<const float> b);

// The keyshot rule written out step by step.
std::vector<std::uint8_t> keyshots_direct(std::span<const float> labels,
                                          std::span<const std::size_t> boundaries, double fraction);

// Random shot list with lengths in [1, max_len] and values in [0, 1).
std::vector<ShotScore> random_shots(std::uint64_t seed, std::size_t count, std::size_t max_len);

}  // namespace sumkit::oracle
