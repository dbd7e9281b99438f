#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sumkit/gradcheck.hpp"

namespace sumkit::testing {

// A randomized finite-difference check. `run` builds fresh random inputs
// and parameters from the seed and returns the check result.
struct GradientCase {
  std::string name;
  std::function<GradCheckResult(std::uint64_t seed)> run;
};

const std::vector<GradientCase>& gradient_cases();

inline constexpr double kGradientTolerance = 1e-3;

}  // namespace sumkit::testing
