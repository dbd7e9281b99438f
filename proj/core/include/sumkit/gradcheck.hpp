#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "sumkit/autodiff.hpp"
#include "sumkit/params.hpp"

namespace sumkit {

struct GradCheckOptions {
  double epsilon = 1e-3;           // must lie in [1e-5, 1e-3]
  std::size_t samples_per_tensor = 16;  // coordinates probed per parameter tensor
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates_checked = 0;
  // Probes that crossed a relu kink or changed a top-k set: one-sided when
  // only one side crossed, skipped when both did.
  std::size_t one_sided = 0;
  std::size_t coordinates_skipped = 0;
  // Cosine between the analytic and numeric gradients over the checked
  // coordinates; insensitive to the overall gradient scale. 1 when both vanish.
  double cosine = 1.0;
};

// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

// Compares reverse-mode gradients against central differences on a sampled
// subset of coordinates. The error per coordinate is
// |analytic - numeric| / max(1, |numeric|). A probe whose branch signature
// differs from the base evaluation is not used (see one_sided / skipped).
// Throws NumericError if the loss is not finite, UsageError on a bad epsilon.
GradCheckResult finite_diff_check(const LossBuilder& loss, const ParamList& params,
                                  const GradCheckOptions& options = {});

}  // namespace sumkit
