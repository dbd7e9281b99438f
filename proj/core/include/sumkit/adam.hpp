#pragma once

#include <cstdint>
#include <vector>

#include "sumkit/params.hpp"
#include "sumkit/tensor.hpp"

namespace sumkit {

struct AdamOptions {
  double lr = 1e-4;
  double weight_decay = 1e-3;  // decoupled, scaled by lr
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

// One Adam update using each parameter's gradient buffer (a missing buffer
// counts as zero). Moment buffers are created on the first call.
// Throws ShapeError when the state was built for differently shaped params.
void adam_step(const ParamList& params, AdamState& state);

}  // namespace sumkit
