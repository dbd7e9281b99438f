#pragma once

#include <string>
#include <vector>

#include "sumkit/rng.hpp"
#include "sumkit/tensor.hpp"

namespace sumkit {

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

// Non-owning, ordered view of a model's learned tensors. Order is part of the
// checkpoint contract and of the optimizer state layout.
using ParamList = std::vector<NamedParam>;

void zero_grads(const ParamList& params);
std::size_t parameter_count(const ParamList& params);

// Uniform in [-bound, bound].
void init_uniform(Tensor& t, Rng& rng, double bound);

}  // namespace sumkit
