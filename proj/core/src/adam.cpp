#include "sumkit/adam.hpp"

#include <cmath>

#include "sumkit/errors.hpp"

namespace sumkit {

void zero_grads(const ParamList& params) {
  for (const NamedParam& p : params) p.tensor->zero_grad();
}

std::size_t parameter_count(const ParamList& params) {
  std::size_t n = 0;
  for (const NamedParam& p : params) n += p.tensor->size();
  return n;
}

void init_uniform(Tensor& t, Rng& rng, double bound) {
  rng.fill_uniform(t.data(), -bound, bound);
}

void adam_step(const ParamList& params, AdamState& state) {
  if (state.first_moment.empty()) {
    for (const NamedParam& p : params) {
      state.first_moment.emplace_back(p.tensor->shape(), 0.0f);
      state.second_moment.emplace_back(p.tensor->shape(), 0.0f);
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw ShapeError("adam: state holds " + std::to_string(state.first_moment.size()) +
                     " moment buffers for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i].tensor;
    if (!state.first_moment[i].same_shape(p) || !state.second_moment[i].same_shape(p)) {
      throw ShapeError("adam: moment shape mismatch for " + params[i].name);
    }
    if (p.has_grad() && p.grad().size() != p.size()) {
      throw ShapeError("adam: gradient shape mismatch for " + params[i].name);
    }
  }

  const AdamOptions& o = state.options;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    std::vector<float>& m = state.first_moment[i].data();
    std::vector<float>& v = state.second_moment[i].data();
    const bool has_grad = p.has_grad();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = has_grad ? p.grad()[k] : 0.0;
      const double mk = o.beta1 * m[k] + (1.0 - o.beta1) * g;
      const double vk = o.beta2 * v[k] + (1.0 - o.beta2) * g * g;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double update = (mk / bc1) / (std::sqrt(vk / bc2) + o.eps);
      const double w = p.data()[k];
      p.data()[k] = static_cast<float>(w - o.lr * (update + o.weight_decay * w));
    }
  }
}

}  // namespace sumkit
