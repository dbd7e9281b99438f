#include "sumkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sumkit/errors.hpp"
#include "sumkit/rng.hpp"

namespace sumkit {

namespace {

struct Probe {
  double value = 0.0;
  std::uint64_t branches = 0;
};

Probe evaluate(const LossBuilder& loss) {
  Tape tape(false);
  const Var out = loss(tape);
  if (out.value().size() != 1) throw ShapeError("gradient check needs a scalar loss");
  const double v = out.value().data()[0];
  if (!std::isfinite(v)) throw NumericError("gradient check: loss is not finite");
  return {v, tape.branch_signature()};
}

}  // namespace

GradCheckResult finite_diff_check(const LossBuilder& loss, const ParamList& params,
                                  const GradCheckOptions& options) {
  if (!(options.epsilon >= 1e-5 && options.epsilon <= 1e-3)) {
    throw UsageError("gradient check epsilon must lie in [1e-5, 1e-3]");
  }

  zero_grads(params);
  std::uint64_t base_branches = 0;
  double base_value = 0.0;
  {
    Tape tape;
    const Var out = loss(tape);
    if (out.value().size() != 1) throw ShapeError("gradient check needs a scalar loss");
    if (!std::isfinite(out.value().data()[0])) {
      throw NumericError("gradient check: loss is not finite");
    }
    base_branches = tape.branch_signature();
    base_value = out.value().data()[0];
    tape.backward(out);
  }

  GradCheckResult result;
  double dot = 0.0, norm_a = 0.0, norm_n = 0.0;
  Rng rng(options.seed);
  for (const NamedParam& p : params) {
    Tensor& t = *p.tensor;
    const std::vector<float> analytic =
        t.has_grad() ? t.grad() : std::vector<float>(t.size(), 0.0f);

    std::vector<std::size_t> coords(t.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.samples_per_tensor) {
      rng.shuffle(coords);
      coords.resize(options.samples_per_tensor);
    }

    for (std::size_t k : coords) {
      const float saved = t.data()[k];
      const float hi = static_cast<float>(saved + options.epsilon);
      const float lo = static_cast<float>(saved - options.epsilon);
      t.data()[k] = hi;
      const Probe up = evaluate(loss);
      t.data()[k] = lo;
      const Probe down = evaluate(loss);
      t.data()[k] = saved;

      // A difference quotient across a kink is meaningless. When only one
      // probe crossed, the other side shares the base point's linear piece.
      const bool up_ok = up.branches == base_branches;
      const bool down_ok = down.branches == base_branches;
      double numeric = 0.0;
      if (up_ok && down_ok) {
        numeric = (up.value - down.value) / (static_cast<double>(hi) - lo);
      } else if (up_ok) {
        numeric = (up.value - base_value) / (static_cast<double>(hi) - saved);
        ++result.one_sided;
      } else if (down_ok) {
        numeric = (base_value - down.value) / (static_cast<double>(saved) - lo);
        ++result.one_sided;
      } else {
        ++result.coordinates_skipped;
        continue;
      }
      const double err = std::abs(analytic[k] - numeric) / std::max(1.0, std::abs(numeric));
      ++result.coordinates_checked;
      dot += analytic[k] * numeric;
      norm_a += static_cast<double>(analytic[k]) * analytic[k];
      norm_n += numeric * numeric;
      if (result.coordinates_checked == 1 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_param = p.name;
        result.worst_index = k;
        result.analytic = analytic[k];
        result.numeric = numeric;
      }
    }
  }
  if (norm_a > 0.0 || norm_n > 0.0) {
    result.cosine = norm_a > 0.0 && norm_n > 0.0 ? dot / std::sqrt(norm_a * norm_n) : 0.0;
  }
  zero_grads(params);
  return result;
}

}  // namespace sumkit
