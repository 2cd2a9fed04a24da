#include "hvac/nn/adam.hpp"

#include <cmath>

#include "hvac/error.hpp"

namespace hvac::nn {

void adam_step(ParamVector& params, const Eigen::VectorXd& grad, AdamState& state) {
  require(grad.size() == params.values.size(), "adam: gradient length mismatch");
  require(state.m.size() == grad.size() && state.v.size() == grad.size(),
          "adam: moment arrays do not match parameter length");
  if (!grad.allFinite()) throw RuntimeError("adam: non-finite gradient entries");

  const AdamConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  params.values.array() -=
      c.learning_rate * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + c.epsilon);
}

void init_uniform(ParamVector& params, CounterRng& rng) {
  Index fan_in = 1;
  for (const Segment& s : params.layout.segments()) {
    const bool is_bias = s.name.size() >= 2 && s.name.ends_with(".b");
    if (!is_bias) fan_in = s.cols;
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = 0; i < s.size(); ++i) {
      params.values[s.offset + i] = a * (2.0 * rng.uniform() - 1.0);
    }
  }
}

}  // namespace hvac::nn
