#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "hvac/nn/param_vector.hpp"
#include "hvac/rng.hpp"

namespace hvac::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Eigen::VectorXd m;  // first moment
  Eigen::VectorXd v;  // second moment
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(Index size, AdamConfig cfg)
      : config(cfg), m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}
};

/// Bias-corrected Adam update in place. Throws RuntimeError on non-finite
/// gradient entries (parameters are left untouched).
void adam_step(ParamVector& params, const Eigen::VectorXd& grad, AdamState& state);

/// Uniform(-a, a) per segment with a = 1/sqrt(fan_in); fan_in is the segment's
/// column count for matrices and the row count of the matching weight for
/// biases (segments named "*.b" use the preceding segment's columns).
void init_uniform(ParamVector& params, CounterRng& rng);

}  // namespace hvac::nn
