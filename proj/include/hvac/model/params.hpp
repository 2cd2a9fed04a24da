#pragma once

#include <cstdint>

#include "hvac/nn/param_vector.hpp"

namespace hvac::model {

struct Architecture {
  int channels = 16;     // hidden conv channels
  int kernel = 5;        // conv kernel width (odd)
  int hidden = 3;        // GRU state size
  int head_hidden = 8;   // width of the predictor's dense head
  bool operator==(const Architecture&) const = default;
};

/// Affine temperature map T -> (T - offset) / scale.
struct Normalization {
  double offset = 288.15;
  double scale = 30.0;

  [[nodiscard]] double normalize(double t) const { return (t - offset) / scale; }
  [[nodiscard]] double denormalize(double z) const { return z * scale + offset; }
  bool operator==(const Normalization&) const = default;
};

/// Denoiser std is kSigmaUnit * softplus(channel), in kelvin.
inline constexpr double kSigmaUnit = 0.1;
/// Number of action codes (one-hot depth for the predictor).
inline constexpr int kActionCodes = 4;

struct ModelParams {
  Architecture arch;
  Normalization norm;
  nn::ParamVector weights;
  double sigma_obs = 0.1;   // fallback observation-noise std when a sequence has no label
  double s_process = 0.05;  // process-noise std of the predictor likelihood
  std::uint64_t seed = 0;
};

nn::ParamLayout make_layout(const Architecture& arch);

/// Uniform(+-1/sqrt(fan_in)) initialisation with a zero residual head, so an
/// untrained denoiser returns its input, and a sigma head bias giving
/// sigma_tilde = kSigmaUnit.
ModelParams make_model(const Architecture& arch = {}, std::uint64_t seed = 0);

// Segment names.
namespace seg {
inline constexpr const char* conv_w[4] = {"den.conv1.W", "den.conv2.W", "den.conv3.W", "den.conv4.W"};
inline constexpr const char* conv_b[4] = {"den.conv1.b", "den.conv2.b", "den.conv3.b", "den.conv4.b"};
inline constexpr const char* gru_wx = "pred.gru.Wx";
inline constexpr const char* gru_wh = "pred.gru.Wh";
inline constexpr const char* gru_b = "pred.gru.b";
inline constexpr const char* head1_w = "pred.head1.W";
inline constexpr const char* head1_b = "pred.head1.b";
inline constexpr const char* head2_w = "pred.head2.W";
inline constexpr const char* head2_b = "pred.head2.b";
}  // namespace seg

}  // namespace hvac::model
