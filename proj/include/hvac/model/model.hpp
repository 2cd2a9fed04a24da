#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "hvac/data/sequence.hpp"
#include "hvac/model/params.hpp"
#include "hvac/sim/types.hpp"

namespace hvac::model {

/// 2 * thermal_on + a_vent, thermal_on = a_h || a_ac.
int encode_action(const sim::ControlState& c);
std::vector<int> encode_actions(std::span<const sim::ControlState> controls);

struct DenoiserOutput {
  std::vector<double> mu_tilde;
  std::vector<double> sigma_tilde;
};

/// Per-minute inputs of a batch of equal-length windows, laid out time-major
/// (column t*B + b). Temperatures in kelvin.
struct WindowBatch {
  Eigen::Index length = 0;
  Eigen::Index batch = 0;
  Eigen::RowVectorXd t_obs;
  Eigen::RowVectorXd t_out;
  std::vector<int> codes;

  /// Stacks [code / 3, normalized t_obs, normalized t_out] as 3 x (T*B).
  [[nodiscard]] Eigen::MatrixXd denoiser_input(const Normalization& norm) const;
};

WindowBatch make_batch(std::span<const data::Sequence* const> windows);
WindowBatch make_batch(const data::Sequence& window);

/// Raw denoiser head (2 x T*B, pre-transform) through the four conv layers.
Eigen::MatrixXd denoiser_head(const ModelParams& p, const Eigen::MatrixXd& input, Eigen::Index batch);

/// mu and sigma (each 1 x T*B, kelvin) for a batch.
void denoise_batch(const ModelParams& p, const WindowBatch& b, Eigen::RowVectorXd& mu,
                   Eigen::RowVectorXd& sigma);

DenoiserOutput denoise(std::span<const double> t_obs, std::span<const double> t_out,
                       std::span<const sim::ControlState> controls, const ModelParams& p);

/// Predictor input column: [one-hot(code); normalized t_prev; normalized t_out_prev].
Eigen::VectorXd predictor_input(const ModelParams& p, int code, double t_prev, double t_out_prev);

struct StepResult {
  Eigen::RowVectorXd t_next;
  Eigen::MatrixXd h_next;
};

/// One batched predictor step; x is (kActionCodes + 2) x B, h is hidden x B.
StepResult predict_step_batch(const ModelParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& h,
                              const Eigen::RowVectorXd& t_prev);

struct PredictStep {
  double t_next = 0.0;
  Eigen::VectorXd h_next;
};

PredictStep predict_step(double t_prev, int code, double t_out_prev, const Eigen::VectorXd& h,
                         const ModelParams& p);

/// Predictor state between rollout calls: the hidden state together with the
/// last temperature, action and outdoor reading not yet consumed.
struct RolloutState {
  Eigen::MatrixXd hidden;          // hidden x B
  Eigen::RowVectorXd t_current;    // kelvin
  std::vector<int> code_current;
  Eigen::RowVectorXd t_out_current;
  Eigen::RowVectorXd trust_halfwidth;

  [[nodiscard]] Eigen::Index batch() const { return t_current.size(); }
};

/// Denoises the windows and feeds mu_tilde through the predictor, leaving the
/// final history minute pending. mu/sigma are returned time-major.
RolloutState warm_start(const ModelParams& p, const WindowBatch& history, Eigen::RowVectorXd* mu = nullptr,
                        Eigen::RowVectorXd* sigma = nullptr);

/// Rolls every batch element forward `horizon` minutes. future_codes and
/// future_t_out are B x horizon. Returns B x horizon predictions.
Eigen::MatrixXd advance(const ModelParams& p, RolloutState& state, const Eigen::MatrixXi& future_codes,
                        const Eigen::MatrixXd& future_t_out);

struct PredictionResult {
  DenoiserOutput denoised;
  std::vector<double> t_pred;
  std::vector<double> trust_halfwidth;
};

PredictionResult rollout(const data::Sequence& history, std::span<const sim::ControlState> future_controls,
                         std::span<const double> future_t_out, std::size_t horizon, const ModelParams& p,
                         RolloutState* final_state = nullptr);

/// Continues a rollout from a state produced by rollout() or a previous call.
std::vector<double> rollout_continue(RolloutState& state, std::span<const sim::ControlState> future_controls,
                                     std::span<const double> future_t_out, const ModelParams& p);

}  // namespace hvac::model
