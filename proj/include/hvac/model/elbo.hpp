#pragma once

#include <Eigen/Core>
#include <span>

#include "hvac/data/sequence.hpp"
#include "hvac/model/model.hpp"
#include "hvac/model/params.hpp"
#include "hvac/nn/tape.hpp"
#include "hvac/rng.hpp"

namespace hvac::model {

/// Negative ELBO summed over a batch, from time-major 1 x (T*B) rows of mu,
/// sigma and t_obs, and the 1 x ((T-1)*B) predictor outputs, where pred at
/// column tau*B + b is the one-step prediction of minute tau + 1.
/// sigma_obs holds one observation-noise std per batch element.
nn::Var neg_elbo_head(nn::Tape& tape, nn::Var mu, nn::Var sigma, nn::Var pred, const Eigen::RowVectorXd& t_obs,
                      const Eigen::RowVectorXd& sigma_obs, double s_process, Eigen::Index length,
                      Eigen::Index batch);

struct ElboGraph {
  nn::Var loss;
  nn::Var mu;
  nn::Var sigma;
  nn::Var pred;
};

/// Records the full denoiser -> sampled trajectory -> predictor -> loss graph.
/// eps is the standard-normal field (1 x T*B) of the reparametrized samples.
ElboGraph build_elbo(nn::Tape& tape, const ModelParams& p, const WindowBatch& batch,
                     const Eigen::RowVectorXd& sigma_obs, const Eigen::RowVectorXd& eps);

/// Per-element sigma: the sequence label, or `fallback` when unlabeled.
Eigen::RowVectorXd batch_sigma_obs(std::span<const data::Sequence* const> seqs, double fallback);

/// Standard-normal draws for a T x B batch, time-major.
Eigen::RowVectorXd draw_eps(CounterRng& rng, Eigen::Index length, Eigen::Index batch);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

LossAndGrad elbo_loss_and_grad(const ModelParams& p, const WindowBatch& batch, const Eigen::RowVectorXd& sigma_obs,
                               const Eigen::RowVectorXd& eps);

/// -ELBO summed over the batch with one reparametrized sample per minute.
double elbo_loss(std::span<const data::Sequence> batch, const ModelParams& p, CounterRng& noise);

}  // namespace hvac::model
