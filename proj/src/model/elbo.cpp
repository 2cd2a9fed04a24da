#include "hvac/model/elbo.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "hvac/error.hpp"

namespace hvac::model {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using nn::Activation;
using nn::Var;

Var neg_elbo_head(nn::Tape& tape, Var mu, Var sigma, Var pred, const RowVectorXd& t_obs, const RowVectorXd& sigma_obs,
                  double s, Index T, Index B) {
  require(T >= 2, "ELBO needs sequences of at least 2 minutes");
  require(s > 0.0 && std::isfinite(s), "process-noise std must be positive");
  require(sigma_obs.size() == B, "one observation-noise std per sequence");
  for (Index b = 0; b < B; ++b) require(sigma_obs(b) > 0.0 && std::isfinite(sigma_obs(b)), "observation-noise std must be positive");
  const Index n = (T - 1) * B;
  const Var mu_t = tape.slice_cols(mu, B, n);
  const Var sig_t = tape.slice_cols(sigma, B, n);
  const Var obs_t = tape.constant(t_obs.segment(B, n));

  MatrixXd w_obs(1, n);
  for (Index c = 0; c < n; ++c) w_obs(0, c) = 1.0 / (2.0 * sigma_obs(c % B) * sigma_obs(c % B));

  const Var sig2 = tape.square(sig_t);
  const Var fit = tape.add(tape.square(tape.sub(obs_t, mu_t)), sig2);
  const Var obs_term = tape.sum(tape.mul(fit, tape.constant(std::move(w_obs))));
  const Var dyn = tape.sum(tape.add(sig2, tape.square(tape.sub(mu_t, pred))));
  const Var ent = tape.sum(tape.log(sig_t));

  double constant = 0.0;
  const double t = static_cast<double>(T);
  for (Index b = 0; b < B; ++b)
    constant += 0.5 * t * std::log(2.0 * std::numbers::pi) + t * std::log(sigma_obs(b)) + t * std::log(s) - 0.5 * t;

  const Var body = tape.sub(tape.add(obs_term, tape.affine(dyn, 1.0 / (2.0 * s * s), 0.0)), ent);
  return tape.affine(body, 1.0, constant);
}

ElboGraph build_elbo(nn::Tape& tape, const ModelParams& p, const WindowBatch& b, const RowVectorXd& sigma_obs,
                     const RowVectorXd& eps) {
  const Index T = b.length;
  const Index B = b.batch;
  require(T >= 2, "ELBO needs sequences of at least 2 minutes");
  require(T >= p.arch.kernel, "sequence shorter than the denoiser kernel");
  require(eps.size() == T * B, "noise field must cover every minute");

  Var h = tape.constant(b.denoiser_input(p.norm));
  for (int i = 0; i < 4; ++i) {
    const Activation act = i < 3 ? Activation::Tanh : Activation::Identity;
    h = tape.conv1d(h, tape.param(seg::conv_w[i]), tape.param(seg::conv_b[i]), p.arch.kernel, B, act);
  }
  ElboGraph g;
  g.mu = tape.add(tape.constant(b.t_obs), tape.affine(tape.slice_rows(h, 0, 1), p.norm.scale, 0.0));
  g.sigma = tape.affine(tape.activate(tape.slice_rows(h, 1, 1), Activation::Softplus), kSigmaUnit, 0.0);

  const Var sample = tape.add(g.mu, tape.mul(g.sigma, tape.constant(eps)));

  const Var wx = tape.param(seg::gru_wx);
  const Var wh = tape.param(seg::gru_wh);
  const Var gb = tape.param(seg::gru_b);
  const Var w1 = tape.param(seg::head1_w);
  const Var b1 = tape.param(seg::head1_b);
  const Var w2 = tape.param(seg::head2_w);
  const Var b2 = tape.param(seg::head2_b);

  Var state = tape.constant(MatrixXd::Zero(p.arch.hidden, B));
  std::vector<Var> preds;
  preds.reserve(static_cast<std::size_t>(T - 1));
  for (Index tau = 0; tau + 1 < T; ++tau) {
    MatrixXd onehot = MatrixXd::Zero(kActionCodes, B);
    MatrixXd tout(1, B);
    for (Index j = 0; j < B; ++j) {
      onehot(b.codes[static_cast<std::size_t>(tau * B + j)], j) = 1.0;
      tout(0, j) = p.norm.normalize(b.t_out(tau * B + j));
    }
    const Var t_prev = tape.slice_cols(sample, tau * B, B);
    const Var parts[3] = {tape.constant(std::move(onehot)),
                          tape.affine(t_prev, 1.0 / p.norm.scale, -p.norm.offset / p.norm.scale),
                          tape.constant(std::move(tout))};
    state = tape.gru_cell(tape.concat_rows(parts), state, wx, wh, gb);
    const Var a = tape.dense(state, w1, b1, Activation::Tanh);
    preds.push_back(tape.add(t_prev, tape.dense(a, w2, b2, Activation::Identity)));
  }
  g.pred = tape.concat_cols(preds);
  g.loss = neg_elbo_head(tape, g.mu, g.sigma, g.pred, b.t_obs, sigma_obs, p.s_process, T, B);
  return g;
}

RowVectorXd batch_sigma_obs(std::span<const data::Sequence* const> seqs, double fallback) {
  RowVectorXd s(static_cast<Index>(seqs.size()));
  for (std::size_t i = 0; i < seqs.size(); ++i)
    s(static_cast<Index>(i)) = seqs[i]->has_noise_label() ? seqs[i]->noise_std : fallback;
  return s;
}

RowVectorXd draw_eps(CounterRng& rng, Index T, Index B) {
  RowVectorXd eps(T * B);
  for (Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
  return eps;
}

LossAndGrad elbo_loss_and_grad(const ModelParams& p, const WindowBatch& batch, const RowVectorXd& sigma_obs,
                               const RowVectorXd& eps) {
  nn::Tape tape(p.weights);
  const ElboGraph g = build_elbo(tape, p, batch, sigma_obs, eps);
  LossAndGrad r;
  r.loss = tape.scalar(g.loss);
  r.grad = tape.backward(g.loss);
  return r;
}

double elbo_loss(std::span<const data::Sequence> batch, const ModelParams& p, CounterRng& noise) {
  std::vector<const data::Sequence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  const WindowBatch b = make_batch(ptrs);
  const RowVectorXd eps = draw_eps(noise, b.length, b.batch);
  nn::Tape tape(p.weights);
  const ElboGraph g = build_elbo(tape, p, b, batch_sigma_obs(ptrs, p.sigma_obs), eps);
  return tape.scalar(g.loss);
}

}  // namespace hvac::model
