#include "hvac/model/model.hpp"

#include <cmath>

#include "hvac/error.hpp"
#include "hvac/nn/kernels.hpp"

namespace hvac::model {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using nn::Activation;

int encode_action(const sim::ControlState& c) {
  const bool thermal = c.a_h || c.a_ac;
  return 2 * static_cast<int>(thermal) + static_cast<int>(c.a_vent);
}

std::vector<int> encode_actions(std::span<const sim::ControlState> controls) {
  std::vector<int> out;
  out.reserve(controls.size());
  for (const auto& c : controls) out.push_back(encode_action(c));
  return out;
}

MatrixXd WindowBatch::denoiser_input(const Normalization& norm) const {
  const Index n = length * batch;
  MatrixXd x(3, n);
  for (Index i = 0; i < n; ++i) {
    x(0, i) = codes[static_cast<std::size_t>(i)] / 3.0;
    x(1, i) = norm.normalize(t_obs[i]);
    x(2, i) = norm.normalize(t_out[i]);
  }
  return x;
}

WindowBatch make_batch(std::span<const data::Sequence* const> windows) {
  require(!windows.empty(), "batch must contain at least one sequence");
  WindowBatch b;
  b.length = static_cast<Index>(windows.front()->size());
  b.batch = static_cast<Index>(windows.size());
  require(b.length > 0, "sequences must be non-empty");
  b.t_obs.resize(b.length * b.batch);
  b.t_out.resize(b.length * b.batch);
  b.codes.resize(static_cast<std::size_t>(b.length * b.batch));
  for (Index j = 0; j < b.batch; ++j) {
    const data::Sequence& s = *windows[static_cast<std::size_t>(j)];
    s.validate();
    require(static_cast<Index>(s.size()) == b.length, "sequences in a batch must share their length");
    for (Index t = 0; t < b.length; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const Index col = t * b.batch + j;
      require(std::isfinite(s.t_obs[ti]) && std::isfinite(s.t_out[ti]), "non-finite input temperature");
      b.t_obs[col] = s.t_obs[ti];
      b.t_out[col] = s.t_out[ti];
      b.codes[static_cast<std::size_t>(col)] = encode_action(s.control[ti]);
    }
  }
  return b;
}

WindowBatch make_batch(const data::Sequence& window) {
  const data::Sequence* ptr = &window;
  return make_batch(std::span<const data::Sequence* const>(&ptr, 1));
}

MatrixXd denoiser_head(const ModelParams& p, const MatrixXd& input, Index batch) {
  const auto& w = p.weights;
  const Index k = p.arch.kernel;
  MatrixXd h = input;
  for (int i = 0; i < 4; ++i) {
    const Activation act = i < 3 ? Activation::Tanh : Activation::Identity;
    h = nn::conv1d_forward(h, w.matrix(seg::conv_w[i]), w.matrix(seg::conv_b[i]), k, batch, act);
  }
  return h;
}

void denoise_batch(const ModelParams& p, const WindowBatch& b, RowVectorXd& mu, RowVectorXd& sigma) {
  require(b.length >= p.arch.kernel, "window shorter than the denoiser kernel");
  const MatrixXd head = denoiser_head(p, b.denoiser_input(p.norm), b.batch);
  mu = b.t_obs + p.norm.scale * head.row(0);
  sigma = head.row(1).unaryExpr([](double a) { return kSigmaUnit * nn::softplus(a); });
  // softplus can underflow to zero for very negative pre-activations
  sigma = sigma.cwiseMax(1e-12);
}

DenoiserOutput denoise(std::span<const double> t_obs, std::span<const double> t_out,
                       std::span<const sim::ControlState> controls, const ModelParams& p) {
  require(t_obs.size() == t_out.size() && t_obs.size() == controls.size(),
          "denoise inputs must share their length");
  data::Sequence s;
  s.t_obs.assign(t_obs.begin(), t_obs.end());
  s.t_out.assign(t_out.begin(), t_out.end());
  s.control.assign(controls.begin(), controls.end());
  RowVectorXd mu, sigma;
  denoise_batch(p, make_batch(s), mu, sigma);
  return {{mu.data(), mu.data() + mu.size()}, {sigma.data(), sigma.data() + sigma.size()}};
}

Eigen::VectorXd predictor_input(const ModelParams& p, int code, double t_prev, double t_out_prev) {
  require(code >= 0 && code < kActionCodes, "action code out of range");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kActionCodes + 2);
  x(code) = 1.0;
  x(kActionCodes) = p.norm.normalize(t_prev);
  x(kActionCodes + 1) = p.norm.normalize(t_out_prev);
  return x;
}

StepResult predict_step_batch(const ModelParams& p, const MatrixXd& x, const MatrixXd& h, const RowVectorXd& t_prev) {
  require(x.rows() == kActionCodes + 2 && h.rows() == p.arch.hidden && x.cols() == h.cols() &&
              t_prev.size() == h.cols(),
          "predictor input shape mismatch");
  const auto& w = p.weights;
  StepResult r;
  r.h_next = nn::gru_forward(x, h, w.matrix(seg::gru_wx), w.matrix(seg::gru_wh), w.matrix(seg::gru_b));
  const MatrixXd a = nn::dense_forward(w.matrix(seg::head1_w), r.h_next, w.matrix(seg::head1_b), Activation::Tanh);
  const MatrixXd delta = nn::dense_forward(w.matrix(seg::head2_w), a, w.matrix(seg::head2_b), Activation::Identity);
  r.t_next = t_prev + delta.row(0);
  return r;
}

PredictStep predict_step(double t_prev, int code, double t_out_prev, const Eigen::VectorXd& h, const ModelParams& p) {
  require(h.size() == p.arch.hidden, "hidden state dimension mismatch");
  RowVectorXd tp(1);
  tp(0) = t_prev;
  StepResult r = predict_step_batch(p, predictor_input(p, code, t_prev, t_out_prev), h, tp);
  return {r.t_next(0), r.h_next.col(0)};
}

namespace {

MatrixXd state_input(const ModelParams& p, const RolloutState& s) {
  const Index B = s.batch();
  MatrixXd x = MatrixXd::Zero(kActionCodes + 2, B);
  for (Index j = 0; j < B; ++j) {
    x(s.code_current[static_cast<std::size_t>(j)], j) = 1.0;
    x(kActionCodes, j) = p.norm.normalize(s.t_current(j));
    x(kActionCodes + 1, j) = p.norm.normalize(s.t_out_current(j));
  }
  return x;
}

void step_state(const ModelParams& p, RolloutState& s) {
  StepResult r = predict_step_batch(p, state_input(p, s), s.hidden, s.t_current);
  s.hidden = std::move(r.h_next);
  s.t_current = std::move(r.t_next);
}

}  // namespace

RolloutState warm_start(const ModelParams& p, const WindowBatch& history, RowVectorXd* mu_out, RowVectorXd* sigma_out) {
  RowVectorXd mu, sigma;
  denoise_batch(p, history, mu, sigma);
  const Index B = history.batch;
  const Index L = history.length;
  RolloutState s;
  s.hidden = MatrixXd::Zero(p.arch.hidden, B);
  s.code_current.resize(static_cast<std::size_t>(B));
  s.t_out_current.resize(B);
  for (Index t = 0; t < L; ++t) {
    s.t_current = mu.segment(t * B, B);
    for (Index j = 0; j < B; ++j) s.code_current[static_cast<std::size_t>(j)] = history.codes[static_cast<std::size_t>(t * B + j)];
    s.t_out_current = history.t_out.segment(t * B, B);
    if (t + 1 < L) {
      // the hidden state absorbs minute t; its prediction is discarded in favour of mu at t+1
      StepResult r = predict_step_batch(p, state_input(p, s), s.hidden, s.t_current);
      s.hidden = std::move(r.h_next);
    }
  }
  s.trust_halfwidth = 2.0 * sigma.segment((L - 1) * B, B);
  if (mu_out) *mu_out = std::move(mu);
  if (sigma_out) *sigma_out = std::move(sigma);
  return s;
}

MatrixXd advance(const ModelParams& p, RolloutState& s, const Eigen::MatrixXi& future_codes, const MatrixXd& future_t_out) {
  const Index B = s.batch();
  const Index H = future_codes.cols();
  require(future_codes.rows() == B && future_t_out.rows() == B && future_t_out.cols() == H,
          "future controls and forecast must match the batch and horizon");
  MatrixXd out(B, H);
  for (Index k = 0; k < H; ++k) {
    step_state(p, s);
    out.col(k) = s.t_current.transpose();
    for (Index j = 0; j < B; ++j) {
      const int c = future_codes(j, k);
      require(c >= 0 && c < kActionCodes, "action code out of range");
      s.code_current[static_cast<std::size_t>(j)] = c;
    }
    s.t_out_current = future_t_out.col(k).transpose();
  }
  return out;
}

namespace {

void check_future(std::span<const sim::ControlState> fc, std::span<const double> ft, std::size_t horizon) {
  require(fc.size() == horizon && ft.size() == horizon,
          "future controls and forecast lengths must equal the horizon");
  for (double v : ft) require(std::isfinite(v), "non-finite outdoor forecast");
}

std::vector<double> advance_one(const ModelParams& p, RolloutState& state, std::span<const sim::ControlState> fc,
                                std::span<const double> ft) {
  const auto H = static_cast<Index>(fc.size());
  Eigen::MatrixXi codes(1, H);
  MatrixXd tout(1, H);
  for (Index k = 0; k < H; ++k) {
    codes(0, k) = encode_action(fc[static_cast<std::size_t>(k)]);
    tout(0, k) = ft[static_cast<std::size_t>(k)];
  }
  const MatrixXd pred = advance(p, state, codes, tout);
  return {pred.data(), pred.data() + pred.size()};
}

}  // namespace

PredictionResult rollout(const data::Sequence& history, std::span<const sim::ControlState> fc,
                         std::span<const double> ft, std::size_t horizon, const ModelParams& p,
                         RolloutState* final_state) {
  require(history.size() > 0, "rollout history must be non-empty");
  check_future(fc, ft, horizon);
  RowVectorXd mu, sigma;
  RolloutState state = warm_start(p, make_batch(history), &mu, &sigma);
  PredictionResult r;
  r.denoised.mu_tilde.assign(mu.data(), mu.data() + mu.size());
  r.denoised.sigma_tilde.assign(sigma.data(), sigma.data() + sigma.size());
  r.t_pred = advance_one(p, state, fc, ft);
  r.trust_halfwidth.assign(horizon, state.trust_halfwidth(0));
  if (final_state) *final_state = std::move(state);
  return r;
}

std::vector<double> rollout_continue(RolloutState& state, std::span<const sim::ControlState> fc,
                                     std::span<const double> ft, const ModelParams& p) {
  require(state.batch() == 1, "rollout_continue expects a single-sequence state");
  check_future(fc, ft, fc.size());
  return advance_one(p, state, fc, ft);
}

}  // namespace hvac::model
