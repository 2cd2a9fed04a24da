#include "hvac/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "hvac/error.hpp"
#include "hvac/model/elbo.hpp"
#include "hvac/nn/adam.hpp"
#include "hvac/rng.hpp"

namespace hvac::model {

double median_sigma_tilde(const data::Dataset& ds, const ModelParams& p) {
  require(!ds.empty(), "dataset is empty");
  std::vector<double> all;
  constexpr std::size_t chunk = 256;
  for (std::size_t i = 0; i < ds.size(); i += chunk) {
    std::vector<const data::Sequence*> ptrs;
    for (std::size_t j = i; j < std::min(ds.size(), i + chunk); ++j) ptrs.push_back(&ds.sequences[j]);
    Eigen::RowVectorXd mu, sigma;
    denoise_batch(p, make_batch(ptrs), mu, sigma);
    all.insert(all.end(), sigma.data(), sigma.data() + sigma.size());
  }
  const auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
  std::nth_element(all.begin(), mid, all.end());
  return *mid;
}

ModelParams train(const data::Dataset& ds, const TrainConfig& cfg, ModelParams p, std::vector<TrainLogEntry>* log,
                  const TrainProgress& progress) {
  require(!ds.empty(), "training dataset is empty");
  require(cfg.steps >= 0, "steps must be >= 0");
  require(cfg.batch_size >= 1, "batch size must be >= 1");
  require(cfg.learning_rate >= 0.0, "learning rate must be >= 0");
  require(!std::isnan(cfg.final_learning_rate), "final learning rate must be a number");
  (void)ds.sequence_length();

#ifdef __GLIBC__
  // Each step allocates and frees the same large activations; keep them off
  // mmap so pages are reused instead of faulted in again.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  const bool unlabeled = std::any_of(ds.sequences.begin(), ds.sequences.end(),
                                     [](const data::Sequence& s) { return !s.has_noise_label(); });
  if (unlabeled) p.sigma_obs = median_sigma_tilde(ds, p);

  nn::AdamState opt(p.weights.values.size(), {cfg.learning_rate});
  const CounterRng root(cfg.seed);
  const std::uint64_t n = ds.size();
  const std::uint64_t bsz = std::min<std::uint64_t>(n, static_cast<std::uint64_t>(cfg.batch_size));

  for (int step = 0; step < cfg.steps; ++step) {
    CounterRng pick = root.split(static_cast<std::uint64_t>(step) * 2);
    CounterRng noise = root.split(static_cast<std::uint64_t>(step) * 2 + 1);
    std::vector<const data::Sequence*> ptrs;
    ptrs.reserve(bsz);
    for (std::uint64_t i : sample_without_replacement(n, bsz, pick)) ptrs.push_back(&ds.sequences[i]);
    const WindowBatch batch = make_batch(ptrs);
    const Eigen::RowVectorXd eps = draw_eps(noise, batch.length, batch.batch);
    LossAndGrad lg;
    try {
      lg = elbo_loss_and_grad(p, batch, batch_sigma_obs(ptrs, p.sigma_obs), eps);
    } catch (const ValidationError& e) {
      // sigma underflow and similar numeric breakdowns surface as tape errors
      throw RuntimeError("training diverged at step " + std::to_string(step) + ": " + e.what());
    }
    if (!std::isfinite(lg.loss))
      throw RuntimeError("training diverged: non-finite loss at step " + std::to_string(step));
    if (cfg.clip_norm > 0.0) {
      const double norm = lg.grad.norm();
      if (norm > cfg.clip_norm) lg.grad *= cfg.clip_norm / norm;
    }
    if (cfg.final_learning_rate >= 0.0 && cfg.steps > 1) {
      const double frac = static_cast<double>(step) / static_cast<double>(cfg.steps - 1);
      opt.config.learning_rate = cfg.final_learning_rate + 0.5 * (cfg.learning_rate - cfg.final_learning_rate) *
                                                               (1.0 + std::cos(std::numbers::pi * frac));
    }
    nn::adam_step(p.weights, lg.grad, opt);
    const TrainLogEntry entry{step, lg.loss / static_cast<double>(batch.batch)};
    if (log) log->push_back(entry);
    if (progress) progress(entry);
  }
  return p;
}

void write_train_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write training log " + path.string());
  out << "step,loss\n";
  char buf[64];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.10g\n", e.step, e.loss);
    out << buf;
  }
}

}  // namespace hvac::model
