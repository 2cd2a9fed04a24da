#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "hvac/data/sequence.hpp"
#include "hvac/model/params.hpp"

namespace hvac::model {

struct TrainConfig {
  int steps = 5000;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
  /// Cosine annealing from learning_rate down to this value at the last
  /// step; negative keeps the rate constant.
  double final_learning_rate = -1.0;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;  // -ELBO per sequence of the sampled batch
};

using TrainProgress = std::function<void(const TrainLogEntry&)>;

/// Adam on -ELBO over uniformly sampled batches (without replacement within a
/// batch). Unlabeled sequences use params.sigma_obs; if the dataset has any,
/// that value is first replaced by the median sigma_tilde of a denoiser pass.
ModelParams train(const data::Dataset& ds, const TrainConfig& cfg, ModelParams init,
                  std::vector<TrainLogEntry>* log = nullptr, const TrainProgress& progress = {});

/// Median denoiser sigma_tilde over every minute of the dataset.
double median_sigma_tilde(const data::Dataset& ds, const ModelParams& p);

void write_train_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path);

}  // namespace hvac::model
