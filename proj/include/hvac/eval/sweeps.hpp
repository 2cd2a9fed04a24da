#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hvac/data/sequence.hpp"
#include "hvac/eval/metrics.hpp"
#include "hvac/model/params.hpp"

namespace hvac::eval {

/// Default history prefix: 150 minutes for horizons up to 150, else 300.
int default_history(int horizon);

struct Forecasts {
  int history = 0;
  int horizon = 0;
  std::vector<std::vector<double>> pred;
  std::vector<std::vector<double>> truth;
};

/// Rolls every sequence forward from its first `history` minutes using the
/// recorded controls and outdoor temperature; truth is t_true over the horizon.
Forecasts forecast_dataset(const model::ModelParams& p, const data::Dataset& ds, int history, int horizon,
                           int jobs = 1);

/// One pooled report per horizon; history < 0 selects default_history.
std::vector<MetricsReport> horizon_sweep(const model::ModelParams& p, const data::Dataset& ds,
                                         const std::vector<int>& horizons, int jobs = 1, int history = -1);

/// Every (band, n) combination for each horizon.
std::vector<FidelityReport> fidelity_table(const model::ModelParams& p, const data::Dataset& ds,
                                           const std::vector<int>& horizons, const std::vector<double>& bands,
                                           const std::vector<int>& n_forgive, int jobs = 1);

/// t_obs = t_true + level * N(0, 1), labelled with the new level; level 0
/// copies t_true. Draws come from CounterRng(seed) split by sequence index.
data::Dataset renoise(const data::Dataset& ds, double level, std::uint64_t seed);

struct NoiseRow {
  double level = 0.0;
  MetricsReport denoise;   // mu_tilde vs t_true over whole sequences
  MetricsReport forecast;  // rollout vs t_true at the sweep horizon
};

std::vector<NoiseRow> noise_sweep(const model::ModelParams& p, const data::Dataset& ds,
                                  const std::vector<double>& levels, int horizon, std::uint64_t seed,
                                  int jobs = 1);

/// Pooled denoising metrics of mu_tilde against t_true.
MetricsReport denoise_metrics(const model::ModelParams& p, const data::Dataset& ds, int jobs = 1);
/// Same for the raw observations (baseline).
MetricsReport observation_metrics(const data::Dataset& ds);

void write_noise_csv(const std::vector<NoiseRow>& rows, const std::filesystem::path& path);

}  // namespace hvac::eval
