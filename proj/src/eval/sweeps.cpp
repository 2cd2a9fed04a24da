#include "hvac/eval/sweeps.hpp"

#include <cstdio>
#include <fstream>

#include "hvac/error.hpp"
#include "hvac/model/model.hpp"
#include "hvac/parallel.hpp"
#include "hvac/rng.hpp"

namespace hvac::eval {

namespace {

constexpr std::size_t kChunk = 256;

void require_truth(const data::Dataset& ds) {
  require(!ds.empty(), "evaluation dataset is empty");
  require(ds.has_truth(), "evaluation needs t_true for every sequence");
}

}  // namespace

int default_history(int horizon) { return horizon <= 150 ? 150 : 300; }

Forecasts forecast_dataset(const model::ModelParams& p, const data::Dataset& ds, int history, int horizon,
                           int jobs) {
  require_truth(ds);
  require(history >= 1 && horizon >= 0, "history must be >= 1 and horizon >= 0");
  const std::size_t need = static_cast<std::size_t>(history + horizon);
  for (const auto& s : ds.sequences)
    require(s.size() >= need, "horizon " + std::to_string(horizon) + " with history " + std::to_string(history) +
                                  " does not fit a sequence of " + std::to_string(s.size()) + " minutes");
  Forecasts f;
  f.history = history;
  f.horizon = horizon;
  f.pred.resize(ds.size());
  f.truth.resize(ds.size());
  const std::size_t chunks = (ds.size() + kChunk - 1) / kChunk;
  const auto h = static_cast<std::size_t>(history);
  const auto H = static_cast<Eigen::Index>(horizon);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(ds.size(), begin + kChunk);
    std::vector<data::Sequence> hist;
    hist.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) hist.push_back(ds.sequences[i].slice(0, h));
    std::vector<const data::Sequence*> ptrs;
    for (const auto& s : hist) ptrs.push_back(&s);
    const auto B = static_cast<Eigen::Index>(ptrs.size());
    Eigen::MatrixXi codes(B, H);
    Eigen::MatrixXd tout(B, H);
    for (Eigen::Index j = 0; j < B; ++j) {
      const auto& s = ds.sequences[begin + static_cast<std::size_t>(j)];
      for (Eigen::Index k = 0; k < H; ++k) {
        codes(j, k) = model::encode_action(s.control[h + static_cast<std::size_t>(k)]);
        tout(j, k) = s.t_out[h + static_cast<std::size_t>(k)];
      }
    }
    model::RolloutState st = model::warm_start(p, model::make_batch(ptrs));
    const Eigen::MatrixXd pred = model::advance(p, st, codes, tout);
    for (Eigen::Index j = 0; j < B; ++j) {
      const std::size_t i = begin + static_cast<std::size_t>(j);
      f.pred[i].resize(static_cast<std::size_t>(H));
      for (Eigen::Index k = 0; k < H; ++k) f.pred[i][static_cast<std::size_t>(k)] = pred(j, k);
      const auto& tt = ds.sequences[i].t_true;
      f.truth[i].assign(tt.begin() + static_cast<std::ptrdiff_t>(h), tt.begin() + static_cast<std::ptrdiff_t>(h) + horizon);
    }
  });
  return f;
}

std::vector<MetricsReport> horizon_sweep(const model::ModelParams& p, const data::Dataset& ds,
                                         const std::vector<int>& horizons, int jobs, int history) {
  std::vector<MetricsReport> out;
  for (int h : horizons) {
    require(h >= 1, "horizons must be >= 1");
    const Forecasts f = forecast_dataset(p, ds, history < 0 ? default_history(h) : history, h, jobs);
    MetricsReport m = pooled_metrics(f.pred, f.truth);
    m.horizon = h;
    out.push_back(m);
  }
  return out;
}

std::vector<FidelityReport> fidelity_table(const model::ModelParams& p, const data::Dataset& ds,
                                           const std::vector<int>& horizons, const std::vector<double>& bands,
                                           const std::vector<int>& n_forgive, int jobs) {
  std::vector<FidelityReport> out;
  for (int h : horizons) {
    require(h >= 1, "horizons must be >= 1");
    const Forecasts f = forecast_dataset(p, ds, default_history(h), h, jobs);
    for (double band : bands)
      for (int n : n_forgive) out.push_back(fidelity_share(f.pred, f.truth, band, n));
  }
  return out;
}

data::Dataset renoise(const data::Dataset& ds, double level, std::uint64_t seed) {
  require_truth(ds);
  require(level >= 0.0 && std::isfinite(level), "noise level must be >= 0");
  data::Dataset out = ds;
  const CounterRng root(seed);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& s = out.sequences[i];
    CounterRng rng = root.split(i);
    for (std::size_t k = 0; k < s.size(); ++k)
      s.t_obs[k] = level == 0.0 ? s.t_true[k] : s.t_true[k] + level * rng.normal();
    s.noise_std = level;
  }
  return out;
}

MetricsReport denoise_metrics(const model::ModelParams& p, const data::Dataset& ds, int jobs) {
  require_truth(ds);
  std::vector<std::vector<double>> pred(ds.size()), truth(ds.size());
  const std::size_t chunks = (ds.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, jobs, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(ds.size(), begin + kChunk);
    std::vector<const data::Sequence*> ptrs;
    for (std::size_t i = begin; i < end; ++i) ptrs.push_back(&ds.sequences[i]);
    const model::WindowBatch b = model::make_batch(ptrs);
    Eigen::RowVectorXd mu, sigma;
    model::denoise_batch(p, b, mu, sigma);
    const auto B = b.batch;
    for (Eigen::Index j = 0; j < B; ++j) {
      const std::size_t i = begin + static_cast<std::size_t>(j);
      pred[i].resize(static_cast<std::size_t>(b.length));
      for (Eigen::Index t = 0; t < b.length; ++t) pred[i][static_cast<std::size_t>(t)] = mu(t * B + j);
      truth[i] = ds.sequences[i].t_true;
    }
  });
  return pooled_metrics(pred, truth);
}

MetricsReport observation_metrics(const data::Dataset& ds) {
  require_truth(ds);
  std::vector<std::vector<double>> pred, truth;
  for (const auto& s : ds.sequences) {
    pred.push_back(s.t_obs);
    truth.push_back(s.t_true);
  }
  return pooled_metrics(pred, truth);
}

std::vector<NoiseRow> noise_sweep(const model::ModelParams& p, const data::Dataset& ds,
                                  const std::vector<double>& levels, int horizon, std::uint64_t seed, int jobs) {
  require_truth(ds);
  std::vector<NoiseRow> out;
  for (double level : levels) {
    const data::Dataset noisy = renoise(ds, level, seed);
    NoiseRow row;
    row.level = level;
    row.denoise = denoise_metrics(p, noisy, jobs);
    row.forecast = horizon_sweep(p, noisy, {horizon}, jobs).front();
    out.push_back(row);
  }
  return out;
}

void write_noise_csv(const std::vector<NoiseRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << "noise,denoise_rmse,denoise_mae,denoise_r2,horizon,rmse,mae,r2\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4g,%.6f,%.6f,%.6f,%d,%.6f,%.6f,%.6f\n", r.level, r.denoise.rmse, r.denoise.mae,
                  r.denoise.r2, r.forecast.horizon, r.forecast.rmse, r.forecast.mae, r.forecast.r2);
    out << buf;
  }
}

}  // namespace hvac::eval
