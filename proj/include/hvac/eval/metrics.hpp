#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace hvac::eval {

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  /// 1 - SS_res / SS_tot; meaningless (and r2_defined false) for constant truth.
  double r2 = 0.0;
  bool r2_defined = false;
  int horizon = 0;
  std::size_t n_sequences = 0;
  std::size_t n_points = 0;
};

MetricsReport metrics(std::span<const double> pred, std::span<const double> truth);

/// Pooled metrics: a single SS_res / SS_tot over every point of every sequence.
MetricsReport pooled_metrics(const std::vector<std::vector<double>>& preds,
                             const std::vector<std::vector<double>>& truths);

struct FidelityReport {
  double band = 0.0;
  int n_forgive = 0;
  int horizon = 0;
  double share = 0.0;
};

/// True iff every maximal run of minutes with |pred - truth| > band is at most
/// n_forgive long.
bool holds_band(std::span<const double> pred, std::span<const double> truth, double band, int n_forgive);

FidelityReport fidelity_share(const std::vector<std::vector<double>>& preds,
                              const std::vector<std::vector<double>>& truths, double band, int n_forgive);

void write_metrics_csv(const std::vector<MetricsReport>& rows, const std::filesystem::path& path);
void write_fidelity_csv(const std::vector<FidelityReport>& rows, const std::filesystem::path& path);

}  // namespace hvac::eval
