#include "hvac/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hvac/error.hpp"

namespace hvac::eval {

namespace {

struct Accum {
  double sse = 0.0, sae = 0.0, sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  void add(double p, double t) {
    const double r = p - t;
    sse += r * r;
    sae += std::abs(r);
    sum += t;
    sum2 += t * t;
    ++n;
  }
};

MetricsReport finish(const Accum& a, std::size_t n_seq, const std::vector<std::vector<double>>* truths) {
  MetricsReport m;
  m.n_points = a.n;
  m.n_sequences = n_seq;
  const double n = static_cast<double>(a.n);
  m.rmse = std::sqrt(a.sse / n);
  m.mae = a.sae / n;
  // second pass about the mean avoids cancellation in SS_tot
  double sst = 0.0;
  const double mean = a.sum / n;
  if (truths) {
    for (const auto& t : *truths)
      for (double v : t) sst += (v - mean) * (v - mean);
  }
  m.r2_defined = sst > 0.0;
  m.r2 = m.r2_defined ? 1.0 - a.sse / sst : std::nan("");
  return m;
}

}  // namespace

MetricsReport metrics(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), "metrics: prediction and truth lengths differ");
  require(!pred.empty(), "metrics: empty input");
  const std::vector<std::vector<double>> p{{pred.begin(), pred.end()}};
  const std::vector<std::vector<double>> t{{truth.begin(), truth.end()}};
  return pooled_metrics(p, t);
}

MetricsReport pooled_metrics(const std::vector<std::vector<double>>& preds,
                             const std::vector<std::vector<double>>& truths) {
  require(preds.size() == truths.size(), "metrics: sequence counts differ");
  Accum a;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(preds[i].size() == truths[i].size(), "metrics: prediction and truth lengths differ");
    for (std::size_t k = 0; k < preds[i].size(); ++k) {
      require(std::isfinite(preds[i][k]) && std::isfinite(truths[i][k]), "metrics: non-finite value");
      a.add(preds[i][k], truths[i][k]);
    }
  }
  require(a.n > 0, "metrics: empty input");
  MetricsReport m = finish(a, preds.size(), &truths);
  m.horizon = preds.empty() ? 0 : static_cast<int>(preds.front().size());
  return m;
}

bool holds_band(std::span<const double> pred, std::span<const double> truth, double band, int n_forgive) {
  require(pred.size() == truth.size(), "fidelity: prediction and truth lengths differ");
  int run = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    run = std::abs(pred[k] - truth[k]) > band ? run + 1 : 0;
    if (run > n_forgive) return false;
  }
  return true;
}

FidelityReport fidelity_share(const std::vector<std::vector<double>>& preds,
                              const std::vector<std::vector<double>>& truths, double band, int n_forgive) {
  require(!preds.empty(), "fidelity: empty input");
  require(preds.size() == truths.size(), "fidelity: sequence counts differ");
  require(band >= 0.0, "fidelity: band must be non-negative");
  require(n_forgive >= 0, "fidelity: n_forgive must be non-negative");
  std::size_t pass = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) pass += holds_band(preds[i], truths[i], band, n_forgive) ? 1 : 0;
  FidelityReport r;
  r.band = band;
  r.n_forgive = n_forgive;
  r.horizon = static_cast<int>(preds.front().size());
  r.share = static_cast<double>(pass) / static_cast<double>(preds.size());
  return r;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_metrics_csv(const std::vector<MetricsReport>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "horizon,rmse,mae,r2\n";
  char buf[128];
  for (const auto& m : rows) {
    if (m.r2_defined)
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f\n", m.horizon, m.rmse, m.mae, m.r2);
    else
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,undefined\n", m.horizon, m.rmse, m.mae);
    out << buf;
  }
}

void write_fidelity_csv(const std::vector<FidelityReport>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "band,n,horizon,share\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4g,%d,%d,%.6f\n", r.band, r.n_forgive, r.horizon, r.share);
    out << buf;
  }
}

}  // namespace hvac::eval
