#include "hvac/apps/fault.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hvac/error.hpp"
#include "hvac/model/model.hpp"
#include "hvac/parallel.hpp"
#include "hvac/rng.hpp"
#include "hvac/sim/simulator.hpp"

namespace hvac::apps {

using Eigen::Index;

namespace {
constexpr std::size_t kChunk = 128;
}

FaultVerdict detect_fault(const model::ModelParams& p, const data::Sequence& s, const FaultDetectConfig& cfg,
                          std::optional<int> onset) {
  require(cfg.window >= 1, "fault window must be >= 1");
  require(cfg.history >= p.arch.kernel, "fault history shorter than the denoiser kernel");
  require(!std::isnan(cfg.threshold) && cfg.threshold >= 0.0, "fault threshold must be >= 0");
  s.validate();
  const int n = static_cast<int>(s.size());
  require(n >= cfg.history + cfg.window, "stream of " + std::to_string(n) + " minutes is shorter than history + window");
  const int first = cfg.history;
  const int last = n - cfg.window;  // inclusive
  const auto W = static_cast<Index>(cfg.window);
  FaultVerdict v;
  for (int m0 = first; m0 <= last; m0 += static_cast<int>(kChunk)) {
    const int m1 = std::min(last + 1, m0 + static_cast<int>(kChunk));
    std::vector<data::Sequence> hist;
    hist.reserve(static_cast<std::size_t>(m1 - m0));
    for (int m = m0; m < m1; ++m)
      hist.push_back(s.slice(static_cast<std::size_t>(m - cfg.history), static_cast<std::size_t>(cfg.history)));
    std::vector<const data::Sequence*> ptrs;
    for (const auto& h : hist) ptrs.push_back(&h);
    const auto B = static_cast<Index>(ptrs.size());
    Eigen::MatrixXi codes(B, W);
    Eigen::MatrixXd tout(B, W);
    for (Index j = 0; j < B; ++j)
      for (Index k = 0; k < W; ++k) {
        const auto t = static_cast<std::size_t>(m0 + j + k);
        codes(j, k) = model::encode_action(s.control[t]);
        tout(j, k) = s.t_out[t];
      }
    model::RolloutState st = model::warm_start(p, model::make_batch(ptrs));
    const Eigen::MatrixXd pred = model::advance(p, st, codes, tout);
    for (Index j = 0; j < B; ++j) {
      double sse = 0.0;
      for (Index k = 0; k < W; ++k) {
        const double r = pred(j, k) - s.t_obs[static_cast<std::size_t>(m0 + j + k)];
        sse += r * r;
      }
      const double rmse = std::sqrt(sse / static_cast<double>(W));
      if (rmse > cfg.threshold) {
        v.is_faulty = true;
        v.residual_rmse = rmse;
        v.alarm_minute = m0 + static_cast<int>(j) + cfg.window - 1;
        if (onset) v.detection_minute = *v.alarm_minute - *onset;
        return v;
      }
      v.residual_rmse = std::max(v.residual_rmse, rmse);
    }
  }
  return v;
}

void FaultDatasetSpec::validate() const {
  base.validate();
  require(session_minutes >= 2, "session too short");
  require(onset_min >= 0 && onset_max >= onset_min && onset_max < session_minutes, "onset range outside the session");
  require(!noise_levels.empty(), "need at least one noise level");
  require(winter_tout_max >= winter_tout_min && summer_tout_max >= summer_tout_min, "bad outdoor temperature range");
}

namespace {

constexpr sim::FaultType kTypes[6] = {sim::FaultType::HeaterStuckOff, sim::FaultType::HeaterStuckOn,
                                      sim::FaultType::AcStuckOff,     sim::FaultType::AcStuckOn,
                                      sim::FaultType::EnvelopeBreak,  sim::FaultType::None};

bool winter_for(sim::FaultType t, std::size_t index) {
  switch (t) {
    case sim::FaultType::AcStuckOff:
    case sim::FaultType::AcStuckOn: return false;
    case sim::FaultType::None: return index % 2 == 0;
    default: return true;
  }
}

FaultSession make_session(const FaultDatasetSpec& spec, std::size_t index, sim::FaultType type, bool winter) {
  CounterRng rng = CounterRng(spec.seed).split(index);
  FaultSession fs;
  fs.id = static_cast<std::int64_t>(index);
  fs.winter = winter;
  const int onset = spec.onset_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.onset_max - spec.onset_min + 1)));
  fs.fault = {type, type == sim::FaultType::None ? 0 : onset};
  fs.onset_approximate = type == sim::FaultType::EnvelopeBreak;
  sim::SimConfig cfg = spec.base;
  cfg.noise_std = spec.noise_levels[rng.below(spec.noise_levels.size())];
  const double lo = fs.winter ? spec.winter_tout_min : spec.summer_tout_min;
  const double hi = fs.winter ? spec.winter_tout_max : spec.summer_tout_max;
  sim::SimState init;
  init.t_out = lo + (hi - lo) * rng.uniform();
  init.t_true = cfg.t_set + 2.0 * (rng.uniform() - 0.5);
  init.t_heater = cfg.t_set;
  init.t_wall = 0.5 * (init.t_true + init.t_out);
  cfg.rng_seed = rng.next_u64();
  fs.stream = data::from_record(sim::run_session(cfg, init, spec.session_minutes, fs.fault), fs.id);
  return fs;
}

}  // namespace

std::vector<FaultSession> generate_fault_dataset(const FaultDatasetSpec& spec, int per_type, int jobs) {
  spec.validate();
  require(per_type >= 1, "per_type must be >= 1");
  const auto per = static_cast<std::size_t>(per_type);
  std::vector<FaultSession> out(6 * per);
  parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = make_session(spec, i, kTypes[i / per], winter_for(kTypes[i / per], i)); });
  return out;
}

FaultSession fault_free_twin(const FaultDatasetSpec& spec, const FaultSession& s) {
  // quantities drawn from the session stream do not depend on the fault type
  return make_session(spec, static_cast<std::size_t>(s.id), sim::FaultType::None, s.winter);
}

std::vector<FaultResult> run_fault_detection(const model::ModelParams& p, const std::vector<FaultSession>& sessions,
                                             const FaultDetectConfig& cfg, int jobs) {
  std::vector<FaultResult> out(sessions.size());
  parallel_for(sessions.size(), jobs, [&](std::size_t i) {
    const FaultSession& s = sessions[i];
    const bool faulty = s.fault.type != sim::FaultType::None;
    out[i].session_id = s.id;
    out[i].type = s.fault.type;
    out[i].onset = s.fault.onset_minute;
    out[i].verdict = detect_fault(p, s.stream, cfg, faulty ? std::optional<int>(s.fault.onset_minute) : std::nullopt);
  });
  return out;
}

std::vector<FaultClassRow> classify_faults(const std::vector<FaultResult>& results) {
  std::size_t fp_clean = 0;
  for (const auto& r : results)
    if (r.type == sim::FaultType::None && r.verdict.is_faulty) ++fp_clean;
  std::vector<FaultClassRow> rows;
  for (int t = 0; t < 5; ++t) {
    FaultClassRow row;
    row.type = kTypes[t];
    row.fp = fp_clean;
    double det = 0.0;
    for (const auto& r : results) {
      if (r.type != row.type) continue;
      const auto& v = r.verdict;
      if (!v.is_faulty) {
        ++row.fn;
      } else if (*v.detection_minute > 0) {
        ++row.tp;
        det += *v.detection_minute;
      } else {
        ++row.fp;  // alarm raised on pre-onset data
        ++row.fn;
      }
    }
    const double tp = static_cast<double>(row.tp);
    row.recall = row.tp + row.fn ? tp / static_cast<double>(row.tp + row.fn) : 0.0;
    row.precision = row.tp + row.fp ? tp / static_cast<double>(row.tp + row.fp) : 0.0;
    row.mean_detection_minutes = row.tp ? det / tp : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

void write_fault_csv(const std::vector<FaultResult>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << "session_id,fault_type,onset,detected,detection_minute,residual_rmse\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.session_id << ',' << sim::to_string(r.type) << ',';
    if (r.type != sim::FaultType::None) out << r.onset;
    out << ',' << (r.verdict.is_faulty ? 1 : 0) << ',';
    if (r.verdict.detection_minute) out << *r.verdict.detection_minute;
    std::snprintf(buf, sizeof buf, ",%.6f\n", r.verdict.residual_rmse);
    out << buf;
  }
}

}  // namespace hvac::apps
