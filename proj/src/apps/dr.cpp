#include "hvac/apps/dr.hpp"

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

std::string_view to_string(DrMode m) { return m == DrMode::Heating ? "heating" : "cooling"; }

DrMode dr_mode_from_string(std::string_view s) {
  if (s == "heating") return DrMode::Heating;
  if (s == "cooling") return DrMode::Cooling;
  throw ValidationError("unknown DR mode '" + std::string(s) + "' (expected heating or cooling)");
}

bool crosses(DrMode mode, double t, double bound) { return mode == DrMode::Heating ? t < bound : t > bound; }

void DrQuery::validate(int required) const {
  require(history.size() > 0, "DR query needs a non-empty history");
  require(max_minutes >= 1, "max_minutes must be >= 1");
  require(std::isfinite(comfort_bound), "comfort bound must be finite");
  require(static_cast<int>(t_out_forecast.size()) >= required,
          "outdoor forecast covers " + std::to_string(t_out_forecast.size()) + " minutes, " +
              std::to_string(required) + " needed");
  require(baseline_controls.empty() || static_cast<int>(baseline_controls.size()) >= required,
          "baseline control schedule shorter than the forecast window");
}

namespace {

sim::ControlState event_control(sim::ControlState c) {
  c.a_h = false;
  c.a_ac = false;
  return c;
}

/// Batched event lengths for several candidate starts of one query.
std::vector<int> event_lengths(const model::ModelParams& p, const DrQuery& q, const std::vector<int>& starts) {
  int last = 0;
  for (int s : starts) {
    require(s >= 0, "event start must be >= 0");
    last = std::max(last, s);
  }
  const int H = last + q.max_minutes;
  q.validate(H);
  const model::RolloutState one = model::warm_start(p, model::make_batch(q.history));
  const auto B = static_cast<Index>(starts.size());
  model::RolloutState st;
  st.hidden = one.hidden.replicate(1, B);
  st.t_current = one.t_current.replicate(1, B);
  st.t_out_current = one.t_out_current.replicate(1, B);
  st.code_current.assign(static_cast<std::size_t>(B), one.code_current.front());
  st.trust_halfwidth = one.trust_halfwidth.replicate(1, B);
  Eigen::MatrixXi codes(B, H);
  Eigen::MatrixXd tout(B, H);
  for (Index j = 0; j < B; ++j) {
    const int s = starts[static_cast<std::size_t>(j)];
    for (int k = 0; k < H; ++k) {
      const sim::ControlState base =
          q.baseline_controls.empty() ? sim::ControlState{} : q.baseline_controls[static_cast<std::size_t>(k)];
      codes(j, k) = model::encode_action(k >= s ? event_control(base) : base);
      tout(j, k) = q.t_out_forecast[static_cast<std::size_t>(k)];
    }
  }
  const Eigen::MatrixXd pred = model::advance(p, st, codes, tout);
  std::vector<int> out;
  for (Index j = 0; j < B; ++j) {
    const int s = starts[static_cast<std::size_t>(j)];
    int len = q.max_minutes;
    for (int k = 0; k < q.max_minutes; ++k) {
      if (crosses(q.mode, pred(j, s + k), q.comfort_bound)) {
        len = k;
        break;
      }
    }
    out.push_back(len);
  }
  return out;
}

}  // namespace

int dr_event_length(const model::ModelParams& p, const DrQuery& q, int start) {
  return event_lengths(p, q, {start}).front();
}

DrPlan dr_plan_start(const model::ModelParams& p, const DrQuery& q, int window) {
  require(window >= 1, "planning window must be >= 1");
  std::vector<int> starts(static_cast<std::size_t>(window));
  for (int s = 0; s < window; ++s) starts[static_cast<std::size_t>(s)] = s;
  DrPlan plan;
  plan.lengths = event_lengths(p, q, starts);
  plan.duration = -1;
  for (int s = 0; s < window; ++s) {
    if (plan.lengths[static_cast<std::size_t>(s)] > plan.duration) {
      plan.duration = plan.lengths[static_cast<std::size_t>(s)];
      plan.best_start = s;
    }
  }
  return plan;
}

int simulate_event_length(const sim::SimConfig& cfg, const sim::SimState& init, int start, double bound, DrMode mode,
                          int max_minutes) {
  require(start >= 0 && max_minutes >= 1, "event start must be >= 0 and max_minutes >= 1");
  const sim::SessionRecord r = sim::run_session_ex(cfg, init, start + max_minutes, {}, start).record;
  for (int k = 0; k < max_minutes; ++k)
    if (crosses(mode, r.t_true[static_cast<std::size_t>(start + k)], bound)) return k;
  return max_minutes;
}

DrScan scan_event_starts(const sim::SimConfig& cfg, const sim::SimState& init, int first, int last, double bound,
                         DrMode mode, int max_minutes) {
  require(first >= 0 && last > first, "scan range must be non-empty");
  DrScan scan;
  for (int s = first; s < last; ++s) {
    const int len = simulate_event_length(cfg, init, s, bound, mode, max_minutes);
    scan.lengths.push_back(len);
    if (len > scan.best_length) {
      scan.best_length = len;
      scan.best_start = s;
    }
    if (scan.worst_length < 0 || len < scan.worst_length) {
      scan.worst_length = len;
      scan.worst_start = s;
    }
  }
  return scan;
}

DrScenario planning_scenario() {
  DrScenario sc;
  sc.config.noise_std = 0.0;
  sc.config.constant_weather = true;
  sc.init.t_out = sim::celsius(0.0);
  sc.init.t_true = 298.15;
  sc.init.t_wall = 285.0;
  sc.init.t_heater = 310.0;
  sc.bound = sim::celsius(20.0);
  return sc;
}

DrDatasetSpec DrDatasetSpec::standard(int n_shifts, std::uint64_t seed) {
  require(n_shifts >= 1, "need at least one shift");
  DrDatasetSpec s;
  s.base.noise_std = 0.1;
  s.seed = seed;
  for (double c : {-10.0, -5.0, 0.0, 5.0, 10.0}) s.experiments.push_back({DrMode::Heating, sim::celsius(c), sim::celsius(20.0)});
  for (double c : {30.0, 32.0, 34.0, 36.0, 38.0}) s.experiments.push_back({DrMode::Cooling, sim::celsius(c), sim::celsius(28.0)});
  for (int k = 0; k < n_shifts; ++k) s.shifts.push_back(k);
  return s;
}

void DrDatasetSpec::validate() const {
  base.validate();
  require(!experiments.empty(), "DR dataset needs at least one experiment");
  require(!shifts.empty(), "DR dataset needs at least one shift");
  require(history >= 1 && max_minutes >= 1 && warmup >= 0, "history and max_minutes must be >= 1");
  for (int s : shifts)
    require(warmup + s - history >= 0,
            "shift " + std::to_string(s) + " moves the history before the start of the simulation");
}

DrQuery DrExample::query(int history, int max_minutes) const {
  DrQuery q;
  q.history = window.slice(0, static_cast<std::size_t>(history));
  q.t_out_forecast.assign(window.t_out.begin() + history, window.t_out.end());
  q.baseline_controls.assign(window.control.begin() + history, window.control.end());
  q.comfort_bound = bound;
  q.mode = mode;
  q.max_minutes = max_minutes;
  return q;
}

int label_from_trace(const data::Sequence& w, int history, double bound, DrMode mode, int max_minutes) {
  require(w.has_truth(), "DR labels need t_true");
  require(static_cast<int>(w.size()) >= history + max_minutes, "DR window shorter than history + max_minutes");
  for (int k = 0; k < max_minutes; ++k)
    if (crosses(mode, w.t_true[static_cast<std::size_t>(history + k)], bound)) return k;
  return max_minutes;
}

DrDataset generate_dr_dataset(const DrDatasetSpec& spec, int jobs) {
  spec.validate();
  DrDataset ds;
  ds.spec = spec;
  const std::size_t n_shift = spec.shifts.size();
  ds.examples.resize(spec.experiments.size() * n_shift);
  parallel_for(ds.examples.size(), jobs, [&](std::size_t i) {
    const std::size_t e = i / n_shift;
    const int shift = spec.shifts[i % n_shift];
    const DrExperiment& x = spec.experiments[e];
    sim::SimConfig cfg = spec.base;
    cfg.rng_seed = derive_key(spec.seed, e);
    sim::SimState init;
    init.t_out = x.t_out;
    init.t_true = cfg.t_set;
    init.t_heater = cfg.t_set;
    init.t_wall = 0.5 * (cfg.t_set + x.t_out);
    const int start = spec.warmup + shift;
    const sim::SessionRecord r = sim::run_session_ex(cfg, init, start + spec.max_minutes, {}, start).record;
    DrExample ex;
    ex.experiment = static_cast<int>(e);
    ex.shift = shift;
    ex.mode = x.mode;
    ex.bound = x.bound;
    ex.window = data::from_record(r, static_cast<std::int64_t>(i))
                    .slice(static_cast<std::size_t>(start - spec.history),
                           static_cast<std::size_t>(spec.history + spec.max_minutes));
    ex.label = label_from_trace(ex.window, spec.history, x.bound, x.mode, spec.max_minutes);
    ds.examples[i] = std::move(ex);
  });
  return ds;
}

data::Dataset dr_training_set(const DrDataset& ds) {
  data::Dataset out;
  for (const auto& ex : ds.examples) out.sequences.push_back(ex.window);
  out.meta["source"] = "dr";
  out.meta["n_sequences"] = std::to_string(out.size());
  return out;
}

std::vector<DrResult> evaluate_dr(const model::ModelParams& p, const DrDataset& ds, int jobs) {
  std::vector<DrResult> out(ds.examples.size());
  parallel_for(ds.examples.size(), jobs, [&](std::size_t i) {
    const DrExample& ex = ds.examples[i];
    const DrQuery q = ex.query(ds.spec.history, ds.spec.max_minutes);
    out[i] = {ds.spec.warmup + ex.shift, dr_event_length(p, q), ex.label};
  });
  return out;
}

DrErrorStats dr_error_stats(const std::vector<DrResult>& rows) {
  require(!rows.empty(), "no DR results");
  DrErrorStats s;
  s.n = rows.size();
  double sum = 0.0, sum2 = 0.0;
  for (const auto& r : rows) {
    const double e = r.predicted - r.truth;
    sum += e;
    sum2 += e * e;
  }
  const double n = static_cast<double>(s.n);
  s.mean = sum / n;
  s.rmse = std::sqrt(sum2 / n);
  s.std = std::sqrt(std::max(0.0, sum2 / n - s.mean * s.mean));
  return s;
}

void write_dr_csv(const std::vector<DrResult>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << "start_minute,event_length_pred,event_length_true\n";
  for (const auto& r : rows) out << r.start_minute << ',' << r.predicted << ',' << r.truth << '\n';
}

}  // namespace hvac::apps
