#include <cmath>
#include <limits>

#include "doctest.h"
#include "hvac/apps/dr.hpp"
#include "hvac/apps/fault.hpp"
#include "hvac/error.hpp"
#include "hvac/model/params.hpp"
#include "hvac/rng.hpp"
#include "hvac/sim/simulator.hpp"

using namespace hvac;
using namespace hvac::apps;

namespace {

model::ModelParams drifting_model(std::uint64_t seed, double drift) {
  model::ModelParams p = model::make_model({}, seed);
  p.weights.matrix(model::seg::head2_b)(0, 0) = drift;
  return p;
}

DrQuery heating_query(double bound, int max_minutes) {
  data::Sequence h;
  for (int i = 0; i < 60; ++i) {
    h.t_obs.push_back(sim::celsius(22.0));
    h.t_out.push_back(sim::celsius(0.0));
    h.control.push_back({});
  }
  DrQuery q;
  q.history = h;
  q.t_out_forecast.assign(400, sim::celsius(0.0));
  q.comfort_bound = bound;
  q.mode = DrMode::Heating;
  q.max_minutes = max_minutes;
  return q;
}

}  // namespace

TEST_CASE("DR event length: immediate crossing, no crossing, bound monotonicity") {
  const model::ModelParams p = drifting_model(1, -0.05);
  CHECK(dr_event_length(p, heating_query(sim::celsius(30.0), 100)) == 0);
  model::ModelParams flat = drifting_model(1, 0.0);
  flat.weights.matrix(model::seg::head2_w).setZero();
  // zero head: the prediction stays at the last denoised value
  CHECK(dr_event_length(flat, heating_query(sim::celsius(10.0), 100)) == 100);

  int prev = 1 << 30;
  for (double c = 15.0; c <= 22.5; c += 0.25) {
    const int len = dr_event_length(p, heating_query(sim::celsius(c), 300));
    CHECK(len <= prev);
    prev = len;
  }

  DrQuery shortq = heating_query(sim::celsius(20.0), 300);
  shortq.t_out_forecast.resize(299);
  CHECK_THROWS_AS(dr_event_length(p, shortq), ValidationError);
}

TEST_CASE("DR planning: single candidate, dominance and argmax stability") {
  const model::ModelParams p = drifting_model(3, -0.03);
  DrQuery q = heating_query(sim::celsius(20.0), 150);
  // a heating duty cycle in the baseline schedule makes start times differ
  q.baseline_controls.resize(400);
  for (int i = 0; i < 400; ++i) q.baseline_controls[i].a_h = (i / 20) % 2 == 0;
  const DrPlan one = dr_plan_start(p, q, 1);
  CHECK(one.best_start == 0);
  CHECK(one.duration == dr_event_length(p, q, 0));

  const DrPlan plan = dr_plan_start(p, q, 60);
  REQUIRE(plan.lengths.size() == 60);
  CHECK(plan.duration >= dr_event_length(p, q, 0));
  for (int s = 0; s < 60; ++s) {
    CHECK(plan.lengths[s] == dr_event_length(p, q, s));
    CHECK(plan.lengths[s] <= plan.duration);
    if (s < plan.best_start) CHECK(plan.lengths[s] < plan.duration);
  }
  // extending the window by worse starts changes nothing
  int w = 60;
  while (w < 200 && dr_plan_start(p, q, w + 1).lengths.back() < plan.duration) ++w;
  const DrPlan wider = dr_plan_start(p, q, w);
  CHECK(wider.duration == plan.duration);
  CHECK(wider.best_start == plan.best_start);
  CHECK_THROWS_AS(dr_plan_start(p, q, 0), ValidationError);
}

TEST_CASE("DR simulator ground truth depends on the start within a duty cycle") {
  const DrScenario sc = planning_scenario();
  const DrScan scan =
      scan_event_starts(sc.config, sc.init, sc.first_start, sc.last_start, sc.bound, sc.mode, sc.max_minutes);
  CHECK(scan.best_length >= 2 * scan.worst_length);
  CHECK(scan.lengths.size() == static_cast<std::size_t>(sc.last_start - sc.first_start));
  CHECK(simulate_event_length(sc.config, sc.init, scan.best_start, sc.bound, sc.mode, sc.max_minutes) ==
        scan.best_length);
}

TEST_CASE("DR dataset: counts, shift 0 and brute-force labels") {
  DrDatasetSpec spec = DrDatasetSpec::standard(100, 7);
  spec.experiments.resize(5);
  const DrDataset ds = generate_dr_dataset(spec, 4);
  REQUIRE(ds.examples.size() == 500);
  for (const auto& ex : ds.examples) {
    REQUIRE(ex.window.size() == static_cast<std::size_t>(spec.history + spec.max_minutes));
    int label = spec.max_minutes;
    for (int k = 0; k < spec.max_minutes; ++k)
      if (ex.window.t_true[spec.history + k] < ex.bound) {
        label = k;
        break;
      }
    CHECK(label == ex.label);
    // heating and cooling are off during the event
    for (int k = 0; k < spec.max_minutes; ++k) {
      CHECK_FALSE(ex.window.control[spec.history + k].a_h);
      CHECK_FALSE(ex.window.control[spec.history + k].a_ac);
    }
  }
  for (std::size_t e = 0; e < 5; ++e) {
    const DrExample& ex = ds.examples[e * 100];
    REQUIRE(ex.shift == 0);
    sim::SimConfig cfg = spec.base;
    cfg.rng_seed = derive_key(spec.seed, e);
    sim::SimState init;
    init.t_out = spec.experiments[e].t_out;
    init.t_true = init.t_heater = cfg.t_set;
    init.t_wall = 0.5 * (cfg.t_set + init.t_out);
    CHECK(ex.label == simulate_event_length(cfg, init, spec.warmup, ex.bound, ex.mode, spec.max_minutes));
  }
  const DrDataset again = generate_dr_dataset(spec, 1);
  for (std::size_t i = 0; i < ds.examples.size(); i += 37) CHECK(again.examples[i].window == ds.examples[i].window);

  DrDatasetSpec bad = spec;
  bad.shifts = {-500};
  CHECK_THROWS_AS(generate_dr_dataset(bad), ValidationError);
}

TEST_CASE("DR error statistics use predicted minus true") {
  const std::vector<DrResult> r{{0, 10, 12}, {1, 20, 20}, {2, 5, 9}};
  const DrErrorStats s = dr_error_stats(r);
  CHECK(s.n == 3);
  CHECK(s.mean == doctest::Approx(-2.0));
  CHECK(s.rmse == doctest::Approx(std::sqrt((4.0 + 0.0 + 16.0) / 3.0)));
}

TEST_CASE("fault dataset: counts, types and fault-free twins") {
  FaultDatasetSpec spec;
  spec.seed = 3;
  const auto sessions = generate_fault_dataset(spec, 1, 2);
  REQUIRE(sessions.size() == 6);
  const sim::FaultType order[6] = {sim::FaultType::HeaterStuckOff, sim::FaultType::HeaterStuckOn,
                                   sim::FaultType::AcStuckOff, sim::FaultType::AcStuckOn,
                                   sim::FaultType::EnvelopeBreak, sim::FaultType::None};
  for (int i = 0; i < 6; ++i) CHECK(sessions[i].fault.type == order[i]);
  CHECK(sessions[4].onset_approximate);

  const auto many = generate_fault_dataset(spec, 4, 3);
  REQUIRE(many.size() == 24);
  for (const auto& s : many) {
    CHECK(s.stream.size() == static_cast<std::size_t>(spec.session_minutes));
    if (s.fault.type == sim::FaultType::None) continue;
    CHECK(s.fault.onset_minute >= spec.onset_min);
    CHECK(s.fault.onset_minute <= spec.onset_max);
    const FaultSession twin = fault_free_twin(spec, s);
    const auto on = static_cast<std::size_t>(s.fault.onset_minute);
    CHECK(std::equal(s.stream.t_obs.begin(), s.stream.t_obs.begin() + on, twin.stream.t_obs.begin()));
    CHECK(std::equal(s.stream.t_true.begin(), s.stream.t_true.begin() + on, twin.stream.t_true.begin()));
  }
  CHECK_THROWS_AS(generate_fault_dataset(spec, 0), ValidationError);
}

TEST_CASE("fault detection: degenerate thresholds and reproducibility") {
  FaultDatasetSpec spec;
  spec.seed = 9;
  const auto sessions = generate_fault_dataset(spec, 1);
  const model::ModelParams p = model::make_model({}, 4);
  FaultDetectConfig never;
  never.threshold = std::numeric_limits<double>::infinity();
  FaultDetectConfig always;
  always.threshold = 0.0;
  for (const auto& s : sessions) {
    const bool faulty = s.fault.type != sim::FaultType::None;
    const std::optional<int> onset = faulty ? std::optional<int>(s.fault.onset_minute) : std::nullopt;
    const FaultVerdict v = detect_fault(p, s.stream, never, onset);
    CHECK_FALSE(v.is_faulty);
    CHECK_FALSE(v.detection_minute.has_value());
    CHECK(v.residual_rmse > 0.0);
    const FaultVerdict a = detect_fault(p, s.stream, always, onset);
    CHECK(a.is_faulty);
    REQUIRE(a.alarm_minute.has_value());
    CHECK(*a.alarm_minute == always.history + always.window - 1);
    CHECK(a.detection_minute.has_value() == faulty);
  }

  FaultDetectConfig cfg;
  const auto r1 = run_fault_detection(p, sessions, cfg, 1);
  const auto r2 = run_fault_detection(p, sessions, cfg, 3);
  const auto c1 = classify_faults(r1);
  const auto c2 = classify_faults(r2);
  REQUIRE(c1.size() == c2.size());
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].tp == c2[i].tp);
    CHECK(c1[i].fp == c2[i].fp);
    CHECK(c1[i].recall == c2[i].recall);
    CHECK(c1[i].precision == c2[i].precision);
  }
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].verdict.residual_rmse == r2[i].verdict.residual_rmse);

  data::Sequence tiny = sessions[0].stream.slice(0, 60);
  CHECK_THROWS_AS(detect_fault(p, tiny, cfg), ValidationError);
}

TEST_CASE("fault classification counts") {
  auto verdict = [](bool flagged, int det) {
    FaultVerdict v;
    v.is_faulty = flagged;
    if (flagged) v.detection_minute = det;
    return v;
  };
  const std::vector<FaultResult> r{
      {0, sim::FaultType::HeaterStuckOff, 300, verdict(true, 10)},
      {1, sim::FaultType::HeaterStuckOff, 300, verdict(true, 20)},
      {2, sim::FaultType::HeaterStuckOff, 300, verdict(false, 0)},
      {3, sim::FaultType::HeaterStuckOff, 300, verdict(true, -5)},
      {4, sim::FaultType::None, 0, verdict(false, 0)},
      {5, sim::FaultType::None, 0, verdict(true, 0)},
  };
  const auto rows = classify_faults(r);
  const auto it = std::find_if(rows.begin(), rows.end(),
                               [](const FaultClassRow& x) { return x.type == sim::FaultType::HeaterStuckOff; });
  REQUIRE(it != rows.end());
  CHECK(it->tp == 2);
  CHECK(it->fn == 2);
  CHECK(it->fp == 2);
  CHECK(it->recall == doctest::Approx(0.5));
  CHECK(it->precision == doctest::Approx(0.5));
  CHECK(it->mean_detection_minutes == doctest::Approx(15.0));
}
