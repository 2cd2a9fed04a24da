#include <cmath>

#include "doctest.h"
#include "hvac/error.hpp"
#include "hvac/sim/scenario.hpp"
#include "hvac/sim/simulator.hpp"

using namespace hvac;
using namespace hvac::sim;

namespace {

SimState uniform_state(double t) {
  SimState s;
  s.t_true = s.t_heater = s.t_wall = s.t_out = t;
  return s;
}

StepContext ctx_for(const SimState& s) { return {s.t_out, 0.0}; }

}  // namespace

TEST_CASE("controller: heating regime switches heater off above the band") {
  SimConfig cfg;
  ControlState c;
  c.a_h = true;
  c.heating_regime = true;
  const ControlState n = controller_update(c, cfg.t_set + cfg.dead_t + 0.1, 40.0, 270.0, 1, cfg);
  CHECK_FALSE(n.a_h);
}

TEST_CASE("controller: inside the dead band nothing changes") {
  SimConfig cfg;
  for (int bits = 0; bits < 8; ++bits) {
    ControlState c;
    c.a_h = bits & 1;
    c.a_vent = bits & 2;
    c.a_ac = false;
    c.heating_regime = bits & 4;
    if (!c.heating_regime) c.a_h = false;
    const ControlState n = controller_update(c, cfg.t_set, cfg.v_set, 270.0, 7, cfg);
    CHECK(n == c);
  }
}

TEST_CASE("controller: regime re-evaluated every 300 minutes") {
  SimConfig cfg;  // t_set 298.15, dead_t 1
  ControlState c;
  c.heating_regime = false;
  CHECK(controller_update(c, cfg.t_set, 40.0, 280.0, 300, cfg).heating_regime);
  CHECK_FALSE(controller_update(c, cfg.t_set, 40.0, 280.0, 301, cfg).heating_regime);
  c.heating_regime = true;
  CHECK_FALSE(controller_update(c, cfg.t_set, 40.0, 297.5, 600, cfg).heating_regime);
}

TEST_CASE("controller: cooling regime and ventilation rules") {
  SimConfig cfg;
  ControlState c;
  c.heating_regime = false;
  CHECK(controller_update(c, cfg.t_set + 1.5, 40.0, 300.0, 1, cfg).a_ac);
  c.a_ac = true;
  CHECK_FALSE(controller_update(c, cfg.t_set - 1.5, 40.0, 300.0, 1, cfg).a_ac);
  CHECK(controller_update(c, cfg.t_set, cfg.v_set - cfg.dead_v - 1, 300.0, 1, cfg).a_vent);
  c.a_vent = true;
  CHECK_FALSE(controller_update(c, cfg.t_set, cfg.v_set + cfg.dead_v + 1, 300.0, 1, cfg).a_vent);
}

TEST_CASE("heater fluid temperature is a clamped decreasing line") {
  CHECK(heater_fluid_temp(253.15) == doctest::Approx(340.15).epsilon(1e-12));
  CHECK(heater_fluid_temp(318.1) == doctest::Approx(298.15).epsilon(1e-12));
  CHECK(heater_fluid_temp(285.625) == doctest::Approx(319.15).epsilon(1e-12));
  CHECK(heater_fluid_temp(200.0) == doctest::Approx(340.15).epsilon(1e-12));
  CHECK(heater_fluid_temp(330.0) == doctest::Approx(298.15).epsilon(1e-12));
}

TEST_CASE("step: fixed point and hand-evaluated updates") {
  SimConfig cfg;
  cfg.constant_weather = true;
  const SimState s = uniform_state(298.15);
  const SimState n = step(s, {}, cfg, 0.5, ctx_for(s), {}, 0);
  CHECK(n.t_true == 298.15);
  CHECK(n.t_heater == 298.15);
  CHECK(n.t_wall == 298.15);
  CHECK(n.t_out == 298.15);

  SimState h = s;
  h.t_heater = 299.15;
  CHECK(step(h, {}, cfg, 0.5, ctx_for(h), {}, 0).t_true == doctest::Approx(298.182).epsilon(1e-12));

  SimState v = s;
  v.vent_level = 0.0;
  CHECK(step(v, {}, cfg, 0.5, ctx_for(v), {}, 0).vent_level == 0.0);
}

TEST_CASE("step: weather update uses the mean-reversion anchor and the cosine phase") {
  SimConfig cfg;
  SimState s = uniform_state(280.0);
  const StepContext ctx{285.0, 0.5};
  const double f = 1.2;
  const double expected = 280.0 + (285.0 - 280.0) * 0.001 + std::cos(f - 0.7) * 0.01 + 0.5 * 0.01;
  CHECK(step(s, {}, cfg, f, ctx, {}, 0).t_out == doctest::Approx(expected).epsilon(1e-14));
  CHECK(scaled_day_step(0) == 0.0);
  CHECK(scaled_day_step(720) == doctest::Approx(M_PI / 2));
  CHECK(scaled_day_step(1440) == 0.0);
}

TEST_CASE("step: clamps hold for extreme states and all control combinations") {
  SimConfig cfg;
  CounterRng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    SimState s;
    s.t_true = 250.0 + 90.0 * rng.uniform();
    s.t_heater = 260.0 + 80.0 * rng.uniform();
    s.t_wall = 250.0 + 70.0 * rng.uniform();
    s.t_out = 250.0 + 70.0 * rng.uniform();
    s.vent_level = 70.0 * rng.uniform() - 5.0;
    ControlState c;
    c.a_h = rng.below(2);
    c.a_vent = rng.below(2);
    c.a_ac = !c.a_h && rng.below(2);
    const SimState n = step(s, c, cfg, M_PI * rng.uniform(), {s.t_out, rng.normal()}, {}, 0);
    CHECK(n.t_heater >= kHeaterMin);
    CHECK(n.t_heater <= kHeaterMax);
    CHECK(n.vent_level >= kVentMin);
    CHECK(n.vent_level <= kVentMax);
    CHECK(n.t_ac == kAcTemperature);
  }
}

TEST_CASE("step: monotone response when every neighbour is warmer") {
  SimConfig cfg;
  cfg.constant_weather = true;
  CounterRng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    SimState s;
    s.t_true = 280.0 + 20.0 * rng.uniform();
    s.t_heater = s.t_true + 0.01 + 10.0 * rng.uniform();
    s.t_wall = s.t_true + 0.01 + 10.0 * rng.uniform();
    s.t_out = s.t_true + 0.01 + 10.0 * rng.uniform();
    CHECK(step(s, {}, cfg, 0.3, ctx_for(s), {}, 0).t_true > s.t_true);
  }
}

TEST_CASE("faults override the physical actuator only") {
  SimConfig cfg;
  cfg.constant_weather = true;
  SimState s = uniform_state(290.0);
  s.t_heater = 300.0;
  ControlState on;
  on.a_h = true;
  const SimState ok = step(s, on, cfg, 0.3, ctx_for(s), {}, 10);
  const SimState stuck = step(s, on, cfg, 0.3, ctx_for(s), {FaultType::HeaterStuckOff, 5}, 10);
  const SimState off = step(s, {}, cfg, 0.3, ctx_for(s), {}, 10);
  CHECK(stuck == off);
  CHECK_FALSE(ok == off);
  // not yet active
  CHECK(step(s, on, cfg, 0.3, ctx_for(s), {FaultType::HeaterStuckOff, 50}, 10) == ok);

  SimState w = uniform_state(295.0);
  w.t_out = 270.0;
  const SimState broken = step(w, {}, cfg, 0.3, ctx_for(w), {FaultType::EnvelopeBreak, 0}, 0);
  CHECK(broken.t_wall == doctest::Approx(295.0 + (270.0 - 295.0) * 0.3).epsilon(1e-14));
}

TEST_CASE("run_session: single minute, determinism and noise statistics") {
  SimConfig cfg;
  cfg.noise_std = 0.0;
  const SimState init = uniform_state(298.15);
  const SessionRecord one = run_session(cfg, init, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.t_true[0] == 298.15);
  CHECK(one.t_obs[0] == 298.15);
  CHECK_THROWS_AS(run_session(cfg, init, 0), ValidationError);

  cfg.noise_std = 0.2;
  cfg.rng_seed = 42;
  SimState cold = init;
  cold.t_out = 265.0;
  const SessionRecord a = run_session(cfg, cold, 2000);
  const SessionRecord b = run_session(cfg, cold, 2000);
  CHECK(a == b);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a.t_obs[i] - a.t_true[i];
    sum += e;
    sum2 += e * e;
  }
  const double n = static_cast<double>(a.size());
  CHECK(std::abs(sum / n) < 4.0 * 0.2 / std::sqrt(n));
  CHECK(std::sqrt(sum2 / n) == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("run_session: fault transparency and mutual exclusion") {
  SimConfig cfg;
  cfg.noise_std = 0.1;
  cfg.rng_seed = 9;
  SimState init = uniform_state(297.0);
  init.t_out = 330.0;  // starts in cooling, weather drifts
  for (FaultType f : {FaultType::HeaterStuckOff, FaultType::HeaterStuckOn, FaultType::AcStuckOff,
                      FaultType::AcStuckOn, FaultType::EnvelopeBreak}) {
    const SessionRecord clean = run_session(cfg, init, 900);
    const SessionRecord faulty = run_session(cfg, init, 900, {f, 400});
    // the fault acting at minute 400 first shows in the state recorded at 401
    for (int i = 0; i <= 400; ++i) {
      CHECK(clean.t_true[i] == faulty.t_true[i]);
      CHECK(clean.t_obs[i] == faulty.t_obs[i]);
      CHECK(clean.control[i] == faulty.control[i]);
    }
  }
  for (double tout : {250.0, 280.0, 300.0, 315.0}) {
    SimState s = init;
    s.t_out = tout;
    const SessionRecord r = run_session(cfg, s, 3000);
    for (const auto& c : r.control) CHECK_FALSE((c.a_h && c.a_ac));
  }
}

TEST_CASE("validation scenarios all pass and are reproducible") {
  for (int id = 1; id <= kScenarioCount; ++id) {
    const ScenarioReport a = run_scenario(id);
    const ScenarioReport b = run_scenario(id);
    CAPTURE(id);
    CAPTURE(a.detail);
    CHECK(a.passed);
    CHECK(a.trace == b.trace);
  }
  CHECK_THROWS_AS(run_scenario(0), ValidationError);
  CHECK_THROWS_AS(run_scenario(7), ValidationError);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.noise_std = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.dead_t = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK(fault_from_string("HEATER_STUCK_OFF") == FaultType::HeaterStuckOff);
  CHECK(to_string(FaultType::EnvelopeBreak) == "ENVELOPE_BREAK");
  CHECK_THROWS_AS(fault_from_string("BOGUS"), ValidationError);
}
