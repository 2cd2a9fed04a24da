#include "hvac/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hvac/error.hpp"

namespace hvac::sim {

namespace {

constexpr double kVentOnRate = 3.0;
constexpr double kVentOffRate = 1.0;
constexpr double kWeatherReversion = 0.001;
constexpr double kWeatherCycle = 0.01;
constexpr double kWeatherPhase = 0.7;
constexpr double kWeatherNoise = 0.01;

constexpr double kFluidOutLow = 253.15;
constexpr double kFluidOutHigh = 318.1;
constexpr double kFluidHot = 340.15;
constexpr double kFluidCool = 298.15;

}  // namespace

void SimConfig::validate() const {
  require(std::isfinite(noise_std) && noise_std >= 0.0, "noise_std must be >= 0");
  require(std::isfinite(dead_t) && dead_t > 0.0, "dead_t must be > 0");
  require(std::isfinite(dead_v) && dead_v > 0.0, "dead_v must be > 0");
  require(std::isfinite(t_set) && std::isfinite(v_set), "set points must be finite");
}

std::string_view to_string(FaultType f) {
  switch (f) {
    case FaultType::None: return "NONE";
    case FaultType::HeaterStuckOff: return "HEATER_STUCK_OFF";
    case FaultType::HeaterStuckOn: return "HEATER_STUCK_ON";
    case FaultType::AcStuckOff: return "AC_STUCK_OFF";
    case FaultType::AcStuckOn: return "AC_STUCK_ON";
    case FaultType::EnvelopeBreak: return "ENVELOPE_BREAK";
  }
  return "NONE";
}

FaultType fault_from_string(std::string_view s) {
  for (auto f : {FaultType::None, FaultType::HeaterStuckOff, FaultType::HeaterStuckOn,
                 FaultType::AcStuckOff, FaultType::AcStuckOn, FaultType::EnvelopeBreak}) {
    if (to_string(f) == s) return f;
  }
  throw ValidationError("unknown fault type '" + std::string(s) + "'");
}

ControlState controller_update(const ControlState& control, double t_noisy, double vent_level,
                               double t_out, int step_index, const SimConfig& config) {
  ControlState next = control;
  if (step_index % kRegimePeriod == 0) {
    next.heating_regime = t_out < config.t_set - config.dead_t;
    // Equipment of the inactive regime is switched off so heater and AC never
    // run together.
    if (next.heating_regime) {
      next.a_ac = false;
    } else {
      next.a_h = false;
    }
  }

  if (t_noisy >= config.t_set + config.dead_t) {
    if (next.heating_regime) {
      next.a_h = false;
    } else {
      next.a_ac = true;
    }
  } else if (t_noisy <= config.t_set - config.dead_t) {
    if (next.heating_regime) {
      next.a_h = true;
    } else {
      next.a_ac = false;
    }
  }

  if (vent_level > config.v_set + config.dead_v) {
    next.a_vent = false;
  } else if (vent_level < config.v_set - config.dead_v) {
    next.a_vent = true;
  }
  return next;
}

double heater_fluid_temp(double t_out) {
  const double x = std::clamp(t_out, kFluidOutLow, kFluidOutHigh);
  const double frac = (x - kFluidOutLow) / (kFluidOutHigh - kFluidOutLow);
  return kFluidHot + frac * (kFluidCool - kFluidHot);
}

double scaled_day_step(int minute) {
  const int in_day = ((minute % kMinutesPerDay) + kMinutesPerDay) % kMinutesPerDay;
  const double quantized = std::floor(static_cast<double>(in_day) / kMinutesPerDay *
                                      kMinutesPerDay) /
                           kMinutesPerDay;
  return quantized * std::numbers::pi;
}

SimState step(const SimState& s, const ControlState& control, const SimConfig& config,
              double scaled_step, const StepContext& ctx, const FaultSpec& fault, int minute) {
  const double phase = std::clamp(scaled_step, 0.0, std::numbers::pi);

  double heater_on = control.a_h ? 1.0 : 0.0;
  double ac_on = control.a_ac ? 1.0 : 0.0;
  const double vent_on = control.a_vent ? 1.0 : 0.0;
  const Coefficients& k = config.coeffs;
  double out_to_wall = k.out_to_wall;
  if (fault.active(minute)) {
    switch (fault.type) {
      case FaultType::HeaterStuckOff: heater_on = 0.0; break;
      case FaultType::HeaterStuckOn: heater_on = 1.0; break;
      case FaultType::AcStuckOff: ac_on = 0.0; break;
      case FaultType::AcStuckOn: ac_on = 1.0; break;
      case FaultType::EnvelopeBreak: out_to_wall = k.out_to_wall_broken; break;
      case FaultType::None: break;
    }
  }

  SimState n = s;
  n.t_ac = kAcTemperature;
  n.t_true = s.t_true + (s.t_heater - s.t_true) * k.heater_to_room +
             (s.t_wall - s.t_true) * k.wall_to_room +
             vent_on * (s.t_out - s.t_true) * k.vent_to_room +
             ac_on * (kAcTemperature - s.t_true) * k.ac_to_room;
  n.t_heater = s.t_heater +
               (heater_fluid_temp(s.t_out) - s.t_heater) * (heater_on * k.fluid_to_heater) +
               (s.t_true - s.t_heater) * k.room_to_heater;
  n.t_wall = s.t_wall + (s.t_true - s.t_wall) * k.room_to_wall +
             (s.t_out - s.t_wall) * out_to_wall;
  if (config.constant_weather) {
    n.t_out = s.t_out;
  } else {
    n.t_out = s.t_out + (ctx.t_out_initial - s.t_out) * kWeatherReversion +
              std::cos(phase - kWeatherPhase) * kWeatherCycle + ctx.weather_draw * kWeatherNoise;
  }
  n.t_heater = std::clamp(n.t_heater, kHeaterMin, kHeaterMax);
  n.vent_level = s.vent_level + vent_on * kVentOnRate - (1.0 - vent_on) * kVentOffRate;
  n.vent_level = std::clamp(n.vent_level, kVentMin, kVentMax);
  return n;
}

SessionResult run_session_ex(const SimConfig& config, const SimState& init, int n,
                             const FaultSpec& fault, int thermal_off_from) {
  config.validate();
  require(n >= 1, "session length must be >= 1 minute, got " + std::to_string(n));
  require(fault.onset_minute >= 0, "fault onset must be >= 0");

  const CounterRng root(config.rng_seed);
  CounterRng noise_rng = root.split(1);
  CounterRng weather_rng = root.split(2);

  SessionResult out;
  auto& rec = out.record;
  rec.noise_std = config.noise_std;
  rec.t_true.reserve(n);
  rec.t_obs.reserve(n);
  rec.t_out.reserve(n);
  rec.control.reserve(n);

  SimState state = init;
  state.t_ac = kAcTemperature;
  const StepContext base{.t_out_initial = init.t_out, .weather_draw = 0.0};
  ControlState control{};
  double t_noisy = state.t_true + config.noise_std * noise_rng.normal();

  for (int i = 0; i < n; ++i) {
    control = controller_update(control, t_noisy, state.vent_level, state.t_out, i, config);
    if (thermal_off_from >= 0 && i >= thermal_off_from) {
      control.a_h = false;
      control.a_ac = false;
    }
    rec.t_true.push_back(state.t_true);
    rec.t_obs.push_back(t_noisy);
    rec.t_out.push_back(state.t_out);
    rec.control.push_back(control);

    StepContext ctx = base;
    if (!config.constant_weather) ctx.weather_draw = weather_rng.normal();
    state = step(state, control, config, scaled_day_step(i), ctx, fault, i);
    t_noisy = state.t_true + config.noise_std * noise_rng.normal();
  }
  out.final_state = state;
  out.final_control = control;
  return out;
}

SessionRecord run_session(const SimConfig& config, const SimState& init, int n,
                          const FaultSpec& fault) {
  return run_session_ex(config, init, n, fault).record;
}

}  // namespace hvac::sim
