#pragma once

#include "hvac/rng.hpp"
#include "hvac/sim/types.hpp"

namespace hvac::sim {

/// Thermostat rule with dead band. `step_index` is the minute counter; the
/// heating/cooling regime is re-evaluated from `t_out` every 300 minutes.
ControlState controller_update(const ControlState& control, double t_noisy, double vent_level,
                               double t_out, int step_index, const SimConfig& config);

/// Heater working-fluid temperature, linear in the (clamped) outdoor temperature.
double heater_fluid_temp(double t_out);

/// Weather phase for minute `i`: floor-quantized day fraction mapped onto [0, pi].
double scaled_day_step(int minute);

/// Noise sources consumed by `step`. Only the weather draw is used here;
/// measurement noise is applied by the session loop.
struct StepContext {
  double t_out_initial = 0.0;  // mean-reversion anchor for the weather model
  double weather_draw = 0.0;   // X ~ N(0, 1)
};

/// One-minute state update. `control` is the commanded state; faults override
/// the physical actuator values when active at `minute`.
SimState step(const SimState& state, const ControlState& control, const SimConfig& config,
              double scaled_step, const StepContext& ctx, const FaultSpec& fault, int minute);

/// Runs the controller + physics loop for `n` minutes.
SessionRecord run_session(const SimConfig& config, const SimState& init, int n,
                          const FaultSpec& fault = {});

/// Same as run_session, additionally returning the final state, i.e. the
/// state after the last recorded minute.
struct SessionResult {
  SessionRecord record;
  SimState final_state;
  ControlState final_control;
};

/// Session loop with an optional demand-response override: from minute
/// `thermal_off_from` onward heating and cooling are commanded off while
/// ventilation keeps following its own rule. Negative disables the override.
SessionResult run_session_ex(const SimConfig& config, const SimState& init, int n,
                             const FaultSpec& fault, int thermal_off_from = -1);

}  // namespace hvac::sim
