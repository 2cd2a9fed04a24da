#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hvac::sim {

inline constexpr double kHeaterMin = 273.15;
inline constexpr double kHeaterMax = 323.15;
inline constexpr double kVentMin = 0.0;
inline constexpr double kVentMax = 60.0;
inline constexpr double kAcTemperature = 283.15;
inline constexpr int kRegimePeriod = 300;   // minutes between heating/cooling re-evaluation
inline constexpr int kMinutesPerDay = 1440;

constexpr double celsius(double c) { return c + 273.15; }

/// Physical state of the room. Only t_true is (noisily) observed.
struct SimState {
  double t_true = 298.15;
  double t_heater = 298.15;
  double t_wall = 298.15;
  double t_ac = kAcTemperature;
  double vent_level = 40.0;
  double t_out = 298.15;

  bool operator==(const SimState&) const = default;
};

struct ControlState {
  bool a_h = false;
  bool a_vent = false;
  bool a_ac = false;
  bool heating_regime = true;

  bool operator==(const ControlState&) const = default;
};

/// Per-minute coupling coefficients of the lumped room model.
struct Coefficients {
  double heater_to_room = 0.032;
  double wall_to_room = 0.025;
  double vent_to_room = 0.005;
  double ac_to_room = 0.016;
  double fluid_to_heater = 0.08;
  double room_to_heater = 0.05;
  double room_to_wall = 0.1;
  double out_to_wall = 0.1;
  double out_to_wall_broken = 0.3;  // ENVELOPE_BREAK replacement for out_to_wall

  bool operator==(const Coefficients&) const = default;
};

struct SimConfig {
  double noise_std = 0.0;
  double t_set = 298.15;
  double v_set = 40.0;
  double dead_t = 1.0;
  double dead_v = 10.0;
  bool constant_weather = false;
  std::uint64_t rng_seed = 0;
  Coefficients coeffs{};

  void validate() const;
};

enum class FaultType { None, HeaterStuckOff, HeaterStuckOn, AcStuckOff, AcStuckOn, EnvelopeBreak };

std::string_view to_string(FaultType f);
FaultType fault_from_string(std::string_view s);

struct FaultSpec {
  FaultType type = FaultType::None;
  int onset_minute = 0;

  [[nodiscard]] bool active(int minute) const {
    return type != FaultType::None && minute >= onset_minute;
  }
};

/// Per-minute trace of one simulation run. Controls are the commanded values.
struct SessionRecord {
  std::vector<double> t_true;
  std::vector<double> t_obs;
  std::vector<double> t_out;
  std::vector<ControlState> control;
  double noise_std = 0.0;

  [[nodiscard]] std::size_t size() const { return t_true.size(); }
  bool operator==(const SessionRecord&) const = default;
};

}  // namespace hvac::sim
