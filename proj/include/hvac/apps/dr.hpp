#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "hvac/data/sequence.hpp"
#include "hvac/model/params.hpp"
#include "hvac/sim/types.hpp"

namespace hvac::apps {

/// Heating: the event ends when temperature drops below the bound.
/// Cooling: when it rises above it.
enum class DrMode { Heating, Cooling };

std::string_view to_string(DrMode m);
DrMode dr_mode_from_string(std::string_view s);

[[nodiscard]] bool crosses(DrMode mode, double t, double bound);

/// A DR request against a recorded history. Minute 0 of the event is the
/// first minute after the history. `baseline_controls` is the schedule the
/// HVAC would follow without the event (empty = everything off); during the
/// event heating and cooling are forced off and ventilation keeps the
/// baseline command.
struct DrQuery {
  data::Sequence history;
  std::vector<double> t_out_forecast;
  std::vector<sim::ControlState> baseline_controls;
  double comfort_bound = 0.0;
  DrMode mode = DrMode::Heating;
  int max_minutes = 300;

  void validate(int required_minutes) const;
};

/// Predicted event length starting `start` minutes after the history: the
/// first whole minute k in [0, max_minutes) whose predicted temperature is
/// past the bound, else max_minutes.
int dr_event_length(const model::ModelParams& p, const DrQuery& q, int start = 0);

struct DrPlan {
  int best_start = 0;
  int duration = 0;
  std::vector<int> lengths;  // event length for every candidate start
};

/// Argmax of the event length over starts [0, window); earliest start wins ties.
DrPlan dr_plan_start(const model::ModelParams& p, const DrQuery& q, int window);

/// Simulator ground truth: run the thermostat normally, force heating and
/// cooling off from `start`, and return the first minute k >= 0 of the true
/// temperature trace past the bound (max_minutes if none).
int simulate_event_length(const sim::SimConfig& cfg, const sim::SimState& init, int start, double bound,
                          DrMode mode, int max_minutes);

/// Scan of the true event length over starts [first, last).
struct DrScan {
  int best_start = 0, best_length = -1;
  int worst_start = 0, worst_length = -1;
  std::vector<int> lengths;
};
DrScan scan_event_starts(const sim::SimConfig& cfg, const sim::SimState& init, int first, int last, double bound,
                         DrMode mode, int max_minutes);

/// Winter heating case at 0 C outdoors with a 20 C comfort bound, steady
/// weather and a noiseless sensor.
struct DrScenario {
  sim::SimConfig config;
  sim::SimState init;
  int first_start = 1200;
  int last_start = 1700;
  double bound = 0.0;
  DrMode mode = DrMode::Heating;
  int max_minutes = 400;
};
DrScenario planning_scenario();

struct DrExperiment {
  DrMode mode = DrMode::Heating;
  double t_out = 0.0;  // initial outdoor temperature, kelvin
  double bound = 0.0;
};

/// HVAC-off experiments: a warm-up under normal control, then heating and
/// cooling off until the comfort bound is crossed. Sliding the event start by
/// `shift` minutes augments each experiment.
struct DrDatasetSpec {
  sim::SimConfig base;
  std::vector<DrExperiment> experiments;
  std::vector<int> shifts;
  int warmup = 600;
  int history = 150;
  int max_minutes = 150;
  std::uint64_t seed = 0;

  /// Five winter and five summer outdoor temperatures with 20 C / 28 C bounds.
  static DrDatasetSpec standard(int n_shifts, std::uint64_t seed = 0);
  void validate() const;
};

struct DrExample {
  int experiment = 0;
  int shift = 0;
  DrMode mode = DrMode::Heating;
  double bound = 0.0;
  int label = 0;          // true event length, minutes
  data::Sequence window;  // `history` minutes before the event, then max_minutes of the event

  [[nodiscard]] DrQuery query(int history, int max_minutes) const;
};

struct DrDataset {
  DrDatasetSpec spec;
  std::vector<DrExample> examples;
};

DrDataset generate_dr_dataset(const DrDatasetSpec& spec, int jobs = 1);

/// First k with the window's t_true at minute history + k past the bound.
int label_from_trace(const data::Sequence& window, int history, double bound, DrMode mode, int max_minutes);

/// Event windows as equal-length training sequences.
data::Dataset dr_training_set(const DrDataset& ds);

struct DrResult {
  int start_minute = 0;
  int predicted = 0;
  int truth = 0;
};

std::vector<DrResult> evaluate_dr(const model::ModelParams& p, const DrDataset& ds, int jobs = 1);

struct DrErrorStats {
  double rmse = 0.0;
  double mean = 0.0;  // signed, predicted - true
  double std = 0.0;
  std::size_t n = 0;
};
DrErrorStats dr_error_stats(const std::vector<DrResult>& results);

void write_dr_csv(const std::vector<DrResult>& rows, const std::filesystem::path& path);

}  // namespace hvac::apps
