#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hvac/data/sequence.hpp"
#include "hvac/model/params.hpp"
#include "hvac/sim/types.hpp"

namespace hvac::apps {

struct FaultDetectConfig {
  double threshold = 0.8;  // kelvin, RMSE over one rollout window
  int window = 10;         // rollout length, minutes
  int history = 60;        // denoised history fed to the predictor
};

struct FaultVerdict {
  bool is_faulty = false;
  /// Minutes from onset to the alarm (negative for an alarm before onset);
  /// set iff is_faulty and the onset is known.
  std::optional<int> detection_minute;
  /// Minute at which the alarm is raised: the end of the first window over threshold.
  std::optional<int> alarm_minute;
  /// RMSE of the alarming window, or the largest window RMSE if none alarmed.
  double residual_rmse = 0.0;
};

/// Slides over the stream one minute at a time. At position m the model sees
/// minutes [m - history, m), rolls `window` minutes ahead with the recorded
/// commanded controls and outdoor temperature, and is compared to t_obs over
/// [m, m + window). The first window with RMSE above threshold raises the alarm.
FaultVerdict detect_fault(const model::ModelParams& p, const data::Sequence& stream, const FaultDetectConfig& cfg,
                          std::optional<int> onset = std::nullopt);

struct FaultSession {
  std::int64_t id = 0;
  sim::FaultSpec fault;
  bool onset_approximate = false;  // envelope breaks show up only gradually
  bool winter = true;
  data::Sequence stream;
};

struct FaultDatasetSpec {
  sim::SimConfig base;
  int session_minutes = 720;
  int onset_min = 300;
  int onset_max = 420;
  std::vector<double> noise_levels{0.01, 0.07, 0.13, 0.19, 0.25};
  double winter_tout_min = sim::celsius(-15.0), winter_tout_max = sim::celsius(0.0);
  double summer_tout_min = sim::celsius(28.0), summer_tout_max = sim::celsius(34.0);
  std::uint64_t seed = 0;

  void validate() const;
};

/// per_type sessions for each of the five fault types and per_type fault-free
/// ones. Heater and envelope faults run in winter, AC faults in summer,
/// fault-free sessions alternate between the two.
std::vector<FaultSession> generate_fault_dataset(const FaultDatasetSpec& spec, int per_type, int jobs = 1);

/// Same session with the fault removed (identical seed and settings).
FaultSession fault_free_twin(const FaultDatasetSpec& spec, const FaultSession& s);

struct FaultResult {
  std::int64_t session_id = 0;
  sim::FaultType type = sim::FaultType::None;
  int onset = 0;
  FaultVerdict verdict;
};

std::vector<FaultResult> run_fault_detection(const model::ModelParams& p, const std::vector<FaultSession>& sessions,
                                             const FaultDetectConfig& cfg, int jobs = 1);

/// Per-type binary classification against the fault-free sessions. An alarm
/// before onset counts as a false positive.
struct FaultClassRow {
  sim::FaultType type = sim::FaultType::None;
  std::size_t tp = 0, fp = 0, fn = 0;
  double recall = 0.0;
  double precision = 0.0;
  double mean_detection_minutes = 0.0;
};

std::vector<FaultClassRow> classify_faults(const std::vector<FaultResult>& results);

void write_fault_csv(const std::vector<FaultResult>& rows, const std::filesystem::path& path);

}  // namespace hvac::apps
