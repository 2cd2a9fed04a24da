#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hvac/sim/types.hpp"

namespace hvac::data {

/// Fixed-length labeled time series. `t_true` is empty when ground truth is
/// unavailable (ingested data); `noise_std` is NaN when the label is unknown.
struct Sequence {
  std::int64_t id = 0;
  std::vector<double> t_obs;
  std::vector<double> t_true;
  std::vector<double> t_out;
  std::vector<sim::ControlState> control;
  double noise_std = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] std::size_t size() const { return t_obs.size(); }
  [[nodiscard]] bool has_truth() const { return !t_true.empty(); }
  [[nodiscard]] bool has_noise_label() const { return std::isfinite(noise_std); }

  /// Contiguous sub-range [begin, begin + length).
  [[nodiscard]] Sequence slice(std::size_t begin, std::size_t length) const;

  /// Throws ValidationError if the per-minute arrays disagree in length.
  void validate() const;

  bool operator==(const Sequence&) const = default;
};

Sequence from_record(const sim::SessionRecord& record, std::int64_t id = 0);

struct Dataset {
  std::vector<Sequence> sequences;
  /// Flat key/value metadata (grid description, seed, generation timestamp).
  std::map<std::string, std::string> meta;

  [[nodiscard]] std::size_t size() const { return sequences.size(); }
  [[nodiscard]] bool empty() const { return sequences.empty(); }
  /// Common sequence length; throws if lengths differ or the dataset is empty.
  [[nodiscard]] std::size_t sequence_length() const;
  [[nodiscard]] bool has_truth() const;
};

}  // namespace hvac::data
