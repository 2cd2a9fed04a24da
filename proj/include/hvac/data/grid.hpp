#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hvac/data/sequence.hpp"
#include "hvac/sim/types.hpp"

namespace hvac::data {

/// Inclusive, evenly spaced axis; a single-sample axis yields `start`.
struct Axis {
  double start = 0.0;
  double end = 0.0;
  int count = 1;

  [[nodiscard]] std::vector<double> values() const;
  [[nodiscard]] double at(int i) const;
};

struct GridSpec {
  Axis noise_std{0.01, 0.25, 5};
  Axis t_indoor{293.15, 303.15, 5};
  Axis vent_level{20.0, 60.0, 4};
  Axis t_heater{293.15, 340.15, 5};
  Axis t_wall{273.15, 308.15, 10};
  Axis t_out{253.15, 308.15, 30};
  int sequence_length = 300;
  int sequences_per_session = 10;
  int session_minutes = 3000;
  std::size_t subset_size = 10000;
  std::uint64_t rng_seed = 0;
  /// Controller and physics settings shared by every grid point (noise_std
  /// and rng_seed are overwritten per point).
  sim::SimConfig base{};

  /// Training grid: 3000-minute sessions cut into 10 sequences.
  static GridSpec training();
  /// Validation grid: denser axes, 1500-minute sessions cut into 5 sequences.
  static GridSpec validation();
  /// Training axes with the noise level pinned at 0.25.
  static GridSpec finetune();

  void validate() const;
  [[nodiscard]] std::uint64_t grid_size() const;
  [[nodiscard]] std::map<std::string, std::string> describe() const;
};

struct GridPoint {
  sim::SimConfig config;
  sim::SimState init;
};

/// Grid point by lexicographic index (noise outermost, t_out innermost).
GridPoint grid_point(const GridSpec& spec, std::uint64_t index);

/// Full Cartesian product in lexicographic order.
std::vector<GridPoint> sample_grid(const GridSpec& spec);

/// Cuts a session into `count` contiguous sequences of `length` minutes.
std::vector<Sequence> slice_session(const sim::SessionRecord& record, int count, int length);

/// Simulates the selected grid points and returns `subset_size` sequences
/// chosen uniformly without replacement among all (grid point, slice)
/// pairs. Only grid points that contribute a sequence are simulated.
Dataset generate_dataset(const GridSpec& spec, std::uint64_t subset_seed, int jobs = 1);

}  // namespace hvac::data
