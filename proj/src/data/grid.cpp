#include "hvac/data/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "hvac/error.hpp"
#include "hvac/parallel.hpp"
#include "hvac/rng.hpp"
#include "hvac/sim/simulator.hpp"

namespace hvac::data {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string axis_text(const Axis& a) {
  return num(a.start) + ":" + num(a.end) + ":" + std::to_string(a.count);
}

}  // namespace

std::vector<double> Axis::values() const {
  if (count < 1) throw ValidationError("axis needs at least one sample, got " + std::to_string(count));
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = at(i);
  return v;
}

double Axis::at(int i) const {
  if (count == 1) return start;
  if (i == count - 1) return end;
  return start + (end - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

GridSpec GridSpec::training() { return GridSpec{}; }

GridSpec GridSpec::validation() {
  GridSpec g;
  g.noise_std.count = 9;
  g.t_indoor.count = 8;
  g.vent_level.count = 10;
  g.t_heater.count = 8;
  g.t_wall.count = 14;
  g.t_out.count = 39;
  g.sequences_per_session = 5;
  g.session_minutes = 1500;
  g.subset_size = 9000;
  g.rng_seed = 1;
  return g;
}

GridSpec GridSpec::finetune() {
  GridSpec g;
  g.noise_std = Axis{0.25, 0.25, 1};
  g.subset_size = 5000;
  g.rng_seed = 2;
  return g;
}

void GridSpec::validate() const {
  const std::pair<const char*, const Axis*> axes[] = {
      {"noise_std", &noise_std}, {"t_indoor", &t_indoor}, {"vent_level", &vent_level},
      {"t_heater", &t_heater},   {"t_wall", &t_wall},     {"t_out", &t_out}};
  for (const auto& [name, a] : axes) {
    require(a->count >= 1, std::string("axis ") + name + ": sample_count must be >= 1");
    require(a->start <= a->end, std::string("axis ") + name + ": start > end");
  }
  require(noise_std.start >= 0.0, "noise axis must be non-negative");
  require(sequence_length >= 1 && sequences_per_session >= 1, "sequence sizes must be >= 1");
  require(session_minutes == sequences_per_session * sequence_length,
          "session_minutes must equal sequences_per_session * sequence_length");
  base.validate();
}

std::uint64_t GridSpec::grid_size() const {
  return static_cast<std::uint64_t>(noise_std.count) * t_indoor.count * vent_level.count *
         t_heater.count * t_wall.count * t_out.count;
}

std::map<std::string, std::string> GridSpec::describe() const {
  return {
      {"grid.noise_std", axis_text(noise_std)},
      {"grid.t_indoor", axis_text(t_indoor)},
      {"grid.vent_level", axis_text(vent_level)},
      {"grid.t_heater", axis_text(t_heater)},
      {"grid.t_wall", axis_text(t_wall)},
      {"grid.t_out", axis_text(t_out)},
      {"grid.size", std::to_string(grid_size())},
      {"sequence_length", std::to_string(sequence_length)},
      {"sequences_per_session", std::to_string(sequences_per_session)},
      {"session_minutes", std::to_string(session_minutes)},
      {"subset_size", std::to_string(subset_size)},
      {"grid.rng_seed", std::to_string(rng_seed)},
      {"sim.t_set", num(base.t_set)},
      {"sim.dead_t", num(base.dead_t)},
      {"sim.v_set", num(base.v_set)},
      {"sim.dead_v", num(base.dead_v)},
      {"sim.constant_weather", base.constant_weather ? "1" : "0"},
  };
}

GridPoint grid_point(const GridSpec& spec, std::uint64_t index) {
  require(index < spec.grid_size(), "grid index out of range");
  // Mixed-radix decode, t_out varying fastest.
  std::uint64_t rem = index;
  auto take = [&rem](const Axis& a) {
    const int i = static_cast<int>(rem % static_cast<std::uint64_t>(a.count));
    rem /= static_cast<std::uint64_t>(a.count);
    return a.at(i);
  };
  GridPoint p;
  p.init.t_out = take(spec.t_out);
  p.init.t_wall = take(spec.t_wall);
  p.init.t_heater = take(spec.t_heater);
  p.init.vent_level = take(spec.vent_level);
  p.init.t_true = take(spec.t_indoor);
  p.init.t_ac = sim::kAcTemperature;
  p.config = spec.base;
  p.config.noise_std = take(spec.noise_std);
  p.config.rng_seed = derive_key(spec.rng_seed, index);
  return p;
}

std::vector<GridPoint> sample_grid(const GridSpec& spec) {
  spec.validate();
  const std::uint64_t n = spec.grid_size();
  std::vector<GridPoint> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(grid_point(spec, i));
  return out;
}

std::vector<Sequence> slice_session(const sim::SessionRecord& record, int count, int length) {
  require(static_cast<std::size_t>(count) * length <= record.size(),
          "session too short to slice");
  const Sequence whole = from_record(record);
  std::vector<Sequence> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    out.push_back(whole.slice(static_cast<std::size_t>(k) * length, length));
  }
  return out;
}

Dataset generate_dataset(const GridSpec& spec, std::uint64_t subset_seed, int jobs) {
  spec.validate();
  const std::uint64_t total = spec.grid_size() * spec.sequences_per_session;
  require(spec.subset_size <= total,
          "subset_size " + std::to_string(spec.subset_size) + " exceeds the " +
              std::to_string(total) + " available sequences");

  CounterRng pick(subset_seed);
  const auto chosen = sample_without_replacement(total, spec.subset_size, pick);

  // Group output slots by grid point; each contributing point is simulated once.
  std::map<std::uint64_t, std::vector<std::pair<std::size_t, int>>> by_point;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    by_point[chosen[i] / spec.sequences_per_session].emplace_back(
        i, static_cast<int>(chosen[i] % spec.sequences_per_session));
  }
  std::vector<const decltype(by_point)::value_type*> work;
  work.reserve(by_point.size());
  for (const auto& entry : by_point) work.push_back(&entry);

  Dataset ds;
  ds.sequences.resize(chosen.size());
  parallel_for(work.size(), jobs, [&](std::size_t k) {
    const auto& [point, slots] = *work[k];
    const GridPoint gp = grid_point(spec, point);
    const Sequence whole = from_record(sim::run_session(gp.config, gp.init, spec.session_minutes));
    for (const auto& [out_index, slot] : slots) {
      Sequence s = whole.slice(static_cast<std::size_t>(slot) * spec.sequence_length,
                               static_cast<std::size_t>(spec.sequence_length));
      s.id = static_cast<std::int64_t>(out_index);
      ds.sequences[out_index] = std::move(s);
    }
  });
  ds.meta = spec.describe();
  ds.meta["subset_seed"] = std::to_string(subset_seed);
  ds.meta["n_sequences"] = std::to_string(ds.sequences.size());
  return ds;
}

}  // namespace hvac::data
