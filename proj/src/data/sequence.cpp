#include "hvac/data/sequence.hpp"

#include "hvac/error.hpp"

namespace hvac::data {

Sequence Sequence::slice(std::size_t begin, std::size_t length) const {
  require(begin + length <= size(), "slice out of range");
  auto cut = [&](const auto& v) {
    using V = std::decay_t<decltype(v)>;
    return v.empty() ? V{} : V(v.begin() + begin, v.begin() + begin + length);
  };
  Sequence s;
  s.id = id;
  s.t_obs = cut(t_obs);
  s.t_true = cut(t_true);
  s.t_out = cut(t_out);
  s.control = cut(control);
  s.noise_std = noise_std;
  return s;
}

void Sequence::validate() const {
  const std::size_t n = t_obs.size();
  require(t_out.size() == n && control.size() == n && (t_true.empty() || t_true.size() == n),
          "sequence " + std::to_string(id) + ": per-minute arrays differ in length");
}

Sequence from_record(const sim::SessionRecord& record, std::int64_t id) {
  Sequence s;
  s.id = id;
  s.t_obs = record.t_obs;
  s.t_true = record.t_true;
  s.t_out = record.t_out;
  s.control = record.control;
  s.noise_std = record.noise_std;
  return s;
}

std::size_t Dataset::sequence_length() const {
  require(!sequences.empty(), "dataset is empty");
  const std::size_t n = sequences.front().size();
  for (const auto& s : sequences) {
    require(s.size() == n, "dataset sequences differ in length (" + std::to_string(n) +
                               " vs " + std::to_string(s.size()) + ")");
  }
  return n;
}

bool Dataset::has_truth() const {
  if (sequences.empty()) return false;
  for (const auto& s : sequences) {
    if (!s.has_truth()) return false;
  }
  return true;
}

}  // namespace hvac::data
