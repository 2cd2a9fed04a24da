#include "hvac/rng.hpp"

#include <unordered_map>

#include "hvac/error.hpp"

namespace hvac {

std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k,
                                                      CounterRng& rng) {
  require(k <= n, "cannot sample " + std::to_string(k) + " of " + std::to_string(n) +
                      " items without replacement");
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto at = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::uint64_t> out;
  out.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + rng.below(n - i);
    const std::uint64_t vi = at(i);
    const std::uint64_t vj = at(j);
    out.push_back(vj);
    swapped[j] = vi;
  }
  return out;
}

}  // namespace hvac
