#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace hvac {

/// SplitMix64 finalizer. Used both as a hash for deriving stream keys and as
/// the counter-to-output mixing function of CounterRng.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) noexcept {
  return mix64(key ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: output k is mix64(key + k * golden). Streams with
/// distinct keys are independent; `split` derives a child key. All draws are
/// computed with explicit formulas so results do not depend on the standard
/// library's distribution implementations.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  [[nodiscard]] CounterRng split(std::uint64_t tag) const noexcept {
    return CounterRng(derive_key(key_, tag));
  }

  std::uint64_t next_u64() noexcept {
    return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in (0, 1), never exactly 0 or 1.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), n > 0 (Lemire-style rejection-free for our sizes).
  std::uint64_t below(std::uint64_t n) noexcept {
    // 128-bit multiply-high; bias is < n / 2^64 which is negligible here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller; one draw per call (no cached pair, so the
  /// k-th normal always consumes counters 2k and 2k+1).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Sample k distinct indices from [0, n) in selection order (partial
/// Fisher-Yates over a virtual identity permutation).
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k,
                                                      CounterRng& rng);

}  // namespace hvac
