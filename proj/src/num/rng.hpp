#pragma once

#include <cstdint>
#include <vector>

namespace dish::num {

/// Deterministic seedable random stream (splitmix64 core, Box-Muller normals).
/// Streams are value types: copying forks the state, and derive() produces a
/// decorrelated child stream so concurrent workers never share one stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : origin_(mix(seed ^ kGamma)), state_(origin_) {}

  /// Child stream keyed by id; a pure function of the parent seed material
  /// and id, independent of how much the parent has already drawn.
  RngStream derive(std::uint64_t id) const {
    return RngStream(mix(origin_ ^ mix(id * kGamma + 0x6a09e667f3bcc909ULL)));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal();

  std::vector<double> normal_vec(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal();
    return out;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t origin_;
  std::uint64_t state_;
};

}  // namespace dish::num
