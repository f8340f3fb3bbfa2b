#pragma once

#include <array>
#include <span>
#include <vector>

#include "env/unicycle.hpp"

namespace dish::env {

/// Observation produced by the random sinusoidal lift; entries in [-1, 1].
struct Observation {
  std::vector<double> features;
};

/// Fixed random lift from the core state to a D-dimensional feature vector:
/// features = [sin(P c + b); cos(P c + b)] with c the core state expanded to
/// (x, y, sin h, cos h, v, sin phi, cos phi). Rows of P are sparse pairs of
/// columns so that each state component leaves a recoverable imprint; a
/// ridge readout fitted once per lift recovers heading and speed from
/// features, which planning uses to integrate predicted motion.
class ObservationLift {
 public:
  static constexpr int kCoreDim = 7;

  ObservationLift(int obs_dim, std::uint64_t lift_seed, double pos_scale,
                  double v_max);

  int obs_dim() const { return 2 * static_cast<int>(rows_.size()); }

  Observation observe(const CoreState& s) const;
  void observe_into(const CoreState& s, std::vector<double>& out) const;

  /// (sin heading, cos heading, speed) estimated from a feature vector.
  std::array<double, 3> read_motion_raw(std::span<const double> f) const;

  /// Heading (normalized via atan2) and speed (clamped to [0, v_max]).
  std::array<double, 2> read_heading_speed(std::span<const double> f) const;

 private:
  struct Row {
    std::array<int, 2> cols;
    std::array<double, 2> weights;
    double phase;
  };

  static std::array<double, kCoreDim> expand(const CoreState& s);

  void fit_readout(std::uint64_t seed);

  std::vector<Row> rows_;
  double v_max_;
  // readout_[t] = (D+1) affine coefficients for target t in
  // {sin heading, cos heading, speed}.
  std::array<std::vector<double>, 3> readout_;
};

}  // namespace dish::env
