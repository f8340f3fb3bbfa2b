#pragma once

#include <cstdint>

#include "num/rng.hpp"

namespace dish::env {

/// Planar unicycle state with a gait phase that advances with distance
/// travelled. Angles are kept wrapped to (-pi, pi].
struct CoreState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double gait_phase = 0.0;
};

struct ActionVec {
  double accel = 0.0;      // m/s^2
  double turn_rate = 0.0;  // rad/s
};

struct EnvParams {
  double dt_low = 1.0 / 30.0;  // low-level control period
  double high_dt = 0.1;        // command / model tick period
  double v_max = 2.0;
  double a_max = 1.5;
  double omega_max = 1.2;
  double heading_noise_std = 0.05;  // rad per sqrt(s)
  double phase_rate = 6.0;          // rad of gait phase per metre travelled
  double init_speed_mean = 1.0;
  double init_speed_std = 0.1;
  double init_heading_std = 0.3;
  bool init_phase_uniform = true;
  int obs_dim = 32;
  std::uint64_t lift_seed = 20240501;
  double pos_scale = 0.08;  // lift row scale on x, y columns

  int low_steps_per_tick() const;
};

double wrap_angle(double a);

/// Initial state at the origin; heading/speed/phase drawn from the
/// configured initial distribution. Deterministic per stream state.
CoreState env_reset(const EnvParams& p, num::RngStream& rng);

/// One Euler step. Position and gait phase integrate the pre-step speed and
/// heading; heading picks up seeded process noise when rng is given.
/// Throws on non-finite action. Actions are clamped to configured bounds.
CoreState env_step(const EnvParams& p, const CoreState& s, const ActionVec& a,
                   double dt, num::RngStream* rng = nullptr);

}  // namespace dish::env
