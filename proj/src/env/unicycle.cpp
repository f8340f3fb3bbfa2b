#include "env/unicycle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dish::env {

int EnvParams::low_steps_per_tick() const {
  return static_cast<int>(std::lround(high_dt / dt_low));
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

CoreState env_reset(const EnvParams& p, num::RngStream& rng) {
  CoreState s;
  s.heading = wrap_angle(p.init_heading_std * rng.normal());
  s.speed = std::clamp(p.init_speed_mean + p.init_speed_std * rng.normal(),
                       0.0, p.v_max);
  if (p.init_phase_uniform)
    s.gait_phase = wrap_angle((rng.uniform() * 2.0 - 1.0) * std::numbers::pi);
  return s;
}

CoreState env_step(const EnvParams& p, const CoreState& s, const ActionVec& a,
                   double dt, num::RngStream* rng) {
  if (!std::isfinite(a.accel) || !std::isfinite(a.turn_rate))
    throw std::invalid_argument("env_step: non-finite action");
  if (dt <= 0.0) throw std::invalid_argument("env_step: dt must be positive");

  const double accel = std::clamp(a.accel, -p.a_max, p.a_max);
  const double omega = std::clamp(a.turn_rate, -p.omega_max, p.omega_max);

  CoreState n = s;
  n.x += s.speed * std::cos(s.heading) * dt;
  n.y += s.speed * std::sin(s.heading) * dt;
  n.gait_phase = wrap_angle(s.gait_phase + p.phase_rate * s.speed * dt);
  double heading = s.heading + omega * dt;
  if (rng != nullptr && p.heading_noise_std > 0.0)
    heading += p.heading_noise_std * std::sqrt(dt) * rng->normal();
  n.heading = wrap_angle(heading);
  n.speed = std::clamp(s.speed + accel * dt, 0.0, p.v_max);
  return n;
}

}  // namespace dish::env
