#pragma once

#include <span>

#include "num/gaussian.hpp"

namespace dish::plan {

/// What the particle planner needs from an internal model. The DISH latent
/// model, the ablation baselines and analytic test systems all plan through
/// this surface; they differ only in the dimension of the searched command.
///
/// Implementations must be safe to call concurrently (const methods, no
/// shared mutable state beyond thread-local scratch).
class PlannerModel {
 public:
  virtual ~PlannerModel() = default;

  virtual int latent_dim() const = 0;
  virtual int command_dim() const = 0;
  virtual int obs_dim() const = 0;

  /// Gaussian over the initial latent given the stacked window of recent
  /// observations (oldest first, zero-padded at episode start).
  virtual num::DiagGaussian infer_initial(
      std::span<const double> window) const = 0;

  /// One latent transition under the effective command eff = h + u + w.
  virtual void step(std::span<const double> z, std::span<const double> eff,
                    std::span<double> z_next) const = 0;

  /// Observation distribution decoded from a latent.
  virtual num::DiagGaussian decode(std::span<const double> z) const = 0;
};

/// Per-step planning reward over decoded observations. Implementations may
/// carry per-particle auxiliary state (e.g. integrated positions); the
/// planner moves it through resampling along with the particle.
class PlanRewardFn {
 public:
  virtual ~PlanRewardFn() = default;

  virtual int aux_dim() const { return 0; }
  virtual void init_aux(std::span<double> /*aux*/) const {}

  /// Reward of decoded observation s at planning tick k (1-based); may
  /// update aux in place.
  virtual double operator()(std::span<const double> s, int k,
                            std::span<double> aux) const = 0;
};

}  // namespace dish::plan
