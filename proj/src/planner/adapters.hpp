#pragma once

#include <cmath>
#include <functional>

#include "env/lift.hpp"
#include "env/tasks.hpp"
#include "model/latent_model.hpp"
#include "planner/model_iface.hpp"

namespace dish::plan {

/// Plans through the DISH latent model.
class LatentPlannerModel final : public PlannerModel {
 public:
  explicit LatentPlannerModel(const model::LatentModel& m) : m_(&m) {}

  int latent_dim() const override { return m_->config().d_z; }
  int command_dim() const override { return m_->config().d_h; }
  int obs_dim() const override { return m_->config().obs_dim; }

  num::DiagGaussian infer_initial(std::span<const double> window) const override {
    return m_->infer_initial(window);
  }
  void step(std::span<const double> z, std::span<const double> eff,
            std::span<double> z_next) const override {
    thread_local num::MlpWorkspace ws;
    m_->step_effective(z, eff, z_next, ws);
  }
  num::DiagGaussian decode(std::span<const double> z) const override {
    return m_->decode(z);
  }

 private:
  const model::LatentModel* m_;
};

/// Stateless reward from a plain function of (decoded observation, tick).
class FunctionPlanReward final : public PlanRewardFn {
 public:
  using Fn = std::function<double(std::span<const double>, int)>;
  explicit FunctionPlanReward(Fn fn) : fn_(std::move(fn)) {}
  double operator()(std::span<const double> s, int k,
                    std::span<double>) const override {
    return fn_(s, k);
  }

 private:
  Fn fn_;
};

/// Integrates a per-particle world position from the heading/speed readout
/// of decoded observations; task rewards act on the integrated position.
/// aux = (x, y), initialized from the agent's current pose.
class PositionIntegratingReward : public PlanRewardFn {
 public:
  PositionIntegratingReward(const env::ObservationLift& lift, double x0,
                            double y0, double tick_dt)
      : lift_(&lift), x0_(x0), y0_(y0), tick_dt_(tick_dt) {}

  int aux_dim() const override { return 2; }
  void init_aux(std::span<double> aux) const override {
    aux[0] = x0_;
    aux[1] = y0_;
  }
  double operator()(std::span<const double> s, int k,
                    std::span<double> aux) const override {
    const auto hs = lift_->read_heading_speed(s);
    aux[0] += tick_dt_ * hs[1] * std::cos(hs[0]);
    aux[1] += tick_dt_ * hs[1] * std::sin(hs[0]);
    return reward_xy(aux[0], aux[1], k);
  }

  virtual double reward_xy(double x, double y, int k) const = 0;

 private:
  const env::ObservationLift* lift_;
  double x0_, y0_, tick_dt_;
};

/// Reference-following: tick k of the plan scores against reference index
/// current_tick + k.
class FollowPlanReward final : public PositionIntegratingReward {
 public:
  FollowPlanReward(const env::ObservationLift& lift, double x0, double y0,
                   double tick_dt, const env::ReferenceTrajectory& ref,
                   int current_tick)
      : PositionIntegratingReward(lift, x0, y0, tick_dt),
        ref_(&ref),
        current_tick_(current_tick) {}

  double reward_xy(double x, double y, int k) const override {
    return env::follow_reward_xy(x, y, *ref_, current_tick_ + k);
  }

 private:
  const env::ReferenceTrajectory* ref_;
  int current_tick_;
};

class NavigatePlanReward final : public PositionIntegratingReward {
 public:
  NavigatePlanReward(const env::ObservationLift& lift, double x0, double y0,
                     double tick_dt, const env::Task& task)
      : PositionIntegratingReward(lift, x0, y0, tick_dt), task_(&task) {}

  double reward_xy(double x, double y, int) const override {
    return env::navigate_reward_xy(x, y, *task_);
  }

 private:
  const env::Task* task_;
};

}  // namespace dish::plan
