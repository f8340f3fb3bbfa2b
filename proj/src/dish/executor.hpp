#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "env/lift.hpp"
#include "env/tasks.hpp"
#include "env/unicycle.hpp"
#include "planner/adapters.hpp"
#include "planner/particle_plan.hpp"
#include "policy/policy.hpp"
#include "policy/ppo.hpp"

namespace dish::loop {

/// h = w . t with w = (-1, 0, 1): left -> -1, straight -> 0, right -> +1.
/// Throws for navigation tasks (no bootstrap exists before a model does).
double bootstrap_command(const env::Task& task);

struct TaskTemplate {
  env::TaskKind kind = env::TaskKind::kFollowStraight;
  double cruise_speed = 1.2;
  double turn_rate = 0.4;
  std::array<double, 2> goal{0.0, 0.0};
  std::vector<env::Circle> obstacles;
  double reach_radius = 0.5;

  /// Value-net index for follow tasks: left 0, straight 1, right 2.
  int task_index() const;
  /// Episode task anchored at the start pose; follow references are sampled
  /// n_ticks long (size for the episode plus the planning horizon).
  env::Task instantiate(const env::CoreState& start, int n_ticks,
                        double tick_dt) const;
};

std::vector<TaskTemplate> default_follow_templates(double cruise_speed,
                                                   double turn_rate);

struct CommandContext {
  const env::CoreState* state = nullptr;
  std::span<const double> window;  // stacked last-W observations
  int tick = 0;
  const env::Task* task = nullptr;
  num::RngStream* rng = nullptr;
  std::vector<std::array<double, 2>>* planned_out = nullptr;
  int planned_take = 0;
};

class CommandSource {
 public:
  virtual ~CommandSource() = default;
  virtual std::vector<double> command(const CommandContext& ctx) = 0;
  virtual std::string name() const = 0;
};

class BootstrapSource final : public CommandSource {
 public:
  std::vector<double> command(const CommandContext& ctx) override {
    return {bootstrap_command(*ctx.task)};
  }
  std::string name() const override { return "bootstrap"; }
};

class RandomSource final : public CommandSource {
 public:
  explicit RandomSource(int d_h, double std = 1.0) : d_h_(d_h), std_(std) {}
  std::vector<double> command(const CommandContext& ctx) override {
    std::vector<double> h(d_h_);
    for (auto& v : h) v = std_ * ctx.rng->normal();
    return h;
  }
  std::string name() const override { return "random"; }

 private:
  int d_h_;
  double std_;
};

class FixedSource final : public CommandSource {
 public:
  explicit FixedSource(std::vector<double> h) : h_(std::move(h)) {}
  std::vector<double> command(const CommandContext&) override { return h_; }
  std::string name() const override { return "fixed"; }

 private:
  std::vector<double> h_;
};

/// Plans a command with the particle planner on every call; records the
/// first planned_take predicted positions when a sink is given.
class PlannerSource final : public CommandSource {
 public:
  PlannerSource(const plan::PlannerModel& model, const env::ObservationLift& lift,
                plan::PlanConfig cfg, double tick_dt, std::uint64_t seed)
      : model_(&model), lift_(&lift), cfg_(cfg), tick_dt_(tick_dt), seed_(seed) {}

  std::vector<double> command(const CommandContext& ctx) override;
  std::string name() const override { return "planner"; }

 private:
  const plan::PlannerModel* model_;
  const env::ObservationLift* lift_;
  plan::PlanConfig cfg_;
  double tick_dt_;
  std::uint64_t seed_;
  std::uint64_t call_count_ = 0;
};

struct TickLog {
  std::array<double, 2> pos{0.0, 0.0};
  double heading = 0.0;
  double speed = 0.0;
  double gait_phase = 0.0;
  double ang_vel = 0.0;  // realized turn rate over the last tick
  std::vector<double> obs;
  std::vector<double> h;        // command applied from this tick on
  std::vector<double> a_first;  // first low-level action of the tick
};

struct EpisodeSetup {
  const env::EnvParams* env = nullptr;
  const env::ObservationLift* lift = nullptr;
  const TaskTemplate* task = nullptr;
  const policy::Policy* policy = nullptr;  // nullptr: commands are actions
  CommandSource* source = nullptr;
  int n_ticks = 100;
  int replan_every = 10;
  int ref_margin_ticks = 60;  // reference slack past the episode for planning
  std::uint64_t seed = 0;
  int iteration = 0;
  bool record_transitions = true;
  bool stop_on_crash = true;
  bool stop_on_reach = true;
  int window = 3;
};

struct EpisodeResult {
  std::vector<policy::TransitionRecord> records;
  std::vector<TickLog> ticks;  // index 0 is the initial state
  env::Task task_instance;
  bool crashed = false;
  int crash_tick = -1;
  bool reached = false;
  int reach_tick = -1;
  std::vector<std::array<double, 2>> planned_positions;  // planner sources
  double mean_env_reward = 0.0;
};

EpisodeResult run_episode(const EpisodeSetup& setup);

}  // namespace dish::loop
