#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "env/unicycle.hpp"

namespace dish::env {

enum class TaskKind { kFollowStraight, kFollowLeft, kFollowRight, kNavigate };

bool is_follow(TaskKind k);
std::string task_kind_name(TaskKind k);
TaskKind task_kind_from_name(const std::string& name);

struct Circle {
  double cx = 0.0, cy = 0.0, radius = 0.0;
};

struct ReferenceTrajectory {
  std::vector<std::array<double, 2>> positions;  // one per high-level tick
  double tick_dt = 0.1;
};

/// Closed-form straight/arc reference anchored at a start pose; sampled at
/// tick rate for planning and evaluated densely for low-level rewards.
struct FollowReferenceSpec {
  TaskKind kind = TaskKind::kFollowStraight;
  double x0 = 0.0, y0 = 0.0, heading0 = 0.0;
  double cruise_speed = 1.2;
  double turn_rate = 0.4;  // magnitude; sign comes from the kind

  double signed_turn_rate() const;
  /// (x, y, heading) at time t.
  std::array<double, 3> pose_at(double t) const;
  ReferenceTrajectory sample(int n_ticks, double tick_dt) const;
};

struct Task {
  TaskKind kind = TaskKind::kFollowStraight;
  std::optional<ReferenceTrajectory> reference;
  std::optional<FollowReferenceSpec> reference_spec;
  std::optional<std::array<double, 2>> goal;
  std::vector<Circle> obstacles;
  std::array<double, 3> one_hot{0.0, 0.0, 0.0};
  double reach_radius = 0.5;

  void validate() const;
};

/// Follow task for the given kind with its one-hot code
/// (left = e1, straight = e2, right = e3).
Task make_follow_task(TaskKind kind, const FollowReferenceSpec& ref_spec,
                      int n_ticks, double tick_dt);

Task make_navigate_task(std::array<double, 2> goal, std::vector<Circle> obstacles,
                        double reach_radius = 0.5);

/// -|p_ref(k) - p|^2 at a high-level tick. Throws when k is out of range.
double follow_reward(const CoreState& s, const ReferenceTrajectory& ref, int k);
double follow_reward_xy(double x, double y, const ReferenceTrajectory& ref,
                        int k);

/// -|p_goal - p|^2 - 1e5 inside an obstacle, +1e4 within reach radius.
double navigate_reward(const CoreState& s, const Task& task);
double navigate_reward_xy(double x, double y, const Task& task);

bool inside_any_obstacle(double x, double y, const std::vector<Circle>& obs);

/// Weighted sum of exponentiated negative scaled squared errors:
/// sum_i w_i * exp(-e_i), with weights nonnegative and summing to one.
double imitation_reward_exp(
    const std::vector<std::pair<double, double>>& weight_and_error);

/// Dense low-level imitation reward against the analytic reference pose:
/// position, heading and speed terms combined with fixed weights.
double follow_policy_reward(const CoreState& s, const FollowReferenceSpec& ref,
                            double t);

/// Reads a reference from CSV with header k,x,y.
ReferenceTrajectory load_reference_csv(const std::string& path, double tick_dt);
void save_reference_csv(const ReferenceTrajectory& ref, const std::string& path);

}  // namespace dish::env
