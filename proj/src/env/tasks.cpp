#include "env/tasks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dish::env {

bool is_follow(TaskKind k) { return k != TaskKind::kNavigate; }

std::string task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::kFollowStraight: return "follow_straight";
    case TaskKind::kFollowLeft: return "follow_left";
    case TaskKind::kFollowRight: return "follow_right";
    case TaskKind::kNavigate: return "navigate";
  }
  return "?";
}

TaskKind task_kind_from_name(const std::string& name) {
  if (name == "follow_straight") return TaskKind::kFollowStraight;
  if (name == "follow_left") return TaskKind::kFollowLeft;
  if (name == "follow_right") return TaskKind::kFollowRight;
  if (name == "navigate") return TaskKind::kNavigate;
  throw std::invalid_argument("unknown task kind '" + name + "'");
}

double FollowReferenceSpec::signed_turn_rate() const {
  switch (kind) {
    case TaskKind::kFollowLeft: return turn_rate;    // counter-clockwise
    case TaskKind::kFollowRight: return -turn_rate;
    default: return 0.0;
  }
}

std::array<double, 3> FollowReferenceSpec::pose_at(double t) const {
  const double w = signed_turn_rate();
  if (std::abs(w) < 1e-12) {
    return {x0 + cruise_speed * t * std::cos(heading0),
            y0 + cruise_speed * t * std::sin(heading0), heading0};
  }
  const double r = cruise_speed / w;
  const double cx = x0 - r * std::sin(heading0);
  const double cy = y0 + r * std::cos(heading0);
  const double h = heading0 + w * t;
  return {cx + r * std::sin(h), cy - r * std::cos(h), wrap_angle(h)};
}

ReferenceTrajectory FollowReferenceSpec::sample(int n_ticks,
                                                double tick_dt) const {
  ReferenceTrajectory ref;
  ref.tick_dt = tick_dt;
  ref.positions.reserve(n_ticks);
  for (int k = 0; k < n_ticks; ++k) {
    const auto p = pose_at(k * tick_dt);
    ref.positions.push_back({p[0], p[1]});
  }
  return ref;
}

void Task::validate() const {
  if (is_follow(kind)) {
    if (!reference.has_value())
      throw std::invalid_argument("follow task requires a reference");
    int hot = 0;
    for (double v : one_hot) {
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("one_hot entries must be 0 or 1");
      if (v == 1.0) ++hot;
    }
    if (hot != 1) throw std::invalid_argument("one_hot must be a unit basis vector");
  } else {
    if (!goal.has_value())
      throw std::invalid_argument("navigate task requires a goal");
  }
}

Task make_follow_task(TaskKind kind, const FollowReferenceSpec& ref_spec,
                      int n_ticks, double tick_dt) {
  if (!is_follow(kind))
    throw std::invalid_argument("make_follow_task: not a follow kind");
  Task t;
  t.kind = kind;
  FollowReferenceSpec spec = ref_spec;
  spec.kind = kind;
  t.reference_spec = spec;
  t.reference = spec.sample(n_ticks, tick_dt);
  switch (kind) {
    case TaskKind::kFollowLeft: t.one_hot = {1.0, 0.0, 0.0}; break;
    case TaskKind::kFollowStraight: t.one_hot = {0.0, 1.0, 0.0}; break;
    case TaskKind::kFollowRight: t.one_hot = {0.0, 0.0, 1.0}; break;
    default: break;
  }
  t.validate();
  return t;
}

Task make_navigate_task(std::array<double, 2> goal, std::vector<Circle> obstacles,
                        double reach_radius) {
  Task t;
  t.kind = TaskKind::kNavigate;
  t.goal = goal;
  t.obstacles = std::move(obstacles);
  t.reach_radius = reach_radius;
  t.validate();
  return t;
}

double follow_reward_xy(double x, double y, const ReferenceTrajectory& ref,
                        int k) {
  if (k < 0 || k >= static_cast<int>(ref.positions.size()))
    throw std::out_of_range("follow_reward: tick " + std::to_string(k) +
                            " outside reference of length " +
                            std::to_string(ref.positions.size()));
  const double dx = ref.positions[k][0] - x;
  const double dy = ref.positions[k][1] - y;
  return -(dx * dx + dy * dy);
}

double follow_reward(const CoreState& s, const ReferenceTrajectory& ref, int k) {
  return follow_reward_xy(s.x, s.y, ref, k);
}

bool inside_any_obstacle(double x, double y, const std::vector<Circle>& obs) {
  for (const auto& c : obs) {
    const double dx = x - c.cx, dy = y - c.cy;
    if (dx * dx + dy * dy <= c.radius * c.radius) return true;
  }
  return false;
}

double navigate_reward_xy(double x, double y, const Task& task) {
  if (task.kind != TaskKind::kNavigate)
    throw std::invalid_argument("navigate_reward: task is not navigate");
  const double dx = task.goal.value()[0] - x;
  const double dy = task.goal.value()[1] - y;
  const double d2 = dx * dx + dy * dy;
  double r = -d2;
  if (inside_any_obstacle(x, y, task.obstacles)) r -= 1e5;
  if (d2 <= task.reach_radius * task.reach_radius) r += 1e4;
  return r;
}

double navigate_reward(const CoreState& s, const Task& task) {
  return navigate_reward_xy(s.x, s.y, task);
}

double imitation_reward_exp(
    const std::vector<std::pair<double, double>>& weight_and_error) {
  double wsum = 0.0, r = 0.0;
  for (const auto& [w, e] : weight_and_error) {
    if (w < 0.0) throw std::invalid_argument("imitation_reward: negative weight");
    if (e < 0.0)
      throw std::invalid_argument("imitation_reward: negative squared error");
    wsum += w;
    r += w * std::exp(-e);
  }
  if (std::abs(wsum - 1.0) > 1e-6)
    throw std::invalid_argument("imitation_reward: weights must sum to 1");
  return r;
}

double follow_policy_reward(const CoreState& s, const FollowReferenceSpec& ref,
                            double t) {
  const auto pose = ref.pose_at(t);
  const double dx = s.x - pose[0], dy = s.y - pose[1];
  const double e_pos = 2.0 * (dx * dx + dy * dy);
  const double dh = wrap_angle(s.heading - pose[2]);
  const double e_head = 2.0 * dh * dh;
  const double dv = s.speed - ref.cruise_speed;
  const double e_speed = 1.0 * dv * dv;
  return imitation_reward_exp({{0.5, e_pos}, {0.3, e_head}, {0.2, e_speed}});
}

ReferenceTrajectory load_reference_csv(const std::string& path, double tick_dt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference CSV: " + path);
  ReferenceTrajectory ref;
  ref.tick_dt = tick_dt;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find("k") != std::string::npos) continue;  // skip header row
    }
    std::stringstream ss(line);
    std::string cell;
    std::array<double, 3> vals{};
    for (int i = 0; i < 3 && std::getline(ss, cell, ','); ++i)
      vals[i] = std::stod(cell);
    ref.positions.push_back({vals[1], vals[2]});
  }
  if (ref.positions.empty())
    throw std::runtime_error("reference CSV has no rows: " + path);
  return ref;
}

void save_reference_csv(const ReferenceTrajectory& ref, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write reference CSV: " + path);
  out << "k,x,y\n";
  for (std::size_t k = 0; k < ref.positions.size(); ++k)
    out << k << ',' << ref.positions[k][0] << ',' << ref.positions[k][1] << '\n';
}

}  // namespace dish::env
