#include "dish/executor.hpp"

#include <cmath>
#include <stdexcept>

namespace dish::loop {

double bootstrap_command(const env::Task& task) {
  if (task.kind == env::TaskKind::kNavigate)
    throw std::runtime_error(
        "bootstrap_command: navigation has no bootstrap source; an internal "
        "model must be trained first");
  const std::array<double, 3> w{-1.0, 0.0, 1.0};
  double h = 0.0;
  for (int i = 0; i < 3; ++i) h += w[i] * task.one_hot[i];
  return h;
}

int TaskTemplate::task_index() const {
  switch (kind) {
    case env::TaskKind::kFollowLeft: return 0;
    case env::TaskKind::kFollowStraight: return 1;
    case env::TaskKind::kFollowRight: return 2;
    case env::TaskKind::kNavigate: return 1;  // value nets see follow tasks only
  }
  return 1;
}

env::Task TaskTemplate::instantiate(const env::CoreState& start, int n_ticks,
                                    double tick_dt) const {
  if (kind == env::TaskKind::kNavigate)
    return env::make_navigate_task(goal, obstacles, reach_radius);
  env::FollowReferenceSpec spec;
  spec.kind = kind;
  spec.x0 = start.x;
  spec.y0 = start.y;
  spec.heading0 = start.heading;
  spec.cruise_speed = cruise_speed;
  spec.turn_rate = turn_rate;
  return env::make_follow_task(kind, spec, n_ticks, tick_dt);
}

std::vector<TaskTemplate> default_follow_templates(double cruise_speed,
                                                   double turn_rate) {
  std::vector<TaskTemplate> out(3);
  out[0].kind = env::TaskKind::kFollowLeft;
  out[1].kind = env::TaskKind::kFollowStraight;
  out[2].kind = env::TaskKind::kFollowRight;
  for (auto& t : out) {
    t.cruise_speed = cruise_speed;
    t.turn_rate = turn_rate;
  }
  return out;
}

std::vector<double> PlannerSource::command(const CommandContext& ctx) {
  std::unique_ptr<plan::PlanRewardFn> reward;
  if (ctx.task->kind == env::TaskKind::kNavigate) {
    reward = std::make_unique<plan::NavigatePlanReward>(
        *lift_, ctx.state->x, ctx.state->y, tick_dt_, *ctx.task);
  } else {
    reward = std::make_unique<plan::FollowPlanReward>(
        *lift_, ctx.state->x, ctx.state->y, tick_dt_,
        ctx.task->reference.value(), ctx.tick);
  }
  const num::RngStream plan_rng =
      num::RngStream(seed_).derive(++call_count_);
  const plan::PlanResult res =
      plan::plan(*model_, ctx.window, *reward, cfg_, plan_rng);
  if (ctx.planned_out != nullptr) {
    const int take = std::min<int>(ctx.planned_take,
                                   static_cast<int>(res.predicted_aux_mean.size()));
    for (int k = 0; k < take; ++k)
      ctx.planned_out->push_back(
          {res.predicted_aux_mean[k][0], res.predicted_aux_mean[k][1]});
  }
  return res.h_star;
}

namespace {

/// Keeps the last W observations; flatten() zero-pads at episode start,
/// oldest first.
class WindowBuffer {
 public:
  WindowBuffer(int w, int d) : w_(w), d_(d), flat_(static_cast<std::size_t>(w) * d, 0.0) {}

  void push(const std::vector<double>& obs) {
    std::copy(flat_.begin() + d_, flat_.end(), flat_.begin());
    std::copy(obs.begin(), obs.end(), flat_.end() - d_);
  }

  std::span<const double> flat() const { return flat_; }

 private:
  int w_, d_;
  std::vector<double> flat_;
};

}  // namespace

EpisodeResult run_episode(const EpisodeSetup& setup) {
  const env::EnvParams& ep = *setup.env;
  const env::ObservationLift& lift = *setup.lift;
  const int steps_per_tick = ep.low_steps_per_tick();
  const int D = lift.obs_dim();

  num::RngStream root(setup.seed);
  num::RngStream reset_rng = root.derive(0);
  num::RngStream noise_rng = root.derive(1);
  num::RngStream policy_rng = root.derive(2);
  num::RngStream command_rng = root.derive(3);

  EpisodeResult out;
  env::CoreState state = env_reset(ep, reset_rng);
  // Follow references extend past the episode so the planner's horizon
  // always stays in range.
  out.task_instance = setup.task->instantiate(
      state, setup.n_ticks + 1 + setup.ref_margin_ticks, ep.high_dt);
  const env::Task& task = out.task_instance;
  const bool navigate = task.kind == env::TaskKind::kNavigate;
  const int task_idx = setup.task->task_index();

  WindowBuffer window(setup.window, D);
  std::vector<double> obs;
  lift.observe_into(state, obs);
  window.push(obs);

  TickLog first;
  first.pos = {state.x, state.y};
  first.heading = state.heading;
  first.speed = state.speed;
  first.gait_phase = state.gait_phase;
  first.obs = obs;
  out.ticks.push_back(std::move(first));

  std::vector<double> h;
  double reward_sum = 0.0;
  std::size_t reward_count = 0;
  bool done_early = false;

  for (int tick = 0; tick < setup.n_ticks && !done_early; ++tick) {
    if (tick % setup.replan_every == 0) {
      CommandContext ctx;
      ctx.state = &state;
      ctx.window = window.flat();
      ctx.tick = tick;
      ctx.task = &task;
      ctx.rng = &command_rng;
      ctx.planned_out = &out.planned_positions;
      ctx.planned_take = setup.replan_every;
      h = setup.source->command(ctx);
    }

    std::vector<double> a_first;
    for (int j = 0; j < steps_per_tick; ++j) {
      std::vector<double> a;
      double log_prob = 0.0;
      if (setup.policy != nullptr) {
        const auto s = setup.policy->sample(obs, h, policy_rng);
        a = s.action;
        log_prob = s.log_prob;
      } else {
        a = h;  // command is a direct (normalized) action
      }
      if (j == 0) a_first = a;

      env::ActionVec act;
      act.accel = a.size() > 0 ? a[0] * ep.a_max : 0.0;
      act.turn_rate = a.size() > 1 ? a[1] * ep.omega_max : 0.0;
      const env::CoreState next = env_step(ep, state, act, ep.dt_low, &noise_rng);

      const double t_next = (tick * steps_per_tick + j + 1) * ep.dt_low;
      double reward = 0.0;
      if (!navigate && task.reference_spec.has_value())
        reward = env::follow_policy_reward(next, task.reference_spec.value(),
                                           t_next);
      reward_sum += reward;
      ++reward_count;

      const bool crash =
          navigate && env::inside_any_obstacle(next.x, next.y, task.obstacles);
      const bool last_low =
          (tick + 1 == setup.n_ticks && j + 1 == steps_per_tick);

      if (setup.record_transitions && setup.policy != nullptr) {
        policy::TransitionRecord rec;
        rec.s = obs;
        rec.a = a;
        rec.h = h;
        rec.reward = reward;
        rec.log_prob = log_prob;
        rec.task_idx = task_idx;
        rec.low_tick = tick * steps_per_tick + j;
        rec.high_tick = tick;
        rec.iteration = setup.iteration;
        rec.command_source = setup.source->name();
        rec.done = last_low || (crash && setup.stop_on_crash);
        out.records.push_back(std::move(rec));
      }

      state = next;
      lift.observe_into(state, obs);

      if (crash) {
        out.crashed = true;
        out.crash_tick = tick;
        if (setup.stop_on_crash) {
          done_early = true;
          break;
        }
      }
    }

    TickLog tl;
    tl.pos = {state.x, state.y};
    tl.heading = state.heading;
    tl.speed = state.speed;
    tl.gait_phase = state.gait_phase;
    tl.ang_vel = env::wrap_angle(state.heading - out.ticks.back().heading) /
                 ep.high_dt;
    tl.obs = obs;
    tl.h = h;
    tl.a_first = a_first;
    out.ticks.push_back(std::move(tl));
    window.push(obs);

    if (navigate && !out.reached) {
      const double dx = task.goal.value()[0] - state.x;
      const double dy = task.goal.value()[1] - state.y;
      if (dx * dx + dy * dy <= task.reach_radius * task.reach_radius) {
        out.reached = true;
        out.reach_tick = tick + 1;
        if (setup.stop_on_reach) done_early = true;
      }
    }
  }

  out.mean_env_reward =
      reward_count > 0 ? reward_sum / static_cast<double>(reward_count) : 0.0;
  return out;
}

}  // namespace dish::loop
