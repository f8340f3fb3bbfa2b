#include "oracle/harness.hpp"

#include <cmath>

#include "baselines/planner_adapter.hpp"
#include "planner/adapters.hpp"

namespace dish::oracle {

namespace {

std::vector<std::array<double, 2>> executed_positions(
    const loop::EpisodeResult& ep) {
  std::vector<std::array<double, 2>> out;
  for (std::size_t k = 1; k < ep.ticks.size(); ++k) out.push_back(ep.ticks[k].pos);
  return out;
}

std::vector<std::array<double, 2>> reference_positions(
    const loop::EpisodeResult& ep, std::size_t n) {
  std::vector<std::array<double, 2>> out;
  const auto& ref = ep.task_instance.reference.value().positions;
  for (std::size_t k = 1; k <= n && k < ref.size(); ++k)
    out.push_back({ref[k][0], ref[k][1]});
  return out;
}

}  // namespace

FollowEvalOutcome evaluate_follow(const policy::Policy* policy,
                                  const plan::PlannerModel& model,
                                  const env::ObservationLift& lift,
                                  const env::EnvParams& envp,
                                  const loop::TaskTemplate& task,
                                  const plan::PlanConfig& plan_cfg,
                                  int n_ticks, int replan_every,
                                  std::uint64_t seed,
                                  const std::string& model_name,
                                  double fell_threshold) {
  loop::PlannerSource source(model, lift, plan_cfg, envp.high_dt,
                             seed ^ 0x9d1aULL);
  loop::EpisodeSetup setup;
  setup.env = &envp;
  setup.lift = &lift;
  setup.task = &task;
  setup.policy = policy;
  setup.source = &source;
  setup.n_ticks = n_ticks;
  setup.replan_every = replan_every;
  setup.ref_margin_ticks = plan_cfg.k_plan + replan_every + 2;
  setup.seed = seed;
  setup.record_transitions = false;

  FollowEvalOutcome out;
  out.episode = loop::run_episode(setup);

  const auto executed = executed_positions(out.episode);
  const auto reference = reference_positions(out.episode, executed.size());
  auto planned = out.episode.planned_positions;
  if (planned.size() > executed.size()) planned.resize(executed.size());

  bool fell = false;
  for (std::size_t k = 0; k < executed.size() && k < reference.size(); ++k) {
    const double dx = executed[k][0] - reference[k][0];
    const double dy = executed[k][1] - reference[k][1];
    if (std::sqrt(dx * dx + dy * dy) > fell_threshold) fell = true;
  }

  out.row = rms_metrics(model_name, env::task_kind_name(task.kind), reference,
                        planned, executed, fell);
  return out;
}

std::vector<MetricsRow> run_ablation(const policy::Policy& policy,
                                     const AblationModels& models,
                                     const env::ObservationLift& lift,
                                     const env::EnvParams& envp,
                                     const std::vector<loop::TaskTemplate>& tasks,
                                     const plan::PlanConfig& plan_cfg,
                                     int n_ticks, int replan_every,
                                     std::uint64_t seed) {
  std::vector<MetricsRow> rows;
  std::uint64_t salt = 0;

  auto eval_model = [&](const std::string& name, const plan::PlannerModel& pm,
                        bool through_policy) {
    for (const auto& task : tasks) {
      const FollowEvalOutcome out = evaluate_follow(
          through_policy ? &policy : nullptr, pm, lift, envp, task, plan_cfg,
          n_ticks, replan_every, io::derive_seed(seed, name) + salt, name);
      rows.push_back(out.row);
      ++salt;
    }
  };

  if (models.dish != nullptr) {
    plan::LatentPlannerModel pm(*models.dish);
    eval_model("DISH", pm, true);
  }
  if (models.sas != nullptr) {
    baselines::BaselinePlannerModel pm(*models.sas);
    eval_model("sas", pm, false);
  }
  if (models.shs != nullptr) {
    baselines::BaselinePlannerModel pm(*models.shs);
    eval_model("shs", pm, true);
  }
  if (models.zaz != nullptr) {
    baselines::BaselinePlannerModel pm(*models.zaz);
    eval_model("zaz", pm, false);
  }
  return rows;
}

}  // namespace dish::oracle
