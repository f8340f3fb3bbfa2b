#pragma once

#include <optional>
#include <string>
#include <vector>

#include "baselines/baseline.hpp"
#include "dish/executor.hpp"
#include "io/config.hpp"
#include "model/latent_model.hpp"
#include "oracle/metrics.hpp"
#include "policy/policy.hpp"

namespace dish::oracle {

struct FollowEvalOutcome {
  MetricsRow row;
  loop::EpisodeResult episode;
};

/// Runs one follow episode with a planner command source and scores the
/// reference / planned / executed trajectories. A run whose position error
/// ever exceeds fell_threshold metres is marked fallen (the surrogate's
/// analogue of the humanoid falling).
FollowEvalOutcome evaluate_follow(const policy::Policy* policy,
                                  const plan::PlannerModel& model,
                                  const env::ObservationLift& lift,
                                  const env::EnvParams& envp,
                                  const loop::TaskTemplate& task,
                                  const plan::PlanConfig& plan_cfg,
                                  int n_ticks, int replan_every,
                                  std::uint64_t seed,
                                  const std::string& model_name,
                                  double fell_threshold = 10.0);

struct AblationModels {
  const model::LatentModel* dish = nullptr;
  const baselines::BaselineModel* sas = nullptr;
  const baselines::BaselineModel* shs = nullptr;
  const baselines::BaselineModel* zaz = nullptr;
};

/// The full 4-model x 3-task table. DISH and shs' execute planned commands
/// through the policy; sas' and zaz' apply the planned actions directly
/// (there is no command input to the policy for them).
std::vector<MetricsRow> run_ablation(const policy::Policy& policy,
                                     const AblationModels& models,
                                     const env::ObservationLift& lift,
                                     const env::EnvParams& envp,
                                     const std::vector<loop::TaskTemplate>& tasks,
                                     const plan::PlanConfig& plan_cfg,
                                     int n_ticks, int replan_every,
                                     std::uint64_t seed);

}  // namespace dish::oracle
