#pragma once

#include <string>
#include <vector>

#include "dish/dataset.hpp"
#include "dish/executor.hpp"
#include "io/config.hpp"
#include "model/latent_model.hpp"
#include "oracle/metrics.hpp"
#include "policy/policy.hpp"

namespace dish::loop {

/// Runs episodes for one task with the given command source and collects
/// the transition records (one shard).
std::vector<EpisodeResult> collect_policy_rollouts(
    const io::ExperimentConfig& cfg, const env::ObservationLift& lift,
    const policy::Policy& policy, CommandSource& source,
    const TaskTemplate& task, int n_episodes, int replan_every, int iteration,
    std::uint64_t seed);

/// Random-command rollouts for internal-model learning: h ~ N(0, 1)
/// refreshed every high-level tick. Throws unless the policy has been
/// trained at least once (policy_trained).
std::vector<EpisodeResult> collect_random_command_rollouts(
    const io::ExperimentConfig& cfg, const env::ObservationLift& lift,
    const policy::Policy& policy, bool policy_trained, int n_episodes,
    int iteration, std::uint64_t seed);

struct DishRunResult {
  std::string run_dir;
  // One eval block per outer iteration (DISH after l=1, DISH+ after l=2).
  std::vector<std::vector<oracle::MetricsRow>> iteration_eval;
  double final_holdout_elbo = 0.0;
};

/// Algorithm "DIStilling Hierarchy for Planning and Control": alternates a
/// fixed-budget policy-update inner loop with internal-model learning,
/// switching the command source from the bootstrap to the planner after the
/// first outer iteration. Writes config.json, per-iteration checkpoints,
/// metrics and rollout CSVs, and a final report under cfg.out_dir.
DishRunResult run_dish(const io::ExperimentConfig& cfg, policy::Policy& policy,
                       model::LatentModel& model);

}  // namespace dish::loop
