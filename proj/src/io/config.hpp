#pragma once

#include <cstdint>
#include <string>

#include "env/unicycle.hpp"
#include "model/latent_model.hpp"
#include "model/train_model.hpp"
#include "planner/particle_plan.hpp"
#include "policy/policy.hpp"
#include "policy/ppo.hpp"

namespace dish::io {

struct TaskSetConfig {
  double cruise_speed = 1.2;
  double turn_rate = 0.4;
  double episode_seconds = 10.0;
  double reach_radius = 0.5;
};

struct DishLoopConfig {
  int outer_iters = 2;  // L
  int updates_per_iter = 60;
  int episodes_per_update = 8;
  int model_rollout_episodes = 48;
  int window_stride = 5;          // model windows per episode stride (ticks)
  int replan_ticks_follow = 10;   // 1 Hz at 0.1 s ticks
  int replan_ticks_navigate = 3;  // ~3.3 Hz, nearest integer tick cadence to 4 Hz
};

/// Whole-experiment configuration; every block resolvable from defaults and
/// frozen to disk before a run.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::string out_dir = "runs/out";
  int threads = 0;
  env::EnvParams env;
  TaskSetConfig tasks;
  model::LatentModelConfig model;
  model::ModelTrainHyper model_train;
  policy::PolicyConfig policy;
  policy::PpoConfig ppo;
  plan::PlanConfig planner;
  DishLoopConfig dish;

  /// Keeps cross-block dimensions consistent (obs dims, seeds, threads).
  void resolve();
};

/// Loads JSON over the defaults. Unknown keys are rejected with the
/// offending name; missing keys keep defaults.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Stable sub-seed derivation: splitmix of the global seed and a label hash,
/// so module seeds do not shift when unrelated code draws differently.
std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& label);

}  // namespace dish::io
