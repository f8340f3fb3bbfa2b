#include "dish/dish_loop.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "io/checkpoint.hpp"
#include "io/csv.hpp"
#include "model/train_model.hpp"
#include "oracle/harness.hpp"
#include "planner/adapters.hpp"
#include "policy/ppo.hpp"

namespace dish::loop {

namespace fs = std::filesystem;

std::vector<EpisodeResult> collect_policy_rollouts(
    const io::ExperimentConfig& cfg, const env::ObservationLift& lift,
    const policy::Policy& policy, CommandSource& source,
    const TaskTemplate& task, int n_episodes, int replan_every, int iteration,
    std::uint64_t seed) {
  const int n_ticks = static_cast<int>(
      std::lround(cfg.tasks.episode_seconds / cfg.env.high_dt));
  std::vector<EpisodeResult> out;
  out.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) {
    EpisodeSetup setup;
    setup.env = &cfg.env;
    setup.lift = &lift;
    setup.task = &task;
    setup.policy = &policy;
    setup.source = &source;
    setup.n_ticks = n_ticks;
    setup.replan_every = replan_every;
    setup.ref_margin_ticks = cfg.planner.k_plan + replan_every + 2;
    setup.seed = num::RngStream(seed).derive(e).next_u64();
    setup.iteration = iteration;
    setup.window = cfg.model.window;
    out.push_back(run_episode(setup));
  }
  return out;
}

std::vector<EpisodeResult> collect_random_command_rollouts(
    const io::ExperimentConfig& cfg, const env::ObservationLift& lift,
    const policy::Policy& policy, bool policy_trained, int n_episodes,
    int iteration, std::uint64_t seed) {
  if (!policy_trained)
    throw std::runtime_error(
        "collect_random_command_rollouts: the policy must be trained first");
  RandomSource source(cfg.model.d_h, 1.0);
  // Commands refresh every tick; tasks only provide the episode scaffold.
  const auto templates =
      default_follow_templates(cfg.tasks.cruise_speed, cfg.tasks.turn_rate);
  const int n_ticks = static_cast<int>(
      std::lround(cfg.tasks.episode_seconds / cfg.env.high_dt));
  std::vector<EpisodeResult> out;
  out.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) {
    EpisodeSetup setup;
    setup.env = &cfg.env;
    setup.lift = &lift;
    setup.task = &templates[e % templates.size()];
    setup.policy = &policy;
    setup.source = &source;
    setup.n_ticks = n_ticks;
    setup.replan_every = 1;
    setup.seed = num::RngStream(seed ^ 0x5eedULL).derive(e).next_u64();
    setup.iteration = iteration;
    setup.record_transitions = false;
    setup.window = cfg.model.window;
    out.push_back(run_episode(setup));
  }
  return out;
}

namespace {

void write_rollout_csv(const std::vector<EpisodeResult>& episodes,
                       const std::string& path) {
  io::CsvWriter csv(path, {"episode", "k", "x", "y", "heading", "speed",
                           "gait_phase", "ang_vel", "h_0"});
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& ticks = episodes[e].ticks;
    for (std::size_t k = 0; k < ticks.size(); ++k) {
      const double h0 = ticks[k].h.empty() ? 0.0 : ticks[k].h[0];
      csv.row({std::to_string(e), std::to_string(k),
               io::fmt_double(ticks[k].pos[0]), io::fmt_double(ticks[k].pos[1]),
               io::fmt_double(ticks[k].heading), io::fmt_double(ticks[k].speed),
               io::fmt_double(ticks[k].gait_phase),
               io::fmt_double(ticks[k].ang_vel), io::fmt_double(h0)});
    }
  }
}

}  // namespace

DishRunResult run_dish(const io::ExperimentConfig& cfg, policy::Policy& policy,
                       model::LatentModel& model) {
  DishRunResult result;
  result.run_dir = cfg.out_dir;
  fs::create_directories(fs::path(cfg.out_dir));
  io::save_config(cfg, (fs::path(cfg.out_dir) / "config.json").string());

  env::ObservationLift lift(cfg.env.obs_dim, cfg.env.lift_seed, cfg.env.pos_scale,
                            cfg.env.v_max);
  const auto templates =
      default_follow_templates(cfg.tasks.cruise_speed, cfg.tasks.turn_rate);

  policy::PpoTrainer trainer(policy, cfg.ppo);
  bool policy_trained = false;
  bool model_trained = false;
  double final_holdout = 0.0;

  for (int l = 1; l <= cfg.dish.outer_iters; ++l) {
    const fs::path iter_dir = fs::path(cfg.out_dir) / ("iter_" + std::to_string(l));
    fs::create_directories(iter_dir / "rollouts");
    io::CsvWriter metrics((iter_dir / "metrics.csv").string(),
                          {"update", "mean_reward", "mean_kl", "value_loss",
                           "clip_fraction", "mean_return", "command_source"});

    // Inner loop: "not converged" realized as a fixed update budget.
    BootstrapSource bootstrap;
    plan::LatentPlannerModel planner_model(model);
    PlannerSource planner_source(planner_model, lift, cfg.planner, cfg.env.high_dt,
                                 io::derive_seed(cfg.seed, "planner_l" +
                                                               std::to_string(l)));
    CommandSource& source =
        model_trained ? static_cast<CommandSource&>(planner_source)
                      : static_cast<CommandSource&>(bootstrap);

    num::RngStream task_rng(io::derive_seed(cfg.seed, "tasks_l" + std::to_string(l)));
    for (int upd = 0; upd < cfg.dish.updates_per_iter; ++upd) {
      std::vector<policy::TransitionRecord> buffer;
      for (int e = 0; e < cfg.dish.episodes_per_update; ++e) {
        const auto& task = templates[task_rng.next_u64() % templates.size()];
        auto episodes = collect_policy_rollouts(
            cfg, lift, policy, source, task, 1, cfg.dish.replan_ticks_follow, l,
            io::derive_seed(cfg.seed, "ep_l" + std::to_string(l) + "_u" +
                                          std::to_string(upd) + "_e" +
                                          std::to_string(e)));
        for (auto& ep : episodes)
          for (auto& rec : ep.records) buffer.push_back(std::move(rec));
      }
      const auto stats = trainer.update(buffer);
      policy_trained = true;
      double mean_reward = 0.0;
      for (const auto& rec : buffer) mean_reward += rec.reward;
      mean_reward /= static_cast<double>(buffer.size());
      metrics.row({std::to_string(upd), io::fmt_double(mean_reward),
                   io::fmt_double(stats.mean_kl), io::fmt_double(stats.value_loss),
                   io::fmt_double(stats.clip_fraction),
                   io::fmt_double(stats.mean_return), source.name()});
    }

    // Outer loop: random-command rollouts, then internal-model learning.
    const auto model_eps = collect_random_command_rollouts(
        cfg, lift, policy, policy_trained, cfg.dish.model_rollout_episodes, l,
        io::derive_seed(cfg.seed, "model_rollouts_l" + std::to_string(l)));
    write_rollout_csv(model_eps, (iter_dir / "rollouts" / "random_command.csv").string());
    save_dataset_csv(model_eps, (iter_dir / "rollouts" / "model_dataset.csv").string());

    const ModelDataset ds = build_model_dataset(
        model_eps, cfg.model.window, cfg.model_train.K, cfg.dish.window_stride);
    model::ModelTrainHyper hyper = cfg.model_train;
    hyper.seed = io::derive_seed(cfg.seed, "model_train_l" + std::to_string(l));
    const auto train_log = model::train_internal_model(model, ds.sequences, hyper);
    final_holdout = train_log.final_holdout_elbo;
    model_trained = true;

    io::save_policy(policy, (iter_dir / "policy.json").string());
    io::save_latent_model(model, cfg.model_train.K, cfg.env.lift_seed,
                          (iter_dir / "model.json").string());

    // Follow-task evaluation with the freshly trained model (the DISH row
    // after l=1, the DISH+ row after l=2).
    plan::LatentPlannerModel eval_model(model);
    std::vector<oracle::MetricsRow> rows;
    for (const auto& task : templates) {
      const auto out = oracle::evaluate_follow(
          &policy, eval_model, lift, cfg.env, task, cfg.planner,
          static_cast<int>(std::lround(cfg.tasks.episode_seconds / cfg.env.high_dt)),
          cfg.dish.replan_ticks_follow,
          io::derive_seed(cfg.seed, "eval_l" + std::to_string(l)),
          l == 1 ? "DISH" : "DISH+");
      rows.push_back(out.row);
    }
    oracle::write_metrics_csv(rows, (iter_dir / "eval.csv").string());
    result.iteration_eval.push_back(rows);
  }

  // Final report: DISH vs DISH+ rows plus run metadata.
  nlohmann::json report;
  report["outer_iters"] = cfg.dish.outer_iters;
  report["final_holdout_elbo"] = final_holdout;
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t l = 0; l < result.iteration_eval.size(); ++l)
    for (const auto& row : result.iteration_eval[l])
      table.push_back({{"model", row.model_name},
                       {"task", row.task_name},
                       {"ref_true", row.ref_true},
                       {"plan_ref", row.plan_ref},
                       {"plan_true", row.plan_true},
                       {"fell", row.fell}});
  report["follow_eval"] = table;
  fs::create_directories(fs::path(cfg.out_dir) / "final");
  std::ofstream rep((fs::path(cfg.out_dir) / "final" / "report.json").string());
  rep << report.dump(2) << '\n';
  result.final_holdout_elbo = final_holdout;
  return result;
}

}  // namespace dish::loop
