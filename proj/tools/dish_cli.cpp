#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dish/dish_loop.hpp"
#include "io/checkpoint.hpp"
#include "io/csv.hpp"
#include "oracle/brute_force.hpp"
#include "oracle/harness.hpp"
#include "oracle/lds.hpp"
#include "planner/adapters.hpp"

namespace fs = std::filesystem;
using namespace dish;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int threads = -1;
  int particles = 0;
  int k_plan = 0;
  std::string mode;
};

io::ExperimentConfig resolve_config(const CommonOpts& o) {
  io::ExperimentConfig cfg = o.config_path.empty()
                                 ? io::config_from_json_text("")
                                 : io::load_config(o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.threads >= 0) cfg.threads = o.threads;
  if (o.particles > 0) cfg.planner.n_particle = o.particles;
  if (o.k_plan > 0) cfg.planner.k_plan = o.k_plan;
  if (!o.mode.empty()) {
    cfg.planner.mode = plan::plan_mode_from_name(o.mode);
    if (cfg.planner.mode == plan::PlanMode::kCem)
      cfg.planner.resampling = plan::ResampleScheme::kNone;
    if (cfg.planner.mode == plan::PlanMode::kAdaptivePi &&
        cfg.planner.iterations < 2)
      cfg.planner.iterations = 3;
  }
  cfg.resolve();
  return cfg;
}

int cmd_train(const CommonOpts& o) {
  io::ExperimentConfig cfg = resolve_config(o);
  num::RngStream prng(io::derive_seed(cfg.seed, "policy_init"));
  num::RngStream mrng(io::derive_seed(cfg.seed, "model_init"));
  policy::Policy pol(cfg.policy, prng);
  model::LatentModel mdl(cfg.model, mrng);
  const auto result = loop::run_dish(cfg, pol, mdl);
  std::cout << "run complete: " << result.run_dir << "\n";
  for (std::size_t l = 0; l < result.iteration_eval.size(); ++l)
    for (const auto& row : result.iteration_eval[l])
      std::cout << row.model_name << " " << row.task_name
                << " ref_true=" << row.ref_true << " plan_ref=" << row.plan_ref
                << " plan_true=" << row.plan_true << (row.fell ? " F" : "")
                << "\n";
  return 0;
}

int cmd_plan(const CommonOpts& o, const std::string& model_path,
             const std::string& task_name, const std::string& trace_path) {
  io::ExperimentConfig cfg = resolve_config(o);
  const auto ckpt = io::load_latent_model(model_path);
  env::ObservationLift lift(cfg.env.obs_dim, ckpt.lift_seed, cfg.env.pos_scale,
                            cfg.env.v_max);

  num::RngStream reset_rng(io::derive_seed(cfg.seed, "plan_reset"));
  const env::CoreState state = env::env_reset(cfg.env, reset_rng);
  loop::TaskTemplate tmpl;
  tmpl.kind = env::task_kind_from_name(task_name);
  tmpl.cruise_speed = cfg.tasks.cruise_speed;
  tmpl.turn_rate = cfg.tasks.turn_rate;
  if (tmpl.kind == env::TaskKind::kNavigate) {
    tmpl.goal = {6.0, 0.0};
    tmpl.reach_radius = cfg.tasks.reach_radius;
  }
  const env::Task task =
      tmpl.instantiate(state, cfg.planner.k_plan + 2, cfg.env.high_dt);

  std::vector<double> window(
      static_cast<std::size_t>(cfg.model.window) * cfg.env.obs_dim, 0.0);
  std::vector<double> obs;
  lift.observe_into(state, obs);
  std::copy(obs.begin(), obs.end(), window.end() - obs.size());

  plan::LatentPlannerModel pm(ckpt.model);
  std::unique_ptr<plan::PlanRewardFn> reward;
  if (task.kind == env::TaskKind::kNavigate)
    reward = std::make_unique<plan::NavigatePlanReward>(lift, state.x, state.y,
                                                        cfg.env.high_dt, task);
  else
    reward = std::make_unique<plan::FollowPlanReward>(
        lift, state.x, state.y, cfg.env.high_dt, task.reference.value(), 0);

  const num::RngStream rng(io::derive_seed(cfg.seed, "plan"));
  const auto res = plan::plan(pm, window, *reward, cfg.planner, rng);
  std::cout << "h_star =";
  for (double v : res.h_star) std::cout << ' ' << v;
  std::cout << "\n";
  if (!trace_path.empty()) {
    io::CsvWriter csv(trace_path,
                      {"step", "ess", "resampled", "best_reward", "mean_reward"});
    for (const auto& d : res.diag)
      csv.row({std::to_string(d.step), io::fmt_double(d.ess),
               d.resampled ? "1" : "0", io::fmt_double(d.best_reward),
               io::fmt_double(d.mean_reward)});
    std::cout << "trace written to " << trace_path << "\n";
  }
  return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& policy_path,
                 const std::string& model_path, const std::string& out_csv) {
  io::ExperimentConfig cfg = resolve_config(o);
  const auto pol = io::load_policy(policy_path);
  const auto ckpt = io::load_latent_model(model_path);
  env::ObservationLift lift(cfg.env.obs_dim, ckpt.lift_seed, cfg.env.pos_scale,
                            cfg.env.v_max);
  plan::LatentPlannerModel pm(ckpt.model);
  const auto templates =
      loop::default_follow_templates(cfg.tasks.cruise_speed, cfg.tasks.turn_rate);
  const int n_ticks = static_cast<int>(
      std::lround(cfg.tasks.episode_seconds / cfg.env.high_dt));
  std::vector<oracle::MetricsRow> rows;
  for (const auto& t : templates) {
    const auto out = oracle::evaluate_follow(
        &pol, pm, lift, cfg.env, t, cfg.planner, n_ticks,
        cfg.dish.replan_ticks_follow, io::derive_seed(cfg.seed, "evaluate"),
        "DISH");
    rows.push_back(out.row);
    std::cout << out.row.task_name << " ref_true=" << out.row.ref_true
              << " plan_ref=" << out.row.plan_ref
              << " plan_true=" << out.row.plan_true << (out.row.fell ? " F" : "")
              << "\n";
  }
  if (!out_csv.empty()) oracle::write_metrics_csv(rows, out_csv);
  return 0;
}

int cmd_ablate(const CommonOpts& o, const std::string& policy_path,
               const std::string& model_path, const std::string& data_path,
               const std::string& out_csv) {
  io::ExperimentConfig cfg = resolve_config(o);
  const auto pol = io::load_policy(policy_path);
  const auto ckpt = io::load_latent_model(model_path);
  env::ObservationLift lift(cfg.env.obs_dim, ckpt.lift_seed, cfg.env.pos_scale,
                            cfg.env.v_max);

  // All models train on the same rollouts.
  const auto ds = loop::load_dataset_csv(data_path, cfg.model.window,
                                         cfg.model_train.K,
                                         cfg.dish.window_stride,
                                         cfg.env.obs_dim, cfg.model.d_h);
  if (ds.baseline_windows.empty())
    throw std::runtime_error("ablate: dataset has no action columns; use the "
                             "in-run rollout files");
  baselines::BaselineTrainHyper bh;
  bh.seed = io::derive_seed(cfg.seed, "baselines");
  const auto sas = baselines::train_baseline(baselines::BaselineKind::kSas,
                                             ds.baseline_windows, bh);
  const auto shs = baselines::train_baseline(baselines::BaselineKind::kShs,
                                             ds.baseline_windows, bh);
  const auto zaz = baselines::train_baseline(baselines::BaselineKind::kZaz,
                                             ds.baseline_windows, bh);

  oracle::AblationModels models;
  models.dish = &ckpt.model;
  models.sas = &sas;
  models.shs = &shs;
  models.zaz = &zaz;
  const auto templates =
      loop::default_follow_templates(cfg.tasks.cruise_speed, cfg.tasks.turn_rate);
  const int n_ticks = static_cast<int>(
      std::lround(cfg.tasks.episode_seconds / cfg.env.high_dt));
  const auto rows = oracle::run_ablation(pol, models, lift, cfg.env, templates,
                                         cfg.planner, n_ticks,
                                         cfg.dish.replan_ticks_follow,
                                         io::derive_seed(cfg.seed, "ablate"));
  for (const auto& r : rows)
    std::cout << r.model_name << " " << r.task_name << " ref_true="
              << (r.fell ? std::string("F") : io::fmt_double(r.ref_true))
              << " plan_ref=" << r.plan_ref << " plan_true="
              << (r.fell ? std::string("F") : io::fmt_double(r.plan_true))
              << "\n";
  if (!out_csv.empty()) oracle::write_metrics_csv(rows, out_csv);
  return 0;
}

int check(bool ok, const std::string& name, int& passed, int& failed) {
  (ok ? passed : failed) += 1;
  std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
  return ok ? 0 : 1;
}

int cmd_oracle_check(const CommonOpts& o) {
  int passed = 0, failed = 0;
  num::RngStream rng(o.seed_set ? o.seed : 20240601ULL);

  // Kalman vs dense joint-Gaussian on random systems.
  for (int trial = 0; trial < 5; ++trial) {
    const int dz = 2, D = 3, K = 4;
    Eigen::MatrixXd A = 0.4 * Eigen::MatrixXd::Random(dz, dz);
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(dz, 1).cwiseAbs() * 0.8;
    B.array() += 0.2;
    Eigen::MatrixXd C = Eigen::MatrixXd::Random(D, dz);
    const auto lds = oracle::LinearGaussianLds::from_gain(
        A, B, C, 0.4, Eigen::VectorXd::Zero(dz),
        Eigen::MatrixXd::Identity(dz, dz));
    std::vector<double> s(K * D), h(K * 1);
    for (auto& v : s) v = rng.normal();
    for (auto& v : h) v = 0.5 * rng.normal();
    const double lk = oracle::kalman_loglik(lds, s, h, K);
    const double ld = oracle::dense_joint_loglik(lds, s, h, K);
    check(std::abs(lk - ld) < 1e-8, "kalman-vs-dense trial " +
                                        std::to_string(trial),
          passed, failed);
  }

  // LQG first command equals the Gaussian posterior mean of w1.
  for (int trial = 0; trial < 5; ++trial) {
    const int dz = 2;
    Eigen::MatrixXd A = 0.5 * Eigen::MatrixXd::Random(dz, dz);
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(dz, 1);
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(dz, dz);
    const auto lds = oracle::LinearGaussianLds::from_gain(
        A, B, C, 0.5, Eigen::VectorXd::Zero(dz),
        Eigen::MatrixXd::Identity(dz, dz));
    Eigen::MatrixXd P = Eigen::MatrixXd::Random(dz, dz);
    P = (P * P.transpose()).eval();
    Eigen::VectorXd target = Eigen::VectorXd::Random(dz);
    Eigen::VectorXd z1 = Eigen::VectorXd::Random(dz);
    const auto u = oracle::lqg_first_command(lds, P, target, 4, z1, 1.0);
    const auto w = oracle::posterior_first_disturbance(lds, P, target, 4, z1);
    check((u - w).norm() < 1e-8,
          "lqg-posterior-equivalence trial " + std::to_string(trial), passed,
          failed);
  }

  std::cout << passed << " passed, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

int cmd_emit_plots(const std::string& run_dir, const std::string& out_dir) {
  // Use the latest iteration's model and its random-command rollouts.
  int last = 0;
  for (int l = 1; l < 100; ++l)
    if (fs::exists(fs::path(run_dir) / ("iter_" + std::to_string(l))))
      last = l;
  if (last == 0) throw std::runtime_error("emit-plots: no iter_<l> directories");
  const fs::path iter_dir = fs::path(run_dir) / ("iter_" + std::to_string(last));
  const auto ckpt = io::load_latent_model((iter_dir / "model.json").string());

  const fs::path out = out_dir.empty() ? fs::path(run_dir) / "plots"
                                       : fs::path(out_dir);
  fs::create_directories(out);

  // Rollout positions colored by command value.
  std::ifstream roll(iter_dir / "rollouts" / "random_command.csv");
  if (!roll) throw std::runtime_error("emit-plots: missing random_command.csv");
  std::string line;
  std::getline(roll, line);
  struct Row {
    long episode, k;
    double x, y, ang_vel, h;
  };
  std::vector<Row> rows;
  while (std::getline(roll, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    rows.push_back({static_cast<long>(vals[0]), static_cast<long>(vals[1]),
                    vals[2], vals[3], vals[7], vals[8]});
  }
  {
    io::CsvWriter csv((out / "rollout_xy.csv").string(),
                      {"episode", "k", "x", "y", "h"});
    for (const auto& r : rows)
      csv.row({std::to_string(r.episode), std::to_string(r.k),
               io::fmt_double(r.x), io::fmt_double(r.y), io::fmt_double(r.h)});
  }

  // Latent manifold: infer z for each dataset window, color by the realized
  // angular velocity of the matching tick.
  const auto& mcfg = ckpt.model.config();
  const auto ds = loop::load_dataset_csv(
      (iter_dir / "rollouts" / "model_dataset.csv").string(), mcfg.window, 2, 1,
      mcfg.obs_dim, mcfg.d_h);
  io::CsvWriter csv((out / "latent_manifold.csv").string(),
                    {"z_0", "z_1", "z_2", "ang_vel"});
  const std::size_t n = std::min(ds.sequences.size(), rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = ckpt.model.infer_initial(ds.sequences[i].window);
    std::vector<std::string> cells;
    for (int d = 0; d < mcfg.d_z; ++d) cells.push_back(io::fmt_double(g.mean[d]));
    for (int d = mcfg.d_z; d < 3; ++d) cells.push_back("0");
    cells.push_back(io::fmt_double(rows[i].ang_vel));
    csv.row(cells);
  }
  std::cout << "plots written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DISH hierarchical planning and control"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string model_path, policy_path, data_path, trace_path, out_csv;
  std::string task_name = "follow_straight";
  std::string run_dir, plots_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "experiment config JSON");
    sub->add_option("--seed", o.seed, "global seed")
        ->each([&](const std::string&) { o.seed_set = true; });
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads (0 = auto)");
    sub->add_option("--particles", o.particles, "planner particle count");
    sub->add_option("--k-plan", o.k_plan, "planning horizon in ticks");
    sub->add_option("--mode", o.mode, "planner mode: pf, adaptive_pi, cem");
  };

  CLI::App* train = app.add_subcommand("train", "run the full DISH loop");
  add_common(train);

  CLI::App* planc = app.add_subcommand("plan", "one-shot plan from a checkpoint");
  add_common(planc);
  planc->add_option("--model", model_path, "latent model checkpoint")->required();
  planc->add_option("--task", task_name, "task kind");
  planc->add_option("--trace", trace_path, "write per-step planner diagnostics");

  CLI::App* eval = app.add_subcommand("evaluate", "follow-task evaluation");
  add_common(eval);
  eval->add_option("--policy", policy_path, "policy checkpoint")->required();
  eval->add_option("--model", model_path, "latent model checkpoint")->required();
  eval->add_option("--out-csv", out_csv, "metrics CSV path");

  CLI::App* abl = app.add_subcommand("ablate", "4-model x 3-task ablation table");
  add_common(abl);
  abl->add_option("--policy", policy_path, "policy checkpoint")->required();
  abl->add_option("--model", model_path, "latent model checkpoint")->required();
  abl->add_option("--data", data_path, "model dataset CSV")->required();
  abl->add_option("--out-csv", out_csv, "ablation CSV path");

  CLI::App* orc = app.add_subcommand("oracle-check", "analytic oracle self-checks");
  add_common(orc);

  CLI::App* plots = app.add_subcommand("emit-plots", "plot data CSVs from a run");
  plots->add_option("run_dir", run_dir, "run directory")->required();
  plots->add_option("--out", plots_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(o);
    if (planc->parsed()) return cmd_plan(o, model_path, task_name, trace_path);
    if (eval->parsed()) return cmd_evaluate(o, policy_path, model_path, out_csv);
    if (abl->parsed())
      return cmd_ablate(o, policy_path, model_path, data_path, out_csv);
    if (orc->parsed()) return cmd_oracle_check(o);
    if (plots->parsed()) return cmd_emit_plots(run_dir, plots_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
