#include "io/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace dish::io {

namespace {

using nlohmann::json;

/// Tracks which keys a block consumed and rejects the rest by name.
class Reader {
 public:
  Reader(const json& j, std::string ctx) : j_(&j), ctx_(std::move(ctx)) {
    if (!j.is_object())
      throw std::runtime_error("config: '" + ctx_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (auto it = j_->find(key); it != j_->end()) {
      seen_.insert(key);
      out = it->get<T>();
    }
  }

  bool has(const char* key) const { return j_->contains(key); }

  const json* sub(const char* key) {
    if (auto it = j_->find(key); it != j_->end()) {
      seen_.insert(key);
      return &*it;
    }
    return nullptr;
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!seen_.count(it.key()))
        throw std::runtime_error("config: unknown key '" + it.key() + "' in " +
                                 ctx_);
  }

 private:
  const json* j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

void read_env(const json& j, env::EnvParams& e) {
  Reader r(j, "env");
  r.get("dt_low", e.dt_low);
  r.get("high_dt", e.high_dt);
  r.get("v_max", e.v_max);
  r.get("a_max", e.a_max);
  r.get("omega_max", e.omega_max);
  r.get("heading_noise_std", e.heading_noise_std);
  r.get("phase_rate", e.phase_rate);
  r.get("init_speed_mean", e.init_speed_mean);
  r.get("init_speed_std", e.init_speed_std);
  r.get("init_heading_std", e.init_heading_std);
  r.get("init_phase_uniform", e.init_phase_uniform);
  r.get("obs_dim", e.obs_dim);
  r.get("lift_seed", e.lift_seed);
  r.get("pos_scale", e.pos_scale);
  r.finish();
}

json env_json(const env::EnvParams& e) {
  return json{{"dt_low", e.dt_low},
              {"high_dt", e.high_dt},
              {"v_max", e.v_max},
              {"a_max", e.a_max},
              {"omega_max", e.omega_max},
              {"heading_noise_std", e.heading_noise_std},
              {"phase_rate", e.phase_rate},
              {"init_speed_mean", e.init_speed_mean},
              {"init_speed_std", e.init_speed_std},
              {"init_heading_std", e.init_heading_std},
              {"init_phase_uniform", e.init_phase_uniform},
              {"obs_dim", e.obs_dim},
              {"lift_seed", e.lift_seed},
              {"pos_scale", e.pos_scale}};
}

void read_tasks(const json& j, TaskSetConfig& t) {
  Reader r(j, "tasks");
  r.get("cruise_speed", t.cruise_speed);
  r.get("turn_rate", t.turn_rate);
  r.get("episode_seconds", t.episode_seconds);
  r.get("reach_radius", t.reach_radius);
  r.finish();
}

json tasks_json(const TaskSetConfig& t) {
  return json{{"cruise_speed", t.cruise_speed},
              {"turn_rate", t.turn_rate},
              {"episode_seconds", t.episode_seconds},
              {"reach_radius", t.reach_radius}};
}

void read_model(const json& j, model::LatentModelConfig& m) {
  Reader r(j, "model");
  r.get("d_z", m.d_z);
  r.get("d_h", m.d_h);
  r.get("obs_dim", m.obs_dim);
  r.get("window", m.window);
  r.get("f_hidden", m.f_hidden);
  r.get("sigma_hidden", m.sigma_hidden);
  r.get("dec_mean_hidden", m.dec_mean_hidden);
  r.get("dec_std_hidden", m.dec_std_hidden);
  r.get("infer_hidden", m.infer_hidden);
  r.finish();
}

json model_json(const model::LatentModelConfig& m) {
  return json{{"d_z", m.d_z},
              {"d_h", m.d_h},
              {"obs_dim", m.obs_dim},
              {"window", m.window},
              {"f_hidden", m.f_hidden},
              {"sigma_hidden", m.sigma_hidden},
              {"dec_mean_hidden", m.dec_mean_hidden},
              {"dec_std_hidden", m.dec_std_hidden},
              {"infer_hidden", m.infer_hidden}};
}

void read_model_train(const json& j, model::ModelTrainHyper& m) {
  Reader r(j, "model_train");
  r.get("K", m.K);
  r.get("R", m.R);
  r.get("L", m.L);
  r.get("lr", m.lr);
  r.get("batch", m.batch);
  r.get("steps", m.steps);
  r.get("adapt", m.adapt);
  r.get("holdout_frac", m.holdout_frac);
  r.get("eval_every", m.eval_every);
  r.get("eval_R", m.eval_R);
  r.finish();
}

json model_train_json(const model::ModelTrainHyper& m) {
  return json{{"K", m.K},           {"R", m.R},
              {"L", m.L},           {"lr", m.lr},
              {"batch", m.batch},   {"steps", m.steps},
              {"adapt", m.adapt},   {"holdout_frac", m.holdout_frac},
              {"eval_every", m.eval_every}, {"eval_R", m.eval_R}};
}

void read_policy(const json& j, policy::PolicyConfig& p) {
  Reader r(j, "policy");
  r.get("obs_dim", p.obs_dim);
  r.get("d_h", p.d_h);
  r.get("action_dim", p.action_dim);
  r.get("actor_hidden", p.actor_hidden);
  r.get("value_hidden", p.value_hidden);
  r.get("log_std_init", p.log_std_init);
  r.get("n_tasks", p.n_tasks);
  r.finish();
}

json policy_json(const policy::PolicyConfig& p) {
  return json{{"obs_dim", p.obs_dim},
              {"d_h", p.d_h},
              {"action_dim", p.action_dim},
              {"actor_hidden", p.actor_hidden},
              {"value_hidden", p.value_hidden},
              {"log_std_init", p.log_std_init},
              {"n_tasks", p.n_tasks}};
}

void read_ppo(const json& j, policy::PpoConfig& p) {
  Reader r(j, "ppo");
  r.get("clip_eps", p.clip_eps);
  r.get("epochs", p.epochs);
  r.get("minibatch", p.minibatch);
  r.get("gamma", p.gamma);
  r.get("gae_lambda", p.gae_lambda);
  r.get("beta", p.beta);
  r.get("prior_std", p.prior_std);
  r.get("lr_actor", p.lr_actor);
  r.get("lr_value", p.lr_value);
  r.finish();
}

json ppo_json(const policy::PpoConfig& p) {
  return json{{"clip_eps", p.clip_eps},   {"epochs", p.epochs},
              {"minibatch", p.minibatch}, {"gamma", p.gamma},
              {"gae_lambda", p.gae_lambda}, {"beta", p.beta},
              {"prior_std", p.prior_std}, {"lr_actor", p.lr_actor},
              {"lr_value", p.lr_value}};
}

void read_planner(const json& j, plan::PlanConfig& p) {
  Reader r(j, "planner");
  r.get("n_particle", p.n_particle);
  r.get("k_plan", p.k_plan);
  r.get("ess_threshold_frac", p.ess_threshold_frac);
  r.get("iterations", p.iterations);
  std::string resampling, mode;
  r.get("resampling", resampling);
  r.get("mode", mode);
  if (!resampling.empty()) {
    if (resampling == "systematic_on_ess")
      p.resampling = plan::ResampleScheme::kSystematicOnEss;
    else if (resampling == "none")
      p.resampling = plan::ResampleScheme::kNone;
    else
      throw std::runtime_error("config: unknown resampling '" + resampling + "'");
  }
  if (!mode.empty()) p.mode = plan::plan_mode_from_name(mode);
  r.finish();
}

json planner_json(const plan::PlanConfig& p) {
  return json{{"n_particle", p.n_particle},
              {"k_plan", p.k_plan},
              {"ess_threshold_frac", p.ess_threshold_frac},
              {"iterations", p.iterations},
              {"resampling", p.resampling == plan::ResampleScheme::kNone
                                 ? "none"
                                 : "systematic_on_ess"},
              {"mode", plan::plan_mode_name(p.mode)}};
}

void read_dish(const json& j, DishLoopConfig& d) {
  Reader r(j, "dish");
  r.get("outer_iters", d.outer_iters);
  r.get("updates_per_iter", d.updates_per_iter);
  r.get("episodes_per_update", d.episodes_per_update);
  r.get("model_rollout_episodes", d.model_rollout_episodes);
  r.get("window_stride", d.window_stride);
  r.get("replan_ticks_follow", d.replan_ticks_follow);
  r.get("replan_ticks_navigate", d.replan_ticks_navigate);
  r.finish();
}

json dish_json(const DishLoopConfig& d) {
  return json{{"outer_iters", d.outer_iters},
              {"updates_per_iter", d.updates_per_iter},
              {"episodes_per_update", d.episodes_per_update},
              {"model_rollout_episodes", d.model_rollout_episodes},
              {"window_stride", d.window_stride},
              {"replan_ticks_follow", d.replan_ticks_follow},
              {"replan_ticks_navigate", d.replan_ticks_navigate}};
}

}  // namespace

void ExperimentConfig::resolve() {
  model.obs_dim = env.obs_dim;
  policy.obs_dim = env.obs_dim;
  policy.d_h = model.d_h;
  policy.n_tasks = 3;  // follow tasks; navigation is evaluation-only
  model_train.seed = derive_seed(seed, "model_train");
  model_train.threads = threads;
  ppo.seed = derive_seed(seed, "ppo");
  planner.threads = threads == 0 ? 0 : threads;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  ExperimentConfig cfg;
  if (text.empty()) {
    cfg.resolve();
    return cfg;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") +
                             e.what());
  }
  Reader r(j, "root");
  r.get("seed", cfg.seed);
  r.get("out_dir", cfg.out_dir);
  r.get("threads", cfg.threads);
  if (const json* s = r.sub("env")) read_env(*s, cfg.env);
  if (const json* s = r.sub("tasks")) read_tasks(*s, cfg.tasks);
  if (const json* s = r.sub("model")) read_model(*s, cfg.model);
  if (const json* s = r.sub("model_train")) read_model_train(*s, cfg.model_train);
  if (const json* s = r.sub("policy")) read_policy(*s, cfg.policy);
  if (const json* s = r.sub("ppo")) read_ppo(*s, cfg.ppo);
  if (const json* s = r.sub("planner")) read_planner(*s, cfg.planner);
  if (const json* s = r.sub("dish")) read_dish(*s, cfg.dish);
  r.finish();
  cfg.resolve();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j{{"seed", cfg.seed},
         {"out_dir", cfg.out_dir},
         {"threads", cfg.threads},
         {"env", env_json(cfg.env)},
         {"tasks", tasks_json(cfg.tasks)},
         {"model", model_json(cfg.model)},
         {"model_train", model_train_json(cfg.model_train)},
         {"policy", policy_json(cfg.policy)},
         {"ppo", ppo_json(cfg.ppo)},
         {"planner", planner_json(cfg.planner)},
         {"dish", dish_json(cfg.dish)}};
  return j.dump(2);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << config_to_json_text(cfg) << '\n';
}

std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = global_seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dish::io
