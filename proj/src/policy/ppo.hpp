#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "policy/policy.hpp"

namespace dish::policy {

/// One low-level step collected while running the hierarchical policy.
struct TransitionRecord {
  std::vector<double> s;  // observation
  std::vector<double> a;  // raw (pre-clamp) sampled action
  std::vector<double> h;  // zero-order-held command at this step
  double reward = 0.0;    // environment reward
  double log_prob = 0.0;  // pi(a | s, h) at collection time
  int task_idx = 0;
  bool done = false;
  int low_tick = 0;
  int high_tick = 0;
  int iteration = 0;            // outer DISH iteration the record came from
  std::string command_source;   // "bootstrap" or "planner"
};

struct PpoConfig {
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 256;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double beta = 0.01;      // prior-KL penalty weight in the shaped reward
  double prior_std = 1.0;  // zero-mean Gaussian action prior
  double lr_actor = 3e-4;
  double lr_value = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// reward - beta * (log_prob - prior_log_prob): the per-step integrand of
/// the policy objective, with the command-inference log-ratio excluded
/// (the planner is non-parametric; the term is surfaced in stats instead).
double regularized_reward(double reward, double log_prob,
                          double prior_log_prob, double beta);

struct PpoStats {
  double mean_kl = 0.0;          // KL(old || new) estimate after the update
  double actor_objective = 0.0;  // mean clipped surrogate at epoch start
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double mean_prior_kl_term = 0.0;  // mean beta*(logp - prior) folded into rewards
  double mean_return = 0.0;
  std::size_t n_records = 0;
};

/// PPO with GAE advantages from the per-task value nets and a clipped
/// surrogate; value nets regress to the GAE returns. Keeps its own Adam
/// state across calls.
class PpoTrainer {
 public:
  PpoTrainer(Policy& policy, const PpoConfig& cfg);

  /// One update over a buffer of whole episodes (records in time order,
  /// done flags closing every episode). Throws on NaN loss, preserving the
  /// policy parameters.
  PpoStats update(std::span<const TransitionRecord> buffer);

  const PpoConfig& config() const { return cfg_; }

 private:
  Policy* policy_;
  PpoConfig cfg_;
  num::Adam actor_opt_;
  num::Adam value_opt_;
  std::uint64_t update_count_ = 0;
};

}  // namespace dish::policy
