#pragma once

#include <string>
#include <vector>

#include "num/gaussian.hpp"
#include "num/mlp.hpp"
#include "num/param_vector.hpp"
#include "num/rng.hpp"

namespace dish::policy {

struct PolicyConfig {
  int obs_dim = 32;
  int d_h = 1;
  int action_dim = 2;
  std::vector<int> actor_hidden = {32};
  std::vector<int> value_hidden = {32};
  double log_std_init = -0.7;
  int n_tasks = 3;  // one value net per task
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Command-conditioned stochastic low-level policy pi(a | s, h): a diagonal
/// Gaussian whose mean is an MLP of (observation, command) and whose log-std
/// is a state-independent clamped parameter vector. One value net per task.
class Policy {
 public:
  Policy(const PolicyConfig& cfg, num::RngStream& init_rng);

  const PolicyConfig& config() const { return cfg_; }
  num::ParamVector& params() { return params_; }
  const num::ParamVector& params() const { return params_; }

  std::vector<double> action_mean(std::span<const double> s,
                                  std::span<const double> h) const;
  std::vector<double> clamped_log_std() const;

  struct Sample {
    std::vector<double> action;
    double log_prob = 0.0;
  };
  /// Raw (pre-clamp) action sample and its log density.
  Sample sample(std::span<const double> s, std::span<const double> h,
                num::RngStream& rng) const;

  double log_prob(std::span<const double> s, std::span<const double> h,
                  std::span<const double> a) const;

  /// Deterministic value-net evaluation; throws on an unknown task index.
  double value(int task_idx, std::span<const double> s) const;

  const num::MlpSpec& actor_spec() const { return actor_spec_; }
  const num::MlpSpec& value_spec() const { return value_spec_; }
  std::string value_segment(int task_idx) const;

  /// Parameter layout: actor and log_std first (the actor optimizer range),
  /// then one segment per task value net.
  std::size_t actor_param_count() const { return actor_end_; }

 private:
  PolicyConfig cfg_;
  num::MlpSpec actor_spec_, value_spec_;
  num::ParamVector params_;
  std::size_t actor_end_ = 0;
};

}  // namespace dish::policy
