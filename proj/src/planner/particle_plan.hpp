#pragma once

#include <string>
#include <vector>

#include "num/rng.hpp"
#include "planner/model_iface.hpp"

namespace dish::plan {

enum class ResampleScheme { kSystematicOnEss, kNone };
enum class PlanMode { kPf, kAdaptivePi, kCem };

std::string plan_mode_name(PlanMode m);
PlanMode plan_mode_from_name(const std::string& name);

struct PlanConfig {
  int n_particle = 1024;
  int k_plan = 50;  // propagation steps; 5 s at 0.1 s ticks
  double ess_threshold_frac = 0.5;
  int iterations = 1;
  ResampleScheme resampling = ResampleScheme::kSystematicOnEss;
  PlanMode mode = PlanMode::kPf;
  int threads = 1;

  void validate() const;
};

/// Particle ensemble during one forward planning pass. Log-weights are kept
/// max-normalized after every step; retained first-step noises, the full
/// noise tape, accumulated rewards and reward aux state all follow
/// resampling ancestry.
struct ParticleSet {
  int n = 0, d_z = 0, d_h = 0, k_plan = 0, aux_dim = 0;
  int step = 0;  // propagation steps taken so far
  std::vector<double> z;           // n x d_z
  std::vector<double> w1;          // n x d_h
  std::vector<double> noise_tape;  // n x k_plan x d_h
  std::vector<double> aux;         // n x aux_dim
  std::vector<double> acc_reward;  // n
  std::vector<double> log_w;       // n
  double ess = 0.0;

  /// Normalized weights exp(log_w)/sum (they sum to one).
  std::vector<double> normalized_weights() const;
  /// Subtracts the max log-weight and refreshes ess. Throws "degenerate
  /// plan" if every weight underflowed.
  void normalize();
};

struct PlanStepDiag {
  int step = 0;
  double ess = 0.0;
  bool resampled = false;
  double best_reward = 0.0;
  double mean_reward = 0.0;
};

struct PlanResult {
  std::vector<double> h_star;  // d_h
  std::vector<std::vector<double>> predicted_obs_mean;  // k_plan x D
  std::vector<std::vector<double>> predicted_aux_mean;  // k_plan x aux_dim
  std::vector<PlanStepDiag> diag;                       // final iteration
  std::vector<double> per_iteration_score;  // weighted total reward
};

/// One synchronized propagation step for every particle: draw w ~ N(0, I),
/// step the latent under (u_k + w), decode and sample an observation, update
/// log-weights by the reward. Each particle draws from its own one-shot
/// stream step_rng.derive(i), so the result is identical for any thread
/// count. Does not normalize; the caller does.
void propagate_and_weight(ParticleSet& ps, const PlannerModel& model,
                          const PlanRewardFn& reward,
                          std::span<const double> u_step,
                          const num::RngStream& step_rng, int threads,
                          std::vector<double>* decoded_mean_scratch = nullptr);

/// Systematic resampling with a single uniform; weights reset uniform and
/// ancestry is applied to z, w1, the noise tape, aux and accumulated
/// rewards. ESS equals n afterwards.
void resample_systematic(ParticleSet& ps, num::RngStream& rng);

/// Algorithm "PF for Planning with Internal Model": one forward pass,
/// reward-weighted resampling, h* = sum_i w_i * w1_i through ancestry.
PlanResult plan(const PlannerModel& model, std::span<const double> window,
                const PlanRewardFn& reward, const PlanConfig& cfg,
                const num::RngStream& rng);

/// Iterated variant (adaptive path integral): repeats the forward pass,
/// shifting per-step command offsets by the weighted noise means.
PlanResult plan_iterated(const PlannerModel& model,
                         std::span<const double> window,
                         const PlanRewardFn& reward, const PlanConfig& cfg,
                         const num::RngStream& rng);

/// Cross-entropy-method reduction: the resampling branch is disabled and
/// commands are re-weighted only at the end of each iteration.
PlanResult plan_cem(const PlannerModel& model, std::span<const double> window,
                    const PlanRewardFn& reward, const PlanConfig& cfg,
                    const num::RngStream& rng);

}  // namespace dish::plan
