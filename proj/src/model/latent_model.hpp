#pragma once

#include <span>
#include <vector>

#include "num/gaussian.hpp"
#include "num/mlp.hpp"
#include "num/param_vector.hpp"
#include "num/rng.hpp"

namespace dish::model {

struct LatentModelConfig {
  int d_z = 3;
  int d_h = 1;
  int obs_dim = 32;
  int window = 3;  // observation ticks conditioning the initial-state net
  std::vector<int> f_hidden = {32};
  std::vector<int> sigma_hidden = {16};
  std::vector<int> dec_mean_hidden = {48};
  std::vector<int> dec_std_hidden = {16};
  std::vector<int> infer_hidden = {64};
};

/// Conditional latent state-space model:
///   z' = f(z) + sigma(z) (h + w),   w ~ N(0, I)
///   s  ~ N(dec_mean(z), dec_std(z))
/// with an initial-state inference net q(z1 | recent observations).
/// sigma and dec_std outputs are softplus-floored, so noise gains and
/// decoder stds stay >= 1e-4.
class LatentModel {
 public:
  LatentModel(const LatentModelConfig& cfg, num::RngStream& init_rng);

  /// Linear instance: f(z) = A z, sigma(z) = B (constant, entries > floor),
  /// dec_mean(z) = C z, dec_std constant. Used by analytic-oracle tests.
  static LatentModel linear(const std::vector<std::vector<double>>& A,
                            const std::vector<std::vector<double>>& B,
                            const std::vector<std::vector<double>>& C,
                            double dec_std, int window = 1);

  const LatentModelConfig& config() const { return cfg_; }
  num::ParamVector& params() { return params_; }
  const num::ParamVector& params() const { return params_; }

  int window_input_dim() const { return cfg_.window * cfg_.obs_dim; }

  /// z' = f(z) + sigma(z) (h + w).
  std::vector<double> prior_step(std::span<const double> z,
                                 std::span<const double> h,
                                 std::span<const double> w) const;

  /// z' = f(z) + sigma(z) (h + u + w).
  std::vector<double> proposal_step(std::span<const double> z,
                                    std::span<const double> h,
                                    std::span<const double> u,
                                    std::span<const double> w) const;

  /// z' = f(z) + sigma(z) eff, allocation-free.
  void step_effective(std::span<const double> z, std::span<const double> eff,
                      std::span<double> z_next, num::MlpWorkspace& ws) const;

  num::DiagGaussian decode(std::span<const double> z) const;
  void decode_into(std::span<const double> z, num::MlpWorkspace& ws,
                   std::vector<double>& mean, std::vector<double>& std) const;

  /// q(z1 | window); window is the stacked last `window` observations,
  /// oldest first, zero-padded at episode start.
  num::DiagGaussian infer_initial(std::span<const double> window) const;

  // Network specs and parameter slices (used by the trainer's backprop).
  const num::MlpSpec& f_spec() const { return f_spec_; }
  const num::MlpSpec& sigma_spec() const { return sigma_spec_; }
  const num::MlpSpec& dec_mean_spec() const { return dec_mean_spec_; }
  const num::MlpSpec& dec_std_spec() const { return dec_std_spec_; }
  const num::MlpSpec& infer_spec() const { return infer_spec_; }

  std::span<const double> f_params() const { return params_.segment("f"); }
  std::span<const double> sigma_params() const { return params_.segment("sigma"); }
  std::span<const double> dec_mean_params() const { return params_.segment("dec_mean"); }
  std::span<const double> dec_std_params() const { return params_.segment("dec_std"); }
  std::span<const double> infer_params() const { return params_.segment("infer"); }

 private:
  LatentModel() = default;
  void build_specs();

  LatentModelConfig cfg_;
  num::MlpSpec f_spec_, sigma_spec_, dec_mean_spec_, dec_std_spec_, infer_spec_;
  num::ParamVector params_;
};

}  // namespace dish::model
