#pragma once

#include <optional>
#include <string>
#include <vector>

#include "num/mlp.hpp"
#include "num/param_vector.hpp"
#include "num/rng.hpp"

namespace dish::baselines {

/// Ablation internal models: next-state prediction from (state, action),
/// (state, command) or (VAE latent, action).
enum class BaselineKind { kSas, kShs, kZaz };

std::string baseline_kind_name(BaselineKind k);
BaselineKind baseline_kind_from_name(const std::string& name);

/// Gaussian-posterior autoencoder over single observations with a standard
/// normal latent prior and a learned global observation log-std.
struct Vae {
  int d_z = 3;
  int obs_dim = 32;
  num::MlpSpec enc_spec;  // obs -> (mean, raw std) over latent
  num::MlpSpec dec_spec;  // latent -> obs mean
  num::ParamVector params;  // segments: enc, dec, obs_logstd

  num::DiagGaussian encode(std::span<const double> s) const;
  std::vector<double> decode_mean(std::span<const double> z) const;
  std::span<const double> obs_logstd() const { return params.segment("obs_logstd"); }
};

struct VaeTrainHyper {
  int d_z = 3;
  std::vector<int> enc_hidden = {32};
  std::vector<int> dec_hidden = {32};
  double lr = 1e-3;
  int batch = 64;
  int steps = 800;
  std::uint64_t seed = 0;
};

struct VaeTrainLog {
  std::vector<double> elbo;
  double recon_mse = 0.0;
  double mean_kl = 0.0;
  bool posterior_collapse = false;  // KL below 1e-3 nats
};

/// Single-sample reparameterized ELBO and its gradient on a batch of
/// observations; noise is drawn from rng.derive(i) per datum, so a fixed
/// stream freezes the estimator (finite-difference checks rely on this).
double vae_elbo_and_grad(const Vae& v,
                         const std::vector<std::vector<double>>& obs_batch,
                         num::RngStream rng, std::span<double> grad);

Vae vae_train(const std::vector<std::vector<double>>& observations,
              const VaeTrainHyper& hyper, VaeTrainLog* log = nullptr);

/// One rollout at the high-level tick rate.
struct BaselineRollout {
  int K = 0;
  std::vector<double> s;  // K x obs_dim
  std::vector<double> a;  // K x action_dim
  std::vector<double> h;  // K x d_h
};

struct BaselineModel {
  BaselineKind kind = BaselineKind::kSas;
  int obs_dim = 32;
  int action_dim = 2;
  int d_h = 1;
  num::MlpSpec trans_spec;   // (state_dim + input_dim) -> state_dim
  num::ParamVector params;   // segment: trans
  std::optional<Vae> vae;    // zaz only

  int state_dim() const;  // obs_dim, or vae latent dim for zaz
  int input_dim() const;  // action_dim for sas/zaz, d_h for shs

  void validate() const;
};

struct BaselineTrainHyper {
  std::vector<int> hidden = {64};
  double lr = 1e-3;
  int batch = 16;
  int steps = 1200;
  std::uint64_t seed = 0;
  int threads = 1;
  VaeTrainHyper vae;  // zaz first stage
};

/// Open-loop multi-step squared-error loss on a batch of rollouts, teacher
/// forced only at the first state, with gradients through the unrolled
/// recursion (transition parameters only; the VAE is frozen for zaz).
double baseline_loss_and_grad(const BaselineModel& m,
                              const std::vector<const BaselineRollout*>& batch,
                              std::span<double> grad);

double baseline_loss(const BaselineModel& m,
                     const std::vector<BaselineRollout>& rollouts);

BaselineModel train_baseline(BaselineKind kind,
                             const std::vector<BaselineRollout>& rollouts,
                             const BaselineTrainHyper& hyper);

/// Open-loop rollout: x1 is the initial state in the model's state space
/// (observation, or latent for zaz); inputs is (K-1) rows of the kind's
/// input variable. Returns K predicted observations (decoded through the
/// VAE for zaz).
std::vector<double> baseline_rollout(const BaselineModel& m,
                                     std::span<const double> x1,
                                     const std::vector<double>& inputs, int K);

}  // namespace dish::baselines
