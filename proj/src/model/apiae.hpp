#pragma once

#include <span>
#include <utility>
#include <vector>

#include "model/latent_model.hpp"

namespace dish::model {

/// Variational proposal: open-loop control offsets over the window plus a
/// Gaussian initial distribution.
struct Proposal {
  std::vector<double> u;          // (K-1) x d_h, row-major
  std::vector<double> q0_mean;    // d_z
  std::vector<double> q0_logstd;  // d_z

  static Proposal zero(int K, int d_h, int d_z);
  /// u = 0, q0 from the model's inference net on the window.
  static Proposal from_inference(const LatentModel& m,
                                 std::span<const double> window, int K);
};

/// Externally drawn path randomness, so every path is replayable.
struct PathNoise {
  std::vector<double> z1_eps;  // d_z
  std::vector<double> w;       // (K-1) x d_h

  static PathNoise draw(num::RngStream& rng, int K, int d_z, int d_h);
};

struct LatentPath {
  std::vector<double> z;      // K x d_z
  std::vector<double> w;      // (K-1) x d_h (copy of the noise used)
  double state_cost = 0.0;    // V = -log(p0/q0) - sum_k log p(s_k|z_k)
  double control_cost = 0.0;  // sum_k 1/2|u_k|^2 + u_k . w_k
  double log_weight = 0.0;    // -state_cost - control_cost
};

struct ElboReport {
  double elbo = 0.0;
  double standard_error = 0.0;
  std::vector<double> normalized_weights;  // [L], sums to 1
  double effective_sample_size = 0.0;      // in [1, L]
  std::vector<double> per_adaptation_elbo;
  bool degenerate = false;
};

/// Rolls the proposal system over the observed sequence and scores the path:
///   log_weight = sum_k log p(s_k|z_k) + log p0(z1) - log q0(z1)
///                - sum_k (1/2 |u_k|^2 + u_k . w_k)
/// s is K x obs_dim, h is K x d_h (only the first K-1 commands drive
/// transitions). Throws if a decoder likelihood goes non-finite, naming the
/// step.
LatentPath path_log_weight(const LatentModel& m, std::span<const double> s,
                           std::span<const double> h, const Proposal& prop,
                           const PathNoise& noise, int K);

/// Multi-sample importance-weighted ELBO: log mean exp of L path weights,
/// with normalized weights, ESS and a delta-method standard error.
/// Path i draws from rng.derive(i); the reduction order is fixed, so the
/// result is identical for any thread count.
ElboReport elbo_estimate(const LatentModel& m, std::span<const double> s,
                         std::span<const double> h, const Proposal& prop,
                         int L, num::RngStream& rng, int K, int threads = 1);

/// R rounds of path-integral adaptation: each round estimates the ELBO with
/// L fresh paths, then shifts the control offsets by the weighted noise
/// means and refits the initial distribution to the weighted z1 ensemble.
/// per_adaptation_elbo[r] is the estimate under the proposal entering
/// round r.
std::pair<Proposal, ElboReport> apiae_adapt(const LatentModel& m,
                                            std::span<const double> s,
                                            std::span<const double> h,
                                            Proposal prop, int R, int L,
                                            num::RngStream& rng, int K,
                                            int threads = 1);

}  // namespace dish::model
