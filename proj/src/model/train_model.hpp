#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model/apiae.hpp"

namespace dish::model {

/// One training sequence at the high-level tick rate: K observations, the
/// zero-order-held commands aligned with them, and the observation window
/// (oldest first, zero-padded) that conditions the initial-state net.
struct SequenceData {
  std::vector<double> window;  // W x obs_dim
  std::vector<double> s;       // K x obs_dim
  std::vector<double> h;       // K x d_h
};

struct ModelTrainHyper {
  int K = 10;
  int R = 4;
  int L = 32;
  double lr = 1e-3;
  int batch = 32;
  int steps = 1000;
  bool adapt = true;          // run path-integral adaptation before each grad step
  double holdout_frac = 0.1;
  int eval_every = 50;
  int eval_R = 4;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct ModelTrainLog {
  std::vector<double> train_elbo;    // per step, batch mean
  std::vector<int> eval_steps;
  std::vector<double> holdout_elbo;  // adapted estimate on the held-out split
  double final_holdout_elbo = 0.0;
};

/// IWAE-style gradient of the multi-sample ELBO on one sequence with frozen
/// control offsets u and frozen per-path noise (reparameterized z1 through
/// the inference net). Accumulates into grad (laid out like model.params())
/// and returns the ELBO value.
double elbo_with_grad(const LatentModel& m, const SequenceData& seq,
                      std::span<const double> u, int L, num::RngStream rng,
                      std::span<double> grad);

/// Gradient ascent on the path-integral ELBO (Adam). Adaptation runs as a
/// stopped-gradient inner loop; gradients flow through the reparameterized
/// noise and the inference net. Throws on a non-finite gradient, naming the
/// step.
ModelTrainLog train_internal_model(LatentModel& m,
                                   const std::vector<SequenceData>& data,
                                   const ModelTrainHyper& hyper);

/// Mean adapted ELBO over a set of sequences (evaluation helper).
double evaluate_elbo(const LatentModel& m, const std::vector<SequenceData>& data,
                     int R, int L, int K, std::uint64_t seed, int threads = 1);

}  // namespace dish::model
