#pragma once

#include <string>

#include "baselines/baseline.hpp"
#include "model/latent_model.hpp"
#include "policy/policy.hpp"

namespace dish::io {

inline constexpr int kCheckpointVersion = 1;

/// Latent-model checkpoint: JSON header (dims, layer sizes, K, lift seed)
/// plus the flat ParamVector. Lossless 64-bit round trip.
void save_latent_model(const model::LatentModel& m, int K,
                       std::uint64_t lift_seed, const std::string& path);

struct LatentModelCheckpoint {
  model::LatentModel model;
  int K = 10;
  std::uint64_t lift_seed = 0;
};
LatentModelCheckpoint load_latent_model(const std::string& path);

void save_policy(const policy::Policy& p, const std::string& path);
policy::Policy load_policy(const std::string& path);

void save_baseline(const baselines::BaselineModel& m, const std::string& path);
baselines::BaselineModel load_baseline(const std::string& path);

}  // namespace dish::io
