#pragma once

#include <string>
#include <vector>

#include "baselines/baseline.hpp"
#include "dish/executor.hpp"
#include "model/train_model.hpp"

namespace dish::loop {

/// High-level-rate training data extracted from executed episodes: model
/// sequences (windowed) and the matching rollout windows for the ablation
/// baselines, cut from the same episodes.
struct ModelDataset {
  std::vector<model::SequenceData> sequences;
  std::vector<baselines::BaselineRollout> baseline_windows;
};

/// Cuts K-length windows at the given tick stride from each episode's tick
/// stream. The observation window conditioning z1 is the W ticks ending at
/// the sequence start, zero-padded near the episode beginning.
ModelDataset build_model_dataset(const std::vector<EpisodeResult>& episodes,
                                 int W, int K, int stride);

/// CSV schema: episode,k,s_0..s_{D-1},h_0..h_{dh-1} at the high-level rate.
void save_dataset_csv(const std::vector<EpisodeResult>& episodes,
                      const std::string& path);
/// Rebuilds per-episode tick streams from the CSV (observations and
/// commands only) and windows them like build_model_dataset.
ModelDataset load_dataset_csv(const std::string& path, int W, int K,
                              int stride, int obs_dim, int d_h);

}  // namespace dish::loop
