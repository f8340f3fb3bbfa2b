#pragma once

#include <vector>

#include "num/rng.hpp"
#include "planner/model_iface.hpp"

namespace dish::oracle {

struct BruteForceResult {
  double best_first = 0.0;  // first command of the best sequence
  double best_value = 0.0;  // mean total reward minus control penalty
  std::vector<double> best_sequence;
};

/// Exhaustive ground truth for scalar-command planning: enumerates every
/// piecewise-constant command sequence u_{1:k_plan} on the grid, scores each
/// as the frozen-noise-tape average of the accumulated reward minus the
/// planner's implicit command prior penalty sum_k |u_k|^2 / 2, and returns
/// the argmax. Pre: grid^k_plan <= 1e6 sequences and command_dim == 1.
BruteForceResult brute_force_plan(const plan::PlannerModel& model,
                                  std::span<const double> window,
                                  const plan::PlanRewardFn& reward,
                                  const std::vector<double>& h_grid, int k_plan,
                                  int n_tapes, num::RngStream rng);

/// Default 21-point grid on [-3, 3] (3 sigma of the command prior).
std::vector<double> default_command_grid();

}  // namespace dish::oracle
