#include "oracle/brute_force.hpp"

#include <cmath>
#include <stdexcept>

namespace dish::oracle {

std::vector<double> default_command_grid() {
  std::vector<double> g(21);
  for (int i = 0; i < 21; ++i) g[i] = -3.0 + 6.0 * i / 20.0;
  return g;
}

BruteForceResult brute_force_plan(const plan::PlannerModel& model,
                                  std::span<const double> window,
                                  const plan::PlanRewardFn& reward,
                                  const std::vector<double>& h_grid, int k_plan,
                                  int n_tapes, num::RngStream rng) {
  if (model.command_dim() != 1)
    throw std::invalid_argument("brute_force_plan: scalar commands only");
  if (h_grid.empty() || k_plan < 1 || n_tapes < 1)
    throw std::invalid_argument("brute_force_plan: bad grid/horizon/tapes");
  double n_seq_f = 1.0;
  for (int k = 0; k < k_plan; ++k) n_seq_f *= static_cast<double>(h_grid.size());
  if (n_seq_f > 1e6)
    throw std::invalid_argument(
        "brute_force_plan: enumeration budget exceeded (grid^k_plan > 1e6)");
  const long n_seq = static_cast<long>(n_seq_f);

  const int dz = model.latent_dim();
  const int D = model.obs_dim();
  const num::DiagGaussian q0 = model.infer_initial(window);

  // Frozen noise tapes shared by every command sequence.
  struct Tape {
    std::vector<double> z1;    // dz
    std::vector<double> w;     // k_plan
    std::vector<double> s_eps; // k_plan * D decoder draws
  };
  std::vector<Tape> tapes(n_tapes);
  for (int t = 0; t < n_tapes; ++t) {
    num::RngStream tr = rng.derive(t);
    tapes[t].z1.resize(dz);
    for (int d = 0; d < dz; ++d)
      tapes[t].z1[d] = q0.mean[d] + std::exp(q0.log_std[d]) * tr.normal();
    tapes[t].w = tr.normal_vec(k_plan);
    tapes[t].s_eps = tr.normal_vec(static_cast<std::size_t>(k_plan) * D);
  }

  BruteForceResult best;
  best.best_value = -std::numeric_limits<double>::infinity();

  std::vector<int> idx(k_plan, 0);
  std::vector<double> u(k_plan), z(dz), znext(dz), s(D), aux(reward.aux_dim());
  for (long seq = 0; seq < n_seq; ++seq) {
    double penalty = 0.0;
    for (int k = 0; k < k_plan; ++k) {
      u[k] = h_grid[idx[k]];
      penalty += 0.5 * u[k] * u[k];
    }

    double total = 0.0;
    for (int t = 0; t < n_tapes; ++t) {
      const Tape& tape = tapes[t];
      std::copy(tape.z1.begin(), tape.z1.end(), z.begin());
      reward.init_aux(aux);
      for (int k = 0; k < k_plan; ++k) {
        const double eff = u[k] + tape.w[k];
        model.step(z, {&eff, 1}, znext);
        std::swap(z, znext);
        const num::DiagGaussian g = model.decode(z);
        for (int d = 0; d < D; ++d)
          s[d] = g.mean[d] + std::exp(g.log_std[d]) *
                                 tape.s_eps[static_cast<std::size_t>(k) * D + d];
        total += reward(s, k + 1, aux);
      }
    }
    const double value = total / n_tapes - penalty;
    if (value > best.best_value) {
      best.best_value = value;
      best.best_first = u[0];
      best.best_sequence = u;
    }

    // odometer over the grid
    for (int k = 0; k < k_plan; ++k) {
      if (++idx[k] < static_cast<int>(h_grid.size())) break;
      idx[k] = 0;
    }
  }
  return best;
}

}  // namespace dish::oracle
