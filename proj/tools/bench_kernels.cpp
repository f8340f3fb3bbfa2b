// Times the OpenMP particle-propagation and ELBO kernels against the serial
// reference path (threads = 1). Both paths produce bit-identical results;
// this binary only reports wall time.

#include <chrono>
#include <iostream>

#include "model/apiae.hpp"
#include "planner/adapters.hpp"
#include "planner/particle_plan.hpp"

using namespace dish;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

model::LatentModel make_model() {
  model::LatentModelConfig cfg;
  cfg.d_z = 3;
  cfg.d_h = 1;
  cfg.obs_dim = 32;
  cfg.window = 3;
  num::RngStream rng(99);
  return model::LatentModel(cfg, rng);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : 0;
  const auto mdl = make_model();
  plan::LatentPlannerModel pm(mdl);
  plan::FunctionPlanReward reward(
      [](std::span<const double> s, int) { return -s[0] * s[0]; });
  std::vector<double> window(3 * 32, 0.1);

  plan::PlanConfig cfg;
  cfg.n_particle = 2048;
  cfg.k_plan = 50;

  for (int t : {1, threads == 1 ? 2 : threads}) {
    cfg.threads = t;
    const num::RngStream rng(7);
    const auto t0 = Clock::now();
    const auto res = plan::plan(pm, window, reward, cfg, rng);
    const double dt = ms_since(t0);
    std::cout << "plan      threads=" << t << "  " << dt << " ms  (h* = "
              << res.h_star[0] << ")\n";
  }

  const int K = 10, L = 32;
  std::vector<double> s(K * 32, 0.2), h(K * 1, 0.0);
  model::Proposal prop = model::Proposal::zero(K, 1, 3);
  for (int t : {1, threads == 1 ? 2 : threads}) {
    num::RngStream rng(11);
    const auto t0 = Clock::now();
    double acc = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const auto rep_rng = rng.derive(rep);
      num::RngStream local = rep_rng;
      acc += model::elbo_estimate(mdl, s, h, prop, L, local, K, t).elbo;
    }
    const double dt = ms_since(t0);
    std::cout << "elbo x50  threads=" << t << "  " << dt << " ms  (mean = "
              << acc / 50.0 << ")\n";
  }
  return 0;
}
