#include "planner/particle_plan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "num/parallel.hpp"

namespace dish::plan {

std::string plan_mode_name(PlanMode m) {
  switch (m) {
    case PlanMode::kPf: return "pf";
    case PlanMode::kAdaptivePi: return "adaptive_pi";
    case PlanMode::kCem: return "cem";
  }
  return "?";
}

PlanMode plan_mode_from_name(const std::string& name) {
  if (name == "pf") return PlanMode::kPf;
  if (name == "adaptive_pi") return PlanMode::kAdaptivePi;
  if (name == "cem") return PlanMode::kCem;
  throw std::invalid_argument("unknown plan mode '" + name + "'");
}

void PlanConfig::validate() const {
  if (n_particle < 1) throw std::invalid_argument("plan: n_particle must be >= 1");
  if (k_plan < 1) throw std::invalid_argument("plan: k_plan must be >= 1");
  if (!(ess_threshold_frac > 0.0 && ess_threshold_frac <= 1.0))
    throw std::invalid_argument("plan: ess_threshold_frac must lie in (0, 1]");
  if (mode == PlanMode::kCem && resampling != ResampleScheme::kNone)
    throw std::invalid_argument("plan: cem mode requires resampling = none");
  if (mode == PlanMode::kAdaptivePi && iterations < 2)
    throw std::invalid_argument("plan: adaptive_pi mode requires iterations > 1");
  if (mode == PlanMode::kPf && iterations != 1)
    throw std::invalid_argument("plan: pf mode runs exactly one iteration");
}

std::vector<double> ParticleSet::normalized_weights() const {
  std::vector<double> w(n);
  double zsum = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::exp(log_w[i]);
    zsum += w[i];
  }
  for (auto& v : w) v /= zsum;
  return w;
}

void ParticleSet::normalize() {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, log_w[i]);
  if (!std::isfinite(m))
    throw std::runtime_error("degenerate plan at step " + std::to_string(step) +
                             ": all particle weights underflowed");
  for (int i = 0; i < n; ++i) log_w[i] -= m;
  const auto w = normalized_weights();
  double w2 = 0.0;
  for (double v : w) w2 += v * v;
  ess = 1.0 / w2;
}

void propagate_and_weight(ParticleSet& ps, const PlannerModel& model,
                          const PlanRewardFn& reward,
                          std::span<const double> u_step,
                          const num::RngStream& step_rng, int threads,
                          std::vector<double>* decoded_mean_scratch) {
  const int n = ps.n, dz = ps.d_z, dh = ps.d_h;
  const int D = model.obs_dim();
  if (ps.step >= ps.k_plan)
    throw std::logic_error("propagate_and_weight: past the planning horizon");
  if (static_cast<int>(u_step.size()) != dh)
    throw std::invalid_argument("propagate_and_weight: offset size mismatch");
  const int k = ps.step;
  if (decoded_mean_scratch != nullptr)
    decoded_mean_scratch->assign(static_cast<std::size_t>(n) * D, 0.0);

  std::vector<double> step_reward(n);
  std::atomic<bool> bad{false};

  num::parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    num::RngStream rng = step_rng.derive(i);
    thread_local std::vector<double> eff, znext, sdec;
    eff.resize(dh);
    znext.resize(dz);
    for (int j = 0; j < dh; ++j) {
      const double w = rng.normal();
      ps.noise_tape[(i * ps.k_plan + k) * dh + j] = w;
      if (k == 0) ps.w1[i * dh + j] = w;
      eff[j] = u_step[j] + w;
    }
    model.step({ps.z.data() + i * dz, static_cast<std::size_t>(dz)}, eff, znext);
    std::copy(znext.begin(), znext.end(), ps.z.begin() + i * dz);

    const num::DiagGaussian g =
        model.decode({ps.z.data() + i * dz, static_cast<std::size_t>(dz)});
    sdec.resize(D);
    for (int d = 0; d < D; ++d)
      sdec[d] = g.mean[d] + std::exp(g.log_std[d]) * rng.normal();
    if (decoded_mean_scratch != nullptr)
      std::copy(g.mean.begin(), g.mean.end(),
                decoded_mean_scratch->begin() + i * D);

    const double r = reward(
        sdec, k + 1,
        {ps.aux.data() + i * ps.aux_dim, static_cast<std::size_t>(ps.aux_dim)});
    if (!std::isfinite(r)) bad.store(true);
    step_reward[i] = r;
  });
  if (bad.load())
    throw std::runtime_error("propagate_and_weight: non-finite reward at step " +
                             std::to_string(k + 1));

  for (int i = 0; i < n; ++i) {
    ps.log_w[i] += step_reward[i];
    ps.acc_reward[i] += step_reward[i];
  }
  ps.step = k + 1;
}

void resample_systematic(ParticleSet& ps, num::RngStream& rng) {
  const int n = ps.n;
  const auto w = ps.normalized_weights();
  std::vector<int> parent(n);
  const double u0 = rng.uniform();
  double cum = w[0];
  int i = 0;
  for (int m = 0; m < n; ++m) {
    const double pos = (m + u0) / n;
    while (pos > cum && i + 1 < n) cum += w[++i];
    parent[m] = i;
  }

  auto gather = [&](std::vector<double>& field, int stride) {
    if (stride == 0) return;
    std::vector<double> next(field.size());
    for (int m = 0; m < n; ++m)
      std::copy(field.begin() + static_cast<std::size_t>(parent[m]) * stride,
                field.begin() + static_cast<std::size_t>(parent[m] + 1) * stride,
                next.begin() + static_cast<std::size_t>(m) * stride);
    field = std::move(next);
  };
  gather(ps.z, ps.d_z);
  gather(ps.w1, ps.d_h);
  gather(ps.noise_tape, ps.k_plan * ps.d_h);
  gather(ps.aux, ps.aux_dim);
  gather(ps.acc_reward, 1);

  std::fill(ps.log_w.begin(), ps.log_w.end(), 0.0);
  ps.ess = static_cast<double>(n);
}

namespace {

PlanResult run_plan(const PlannerModel& model, std::span<const double> window,
                    const PlanRewardFn& reward, const PlanConfig& cfg,
                    const num::RngStream& rng) {
  cfg.validate();
  const int n = cfg.n_particle, dz = model.latent_dim(), dh = model.command_dim();
  const int D = model.obs_dim();
  const int iters = cfg.mode == PlanMode::kPf ? 1 : cfg.iterations;

  // Per-step command offsets accumulated across iterations.
  std::vector<double> u(static_cast<std::size_t>(cfg.k_plan) * dh, 0.0);

  PlanResult result;
  result.h_star.assign(dh, 0.0);

  const num::DiagGaussian q0 = model.infer_initial(window);

  std::vector<double> dec_scratch;
  for (int it = 0; it < iters; ++it) {
    const num::RngStream iter_rng = rng.derive(it);
    const bool last_iter = it + 1 == iters;

    ParticleSet ps;
    ps.n = n;
    ps.d_z = dz;
    ps.d_h = dh;
    ps.k_plan = cfg.k_plan;
    ps.aux_dim = reward.aux_dim();
    ps.z.resize(static_cast<std::size_t>(n) * dz);
    ps.w1.assign(static_cast<std::size_t>(n) * dh, 0.0);
    ps.noise_tape.assign(static_cast<std::size_t>(n) * cfg.k_plan * dh, 0.0);
    ps.aux.assign(static_cast<std::size_t>(n) * ps.aux_dim, 0.0);
    ps.acc_reward.assign(n, 0.0);
    ps.log_w.assign(n, 0.0);

    const num::RngStream init_rng = iter_rng.derive(0);
    num::parallel_for(static_cast<std::size_t>(n), cfg.threads,
                      [&](std::size_t i) {
      num::RngStream r = init_rng.derive(i);
      for (int d = 0; d < dz; ++d)
        ps.z[i * dz + d] = q0.mean[d] + std::exp(q0.log_std[d]) * r.normal();
      reward.init_aux(
          {ps.aux.data() + i * ps.aux_dim, static_cast<std::size_t>(ps.aux_dim)});
    });

    if (last_iter) {
      result.predicted_obs_mean.assign(cfg.k_plan, std::vector<double>(D, 0.0));
      result.predicted_aux_mean.assign(cfg.k_plan,
                                       std::vector<double>(ps.aux_dim, 0.0));
      result.diag.clear();
    }

    for (int k = 0; k < cfg.k_plan; ++k) {
      const num::RngStream step_rng = iter_rng.derive(k + 1);
      propagate_and_weight(ps, model, reward,
                           {u.data() + static_cast<std::size_t>(k) * dh,
                            static_cast<std::size_t>(dh)},
                           step_rng, cfg.threads,
                           last_iter ? &dec_scratch : nullptr);
      ps.normalize();

      const auto wbar = ps.normalized_weights();
      if (last_iter) {
        auto& om = result.predicted_obs_mean[k];
        for (int i = 0; i < n; ++i)
          for (int d = 0; d < D; ++d)
            om[d] += wbar[i] * dec_scratch[static_cast<std::size_t>(i) * D + d];
        auto& am = result.predicted_aux_mean[k];
        for (int i = 0; i < n; ++i)
          for (int d = 0; d < ps.aux_dim; ++d)
            am[d] += wbar[i] * ps.aux[static_cast<std::size_t>(i) * ps.aux_dim + d];
      }

      PlanStepDiag dg;
      dg.step = k + 1;
      dg.ess = ps.ess;
      double best_r = -std::numeric_limits<double>::infinity(), mean_r = 0.0;
      for (int i = 0; i < n; ++i) {
        best_r = std::max(best_r, ps.acc_reward[i]);
        mean_r += ps.acc_reward[i];
      }
      dg.best_reward = best_r;
      dg.mean_reward = mean_r / n;

      if (cfg.resampling == ResampleScheme::kSystematicOnEss &&
          ps.ess < cfg.ess_threshold_frac * n && k + 1 < cfg.k_plan) {
        num::RngStream res_rng = iter_rng.derive(0x7e5a000 + k);
        resample_systematic(ps, res_rng);
        dg.resampled = true;
      }
      if (last_iter) result.diag.push_back(dg);
    }

    const auto wbar = ps.normalized_weights();
    double score = 0.0;
    for (int i = 0; i < n; ++i) score += wbar[i] * ps.acc_reward[i];
    result.per_iteration_score.push_back(score);

    // Path-integral command update from the ancestry-resolved noise tape.
    for (int k = 0; k < cfg.k_plan; ++k)
      for (int j = 0; j < dh; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += wbar[i] *
                 ps.noise_tape[(static_cast<std::size_t>(i) * cfg.k_plan + k) * dh + j];
        u[static_cast<std::size_t>(k) * dh + j] += acc;
      }
  }

  for (int j = 0; j < dh; ++j) result.h_star[j] = u[j];
  return result;
}

}  // namespace

PlanResult plan(const PlannerModel& model, std::span<const double> window,
                const PlanRewardFn& reward, const PlanConfig& cfg,
                const num::RngStream& rng) {
  return run_plan(model, window, reward, cfg, rng);
}

PlanResult plan_iterated(const PlannerModel& model,
                         std::span<const double> window,
                         const PlanRewardFn& reward, const PlanConfig& cfg,
                         const num::RngStream& rng) {
  if (cfg.mode != PlanMode::kAdaptivePi)
    throw std::invalid_argument("plan_iterated: mode must be adaptive_pi");
  return run_plan(model, window, reward, cfg, rng);
}

PlanResult plan_cem(const PlannerModel& model, std::span<const double> window,
                    const PlanRewardFn& reward, const PlanConfig& cfg,
                    const num::RngStream& rng) {
  if (cfg.mode != PlanMode::kCem)
    throw std::invalid_argument("plan_cem: mode must be cem");
  return run_plan(model, window, reward, cfg, rng);
}

}  // namespace dish::plan
