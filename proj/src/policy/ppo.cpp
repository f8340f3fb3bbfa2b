#include "policy/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "num/adam.hpp"
#include "num/gaussian.hpp"

namespace dish::policy {

void PpoConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0))
    throw std::invalid_argument("ppo: clip_eps must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("ppo: gamma must lie in (0, 1]");
  if (epochs < 1 || minibatch < 1)
    throw std::invalid_argument("ppo: epochs and minibatch must be positive");
}

double regularized_reward(double reward, double log_prob,
                          double prior_log_prob, double beta) {
  if (!std::isfinite(reward) || !std::isfinite(log_prob) ||
      !std::isfinite(prior_log_prob))
    throw std::invalid_argument("regularized_reward: non-finite input");
  return reward - beta * (log_prob - prior_log_prob);
}

PpoTrainer::PpoTrainer(Policy& policy, const PpoConfig& cfg)
    : policy_(&policy),
      cfg_(cfg),
      actor_opt_(policy.actor_param_count(), cfg.lr_actor),
      value_opt_(policy.params().size() - policy.actor_param_count(),
                 cfg.lr_value) {
  cfg.validate();
}

PpoStats PpoTrainer::update(std::span<const TransitionRecord> buffer) {
  if (buffer.empty()) throw std::invalid_argument("ppo: empty buffer");
  Policy& pol = *policy_;
  const auto& pcfg = pol.config();
  const int ad = pcfg.action_dim;
  const std::size_t n = buffer.size();
  const std::size_t actor_np = pol.actor_param_count();
  const std::size_t total_np = pol.params().size();

  // Snapshot for rollback on a non-finite loss.
  std::vector<double> snapshot(pol.params().values().begin(),
                               pol.params().values().end());

  // Shaped rewards: fold the action-prior KL integrand into the reward.
  num::DiagGaussian prior;
  prior.mean.assign(ad, 0.0);
  prior.log_std.assign(ad, std::log(cfg_.prior_std));
  std::vector<double> shaped(n);
  double prior_kl_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double prior_lp = num::gaussian_logpdf(buffer[i].a, prior);
    const double term = cfg_.beta * (buffer[i].log_prob - prior_lp);
    prior_kl_sum += term;
    shaped[i] =
        regularized_reward(buffer[i].reward, buffer[i].log_prob, prior_lp,
                           cfg_.beta);
  }

  // Values and GAE over contiguous episodes (done closes each episode).
  std::vector<double> value(n), adv(n), ret(n);
  for (std::size_t i = 0; i < n; ++i)
    value[i] = pol.value(buffer[i].task_idx, buffer[i].s);
  double mean_return = 0.0;
  std::size_t ep_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool ep_end = buffer[i].done || i + 1 == n ||
                        buffer[i + 1].low_tick <= buffer[i].low_tick;
    if (!ep_end) continue;
    double gae = 0.0;
    for (std::size_t t = i + 1; t-- > ep_start;) {
      const bool terminal = (t == i);
      const double next_v = terminal ? 0.0 : value[t + 1];
      const double delta = shaped[t] + cfg_.gamma * next_v - value[t];
      gae = delta + cfg_.gamma * cfg_.gae_lambda * (terminal ? 0.0 : gae);
      adv[t] = gae;
      ret[t] = adv[t] + value[t];
    }
    for (std::size_t t = ep_start; t <= i; ++t) mean_return += shaped[t];
    ep_start = i + 1;
  }
  mean_return /= static_cast<double>(n);

  // Normalize advantages unless they are (numerically) all equal.
  {
    double m = 0.0;
    for (double a : adv) m += a;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - m) * (a - m);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd > 1e-8)
      for (auto& a : adv) a = (a - m) / sd;
  }

  num::RngStream rng(cfg_.seed ^ (0x9e3779b97f4a7c15ULL * ++update_count_));
  const auto log_std_raw = pol.params().segment("log_std");

  std::vector<double> grad(total_np);
  std::vector<double> in(pcfg.obs_dim + pcfg.d_h);
  num::MlpWorkspace ws, bw;
  std::vector<double> mean(ad);

  PpoStats stats;
  stats.n_records = n;
  stats.mean_prior_kl_term = prior_kl_sum / static_cast<double>(n);
  stats.mean_return = mean_return;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  double clip_count = 0.0, clip_total = 0.0;
  bool first_mb = true;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
    for (std::size_t mb = 0; mb < n; mb += cfg_.minibatch) {
      const std::size_t mb_end = std::min(n, mb + cfg_.minibatch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double surrogate = 0.0, vloss = 0.0;
      const auto clamped = pol.clamped_log_std();

      for (std::size_t oi = mb; oi < mb_end; ++oi) {
        const TransitionRecord& rec = buffer[order[oi]];
        const double A = adv[order[oi]];

        std::copy(rec.s.begin(), rec.s.end(), in.begin());
        std::copy(rec.h.begin(), rec.h.end(), in.begin() + pcfg.obs_dim);
        num::mlp_forward(pol.actor_spec(), pol.params().segment("actor"), in,
                         ws, mean);
        double logp = -0.5 * 1.8378770664093454836 * ad;
        for (int j = 0; j < ad; ++j) {
          const double sd = std::exp(clamped[j]);
          const double zz = (rec.a[j] - mean[j]) / sd;
          logp += -clamped[j] - 0.5 * zz * zz;
        }
        const double ratio = std::exp(logp - rec.log_prob);
        const bool clipped = (A >= 0.0 && ratio > 1.0 + cfg_.clip_eps) ||
                             (A < 0.0 && ratio < 1.0 - cfg_.clip_eps);
        surrogate += std::min(ratio * A,
                              std::clamp(ratio, 1.0 - cfg_.clip_eps,
                                         1.0 + cfg_.clip_eps) *
                                  A);
        clip_total += 1.0;
        if (clipped) clip_count += 1.0;
        if (!clipped) {
          const double coeff = A * ratio;  // d surrogate / d logp
          std::vector<double> up(ad);
          for (int j = 0; j < ad; ++j) {
            const double sd = std::exp(clamped[j]);
            const double diff = rec.a[j] - mean[j];
            up[j] = coeff * diff / (sd * sd);
            // log-std gradient, masked where the clamp is active
            const double g_ls = coeff * (-1.0 + diff * diff / (sd * sd));
            const bool at_lo = log_std_raw[j] <= kLogStdMin;
            const bool at_hi = log_std_raw[j] >= kLogStdMax;
            if (!(at_lo && g_ls < 0.0) && !(at_hi && g_ls > 0.0)) {
              const auto& seg = pol.params().segment_info("log_std");
              grad[seg.offset + j] += g_ls;
            }
          }
          std::vector<double> in_grad(in.size(), 0.0);
          const auto& aseg = pol.params().segment_info("actor");
          num::mlp_backward(pol.actor_spec(), pol.params().segment("actor"), ws,
                            up, bw,
                            std::span<double>(grad.data() + aseg.offset,
                                              aseg.len),
                            in_grad);
        }

        // value regression (descends (V - R)^2)
        std::vector<double> vout(1);
        num::mlp_forward(pol.value_spec(),
                         pol.params().segment(pol.value_segment(rec.task_idx)),
                         rec.s, ws, vout);
        const double verr = vout[0] - ret[order[oi]];
        vloss += verr * verr;
        std::vector<double> vup{2.0 * verr};
        std::vector<double> vin_grad(rec.s.size(), 0.0);
        const auto& vseg =
            pol.params().segment_info(pol.value_segment(rec.task_idx));
        num::mlp_backward(pol.value_spec(),
                          pol.params().segment(pol.value_segment(rec.task_idx)),
                          ws, vup, bw,
                          std::span<double>(grad.data() + vseg.offset, vseg.len),
                          vin_grad);
      }

      const double mb_n = static_cast<double>(mb_end - mb);
      for (auto& g : grad) g /= mb_n;
      for (double g : grad)
        if (!std::isfinite(g)) {
          std::copy(snapshot.begin(), snapshot.end(),
                    pol.params().values().begin());
          throw std::runtime_error("ppo: non-finite gradient; update aborted");
        }
      if (first_mb) {
        stats.actor_objective = surrogate / mb_n;
        first_mb = false;
      }
      stats.value_loss = vloss / mb_n;

      actor_opt_.step(pol.params().values().subspan(0, actor_np),
                      std::span<const double>(grad.data(), actor_np), +1.0);
      value_opt_.step(pol.params().values().subspan(actor_np),
                      std::span<const double>(grad.data() + actor_np,
                                              total_np - actor_np),
                      -1.0);
    }
  }

  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    kl += buffer[i].log_prob - pol.log_prob(buffer[i].s, buffer[i].h, buffer[i].a);
  stats.mean_kl = kl / static_cast<double>(n);
  stats.clip_fraction = clip_total > 0.0 ? clip_count / clip_total : 0.0;
  return stats;
}

}  // namespace dish::policy
