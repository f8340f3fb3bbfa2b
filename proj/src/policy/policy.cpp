#include "policy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dish::policy {

namespace {
std::vector<int> chain(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(out);
  return sizes;
}
}  // namespace

Policy::Policy(const PolicyConfig& cfg, num::RngStream& init_rng) : cfg_(cfg) {
  actor_spec_ = num::MlpSpec(
      chain(cfg.obs_dim + cfg.d_h, cfg.actor_hidden, cfg.action_dim),
      num::Act::kTanh, num::OutAct::kLinear);
  value_spec_ = num::MlpSpec(chain(cfg.obs_dim, cfg.value_hidden, 1),
                             num::Act::kTanh, num::OutAct::kLinear);
  params_.add_segment("actor", actor_spec_.weight_count());
  params_.add_segment("log_std", cfg.action_dim);
  actor_end_ = params_.size();
  for (int t = 0; t < cfg.n_tasks; ++t)
    params_.add_segment(value_segment(t), value_spec_.weight_count());

  num::mlp_init(actor_spec_, params_.segment("actor"), init_rng, 0.5);
  for (auto& v : params_.segment("log_std")) v = cfg.log_std_init;
  for (int t = 0; t < cfg.n_tasks; ++t)
    num::mlp_init(value_spec_, params_.segment(value_segment(t)), init_rng, 0.5);
}

std::string Policy::value_segment(int task_idx) const {
  if (task_idx < 0 || task_idx >= cfg_.n_tasks)
    throw std::out_of_range("policy: unknown task index " +
                            std::to_string(task_idx));
  return "value_" + std::to_string(task_idx);
}

std::vector<double> Policy::action_mean(std::span<const double> s,
                                        std::span<const double> h) const {
  thread_local num::MlpWorkspace ws;
  thread_local std::vector<double> in;
  in.resize(s.size() + h.size());
  std::copy(s.begin(), s.end(), in.begin());
  std::copy(h.begin(), h.end(), in.begin() + s.size());
  std::vector<double> out(cfg_.action_dim);
  num::mlp_forward(actor_spec_, params_.segment("actor"), in, ws, out);
  return out;
}

std::vector<double> Policy::clamped_log_std() const {
  const auto raw = params_.segment("log_std");
  std::vector<double> ls(raw.begin(), raw.end());
  for (auto& v : ls) v = std::clamp(v, kLogStdMin, kLogStdMax);
  return ls;
}

Policy::Sample Policy::sample(std::span<const double> s,
                              std::span<const double> h,
                              num::RngStream& rng) const {
  num::DiagGaussian g;
  g.mean = action_mean(s, h);
  g.log_std = clamped_log_std();
  Sample out;
  out.action = num::gaussian_sample(rng, g);
  out.log_prob = num::gaussian_logpdf(out.action, g);
  return out;
}

double Policy::log_prob(std::span<const double> s, std::span<const double> h,
                        std::span<const double> a) const {
  num::DiagGaussian g;
  g.mean = action_mean(s, h);
  g.log_std = clamped_log_std();
  return num::gaussian_logpdf(a, g);
}

double Policy::value(int task_idx, std::span<const double> s) const {
  thread_local num::MlpWorkspace ws;
  std::vector<double> out(1);
  num::mlp_forward(value_spec_, params_.segment(value_segment(task_idx)), s, ws,
                   out);
  return out[0];
}

}  // namespace dish::policy
