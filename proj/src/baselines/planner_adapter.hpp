#pragma once

#include <cmath>

#include "baselines/baseline.hpp"
#include "num/mlp.hpp"
#include "planner/model_iface.hpp"

namespace dish::baselines {

/// Lets the particle planner search over a baseline's input variable
/// (actions for sas/zaz, commands for shs). The planner state is the raw
/// observation (sas/shs) or the VAE latent (zaz).
class BaselinePlannerModel final : public plan::PlannerModel {
 public:
  explicit BaselinePlannerModel(const BaselineModel& m) : m_(&m) {
    m.validate();
  }

  int latent_dim() const override { return m_->state_dim(); }
  int command_dim() const override { return m_->input_dim(); }
  int obs_dim() const override { return m_->obs_dim; }

  num::DiagGaussian infer_initial(std::span<const double> window) const override {
    const int D = m_->obs_dim;
    const std::span<const double> last =
        window.subspan(window.size() - static_cast<std::size_t>(D));
    if (m_->kind == BaselineKind::kZaz) return m_->vae->encode(last);
    num::DiagGaussian g;
    g.mean.assign(last.begin(), last.end());
    g.log_std.assign(last.size(), std::log(1e-9));  // deterministic init
    return g;
  }

  void step(std::span<const double> z, std::span<const double> eff,
            std::span<double> z_next) const override {
    thread_local num::MlpWorkspace ws;
    thread_local std::vector<double> in;
    const int xd = m_->state_dim(), ud = m_->input_dim();
    in.resize(xd + ud);
    std::copy(z.begin(), z.end(), in.begin());
    std::copy(eff.begin(), eff.end(), in.begin() + xd);
    num::mlp_forward(m_->trans_spec, m_->params.segment("trans"), in, ws,
                     z_next);
  }

  num::DiagGaussian decode(std::span<const double> z) const override {
    num::DiagGaussian g;
    if (m_->kind == BaselineKind::kZaz) {
      g.mean = m_->vae->decode_mean(z);
      const auto ols = m_->vae->obs_logstd();
      g.log_std.assign(ols.begin(), ols.end());
    } else {
      g.mean.assign(z.begin(), z.end());
      g.log_std.assign(z.size(), std::log(1e-9));
    }
    return g;
  }

 private:
  const BaselineModel* m_;
};

}  // namespace dish::baselines
