#include "model/apiae.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "num/parallel.hpp"

namespace dish::model {

Proposal Proposal::zero(int K, int d_h, int d_z) {
  Proposal p;
  p.u.assign(static_cast<std::size_t>(K - 1) * d_h, 0.0);
  p.q0_mean.assign(d_z, 0.0);
  p.q0_logstd.assign(d_z, 0.0);
  return p;
}

Proposal Proposal::from_inference(const LatentModel& m,
                                  std::span<const double> window, int K) {
  const auto g = m.infer_initial(window);
  Proposal p;
  p.u.assign(static_cast<std::size_t>(K - 1) * m.config().d_h, 0.0);
  p.q0_mean = g.mean;
  p.q0_logstd = g.log_std;
  return p;
}

PathNoise PathNoise::draw(num::RngStream& rng, int K, int d_z, int d_h) {
  PathNoise n;
  n.z1_eps = rng.normal_vec(d_z);
  n.w = rng.normal_vec(static_cast<std::size_t>(K - 1) * d_h);
  return n;
}

LatentPath path_log_weight(const LatentModel& m, std::span<const double> s,
                           std::span<const double> h, const Proposal& prop,
                           const PathNoise& noise, int K) {
  const int dz = m.config().d_z, dh = m.config().d_h, D = m.config().obs_dim;
  if (K < 2) throw std::invalid_argument("path_log_weight: K must be >= 2");
  if (static_cast<int>(s.size()) != K * D)
    throw std::invalid_argument("path_log_weight: observation size mismatch");
  if (static_cast<int>(h.size()) != K * dh)
    throw std::invalid_argument("path_log_weight: command size mismatch");
  if (static_cast<int>(prop.u.size()) != (K - 1) * dh ||
      static_cast<int>(noise.w.size()) != (K - 1) * dh ||
      static_cast<int>(noise.z1_eps.size()) != dz)
    throw std::invalid_argument("path_log_weight: proposal/noise size mismatch");

  LatentPath path;
  path.z.assign(static_cast<std::size_t>(K) * dz, 0.0);
  path.w = noise.w;

  // z1 = q0_mean + exp(q0_logstd) * eps.
  for (int i = 0; i < dz; ++i)
    path.z[i] = prop.q0_mean[i] + std::exp(prop.q0_logstd[i]) * noise.z1_eps[i];

  num::DiagGaussian q0;
  q0.mean = prop.q0_mean;
  q0.log_std = prop.q0_logstd;
  const double log_p0 =
      num::std_normal_logpdf({path.z.data(), static_cast<std::size_t>(dz)});
  const double log_q0 =
      num::gaussian_logpdf({path.z.data(), static_cast<std::size_t>(dz)}, q0);

  num::MlpWorkspace ws;
  std::vector<double> mean, stdv, eff(dh);
  double loglik = 0.0;
  for (int k = 0; k < K; ++k) {
    std::span<const double> zk{path.z.data() + static_cast<std::size_t>(k) * dz,
                               static_cast<std::size_t>(dz)};
    m.decode_into(zk, ws, mean, stdv);
    double lk = -0.5 * 1.8378770664093454836 * D;
    for (int i = 0; i < D; ++i) {
      const double r = (s[static_cast<std::size_t>(k) * D + i] - mean[i]) / stdv[i];
      lk += -std::log(stdv[i]) - 0.5 * r * r;
    }
    if (!std::isfinite(lk))
      throw std::runtime_error(
          "path_log_weight: non-finite decoder likelihood at step " +
          std::to_string(k));
    loglik += lk;

    if (k + 1 < K) {
      for (int j = 0; j < dh; ++j)
        eff[j] = h[static_cast<std::size_t>(k) * dh + j] +
                 prop.u[static_cast<std::size_t>(k) * dh + j] +
                 noise.w[static_cast<std::size_t>(k) * dh + j];
      std::span<double> znext{path.z.data() + static_cast<std::size_t>(k + 1) * dz,
                              static_cast<std::size_t>(dz)};
      m.step_effective(zk, eff, znext, ws);
    }
  }

  double control = 0.0;
  for (int k = 0; k + 1 < K; ++k)
    for (int j = 0; j < dh; ++j) {
      const double u = prop.u[static_cast<std::size_t>(k) * dh + j];
      control += 0.5 * u * u + u * noise.w[static_cast<std::size_t>(k) * dh + j];
    }

  path.state_cost = -(log_p0 - log_q0) - loglik;
  path.control_cost = control;
  path.log_weight = -path.state_cost - path.control_cost;
  return path;
}

namespace {

struct WeightStats {
  double elbo = 0.0;
  double se = 0.0;
  double ess = 0.0;
  std::vector<double> normalized;
};

WeightStats weight_stats(const std::vector<double>& lw) {
  const std::size_t L = lw.size();
  WeightStats st;
  const double m = *std::max_element(lw.begin(), lw.end());
  double zsum = 0.0;
  std::vector<double> x(L);
  for (std::size_t i = 0; i < L; ++i) {
    x[i] = std::exp(lw[i] - m);
    zsum += x[i];
  }
  const double zbar = zsum / static_cast<double>(L);
  st.elbo = m + std::log(zbar);
  st.normalized.resize(L);
  double w2 = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    st.normalized[i] = x[i] / zsum;
    w2 += st.normalized[i] * st.normalized[i];
  }
  st.ess = 1.0 / w2;
  if (L > 1) {
    double var = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      const double d = x[i] - zbar;
      var += d * d;
    }
    var /= static_cast<double>(L - 1);
    st.se = std::sqrt(var / static_cast<double>(L)) / zbar;
  }
  return st;
}

}  // namespace

ElboReport elbo_estimate(const LatentModel& m, std::span<const double> s,
                         std::span<const double> h, const Proposal& prop,
                         int L, num::RngStream& rng, int K, int threads) {
  if (L < 1) throw std::invalid_argument("elbo_estimate: L must be >= 1");
  const int dz = m.config().d_z, dh = m.config().d_h;
  std::vector<double> lw(L);
  num::parallel_for(static_cast<std::size_t>(L), threads, [&](std::size_t i) {
    num::RngStream path_rng = rng.derive(i);
    const PathNoise noise = PathNoise::draw(path_rng, K, dz, dh);
    lw[i] = path_log_weight(m, s, h, prop, noise, K).log_weight;
  });
  bool any_finite = false;
  for (double v : lw) any_finite = any_finite || v > -1e300;
  if (!any_finite)
    throw std::runtime_error("elbo_estimate: all path weights underflowed");

  const auto st = weight_stats(lw);
  ElboReport rep;
  rep.elbo = st.elbo;
  rep.standard_error = st.se;
  rep.normalized_weights = st.normalized;
  rep.effective_sample_size = st.ess;
  return rep;
}

std::pair<Proposal, ElboReport> apiae_adapt(const LatentModel& m,
                                            std::span<const double> s,
                                            std::span<const double> h,
                                            Proposal prop, int R, int L,
                                            num::RngStream& rng, int K,
                                            int threads) {
  if (R < 1) throw std::invalid_argument("apiae_adapt: R must be >= 1");
  const int dz = m.config().d_z, dh = m.config().d_h;

  ElboReport last;
  std::vector<double> per_round;
  bool all_degenerate = true;

  std::vector<double> lw(L);
  std::vector<PathNoise> noises(L);
  std::vector<std::vector<double>> z1(L);

  for (int r = 0; r < R; ++r) {
    num::RngStream round_rng = rng.derive(r);
    num::parallel_for(static_cast<std::size_t>(L), threads, [&](std::size_t i) {
      num::RngStream path_rng = round_rng.derive(i);
      noises[i] = PathNoise::draw(path_rng, K, dz, dh);
      const LatentPath p = path_log_weight(m, s, h, prop, noises[i], K);
      lw[i] = p.log_weight;
      z1[i].assign(p.z.begin(), p.z.begin() + dz);
    });

    const auto st = weight_stats(lw);
    per_round.push_back(st.elbo);
    if (st.ess >= 1.0 + 1e-9) all_degenerate = false;

    last = ElboReport{};
    last.elbo = st.elbo;
    last.standard_error = 0.0;
    last.normalized_weights = st.normalized;
    last.effective_sample_size = st.ess;

    // Path-integral update: shift controls by the weighted noise mean and
    // refit q0 to the weighted z1 ensemble.
    for (int k = 0; k + 1 < K; ++k)
      for (int j = 0; j < dh; ++j) {
        double acc = 0.0;
        for (int i = 0; i < L; ++i)
          acc += st.normalized[i] *
                 noises[i].w[static_cast<std::size_t>(k) * dh + j];
        prop.u[static_cast<std::size_t>(k) * dh + j] += acc;
      }

    double w2 = 0.0;
    for (double wi : st.normalized) w2 += wi * wi;
    // Weighted-moment variance with a clamped Bessel-style correction; a
    // finite weighted ensemble understates the posterior spread.
    const double correction = std::clamp(1.0 / std::max(1e-12, 1.0 - w2), 1.0, 3.0);
    for (int d = 0; d < dz; ++d) {
      double mean = 0.0;
      for (int i = 0; i < L; ++i) mean += st.normalized[i] * z1[i][d];
      double var = 0.0;
      for (int i = 0; i < L; ++i) {
        const double dd = z1[i][d] - mean;
        var += st.normalized[i] * dd * dd;
      }
      var = std::max(var * correction, 1e-8);
      prop.q0_mean[d] = mean;
      prop.q0_logstd[d] = 0.5 * std::log(var);
    }
  }

  last.per_adaptation_elbo = per_round;
  last.degenerate = all_degenerate;
  return {std::move(prop), std::move(last)};
}

}  // namespace dish::model
