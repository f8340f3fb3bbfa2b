#include "baselines/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "num/adam.hpp"
#include "num/gaussian.hpp"
#include "num/parallel.hpp"

namespace dish::baselines {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<int> chain(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(out);
  return sizes;
}
}  // namespace

std::string baseline_kind_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::kSas: return "sas";
    case BaselineKind::kShs: return "shs";
    case BaselineKind::kZaz: return "zaz";
  }
  return "?";
}

BaselineKind baseline_kind_from_name(const std::string& name) {
  if (name == "sas") return BaselineKind::kSas;
  if (name == "shs") return BaselineKind::kShs;
  if (name == "zaz") return BaselineKind::kZaz;
  throw std::invalid_argument("unknown baseline kind '" + name + "'");
}

num::DiagGaussian Vae::encode(std::span<const double> s) const {
  const auto head = num::mlp_forward(enc_spec, params.segment("enc"), s);
  num::DiagGaussian g;
  g.mean.assign(head.begin(), head.begin() + d_z);
  g.log_std.resize(d_z);
  for (int i = 0; i < d_z; ++i)
    g.log_std[i] = std::log(num::softplus_floored(head[d_z + i]));
  return g;
}

std::vector<double> Vae::decode_mean(std::span<const double> z) const {
  return num::mlp_forward(dec_spec, params.segment("dec"), z);
}

double vae_elbo_and_grad(const Vae& v,
                         const std::vector<std::vector<double>>& obs_batch,
                         num::RngStream rng, std::span<double> grad) {
  const int dz = v.d_z, D = v.obs_dim;
  const auto& pv = v.params;
  auto gseg = [&](const char* name) {
    const auto& info = pv.segment_info(std::string(name));
    return grad.subspan(info.offset, info.len);
  };
  auto g_enc = gseg("enc");
  auto g_dec = gseg("dec");
  auto g_ols = gseg("obs_logstd");
  const auto ols = v.obs_logstd();

  num::MlpWorkspace enc_ws, dec_ws, bw;
  std::vector<double> head(2 * dz), z(dz), dec_m(D);
  double total = 0.0;
  for (std::size_t n = 0; n < obs_batch.size(); ++n) {
    const auto& s = obs_batch[n];
    num::RngStream r = rng.derive(n);
    const auto eps = r.normal_vec(dz);

    num::mlp_forward(v.enc_spec, pv.segment("enc"), s, enc_ws, head);
    std::vector<double> q_std(dz);
    for (int d = 0; d < dz; ++d) {
      q_std[d] = num::softplus_floored(head[dz + d]);
      z[d] = head[d] + q_std[d] * eps[d];
    }
    num::mlp_forward(v.dec_spec, pv.segment("dec"), z, dec_ws, dec_m);

    double loglik = -0.5 * kLog2Pi * D;
    for (int i = 0; i < D; ++i) {
      const double sd = std::exp(ols[i]);
      const double diff = (s[i] - dec_m[i]) / sd;
      loglik += -ols[i] - 0.5 * diff * diff;
    }
    double kl = 0.0;
    for (int d = 0; d < dz; ++d) {
      const double mu = head[d], sg = q_std[d];
      kl += 0.5 * (sg * sg + mu * mu - 1.0) - std::log(sg);
    }
    total += loglik - kl;

    // backward: maximize loglik - kl
    std::vector<double> up_dec(D);
    for (int i = 0; i < D; ++i) {
      const double sd = std::exp(ols[i]);
      const double diff = s[i] - dec_m[i];
      up_dec[i] = diff / (sd * sd);
      g_ols[i] += -1.0 + diff * diff / (sd * sd);
    }
    std::vector<double> dz_adj(dz, 0.0);
    num::mlp_backward(v.dec_spec, pv.segment("dec"), dec_ws, up_dec, bw, g_dec,
                      dz_adj);

    std::vector<double> up_head(2 * dz);
    for (int d = 0; d < dz; ++d) {
      const double mu = head[d], sg = q_std[d];
      up_head[d] = dz_adj[d] - mu;  // reparam + dKL/dmu
      const double dsg = dz_adj[d] * eps[d] - (sg - 1.0 / sg);
      up_head[dz + d] = dsg * sigmoid(head[dz + d]);
    }
    std::vector<double> in_grad(D, 0.0);
    num::mlp_backward(v.enc_spec, pv.segment("enc"), enc_ws, up_head, bw, g_enc,
                      in_grad);
  }
  return total / static_cast<double>(obs_batch.size());
}

Vae vae_train(const std::vector<std::vector<double>>& observations,
              const VaeTrainHyper& hyper, VaeTrainLog* log) {
  if (observations.empty())
    throw std::invalid_argument("vae_train: empty observation set");
  const int D = static_cast<int>(observations.front().size());

  Vae v;
  v.d_z = hyper.d_z;
  v.obs_dim = D;
  v.enc_spec = num::MlpSpec(chain(D, hyper.enc_hidden, 2 * hyper.d_z),
                            num::Act::kTanh, num::OutAct::kLinear);
  v.dec_spec = num::MlpSpec(chain(hyper.d_z, hyper.dec_hidden, D),
                            num::Act::kTanh, num::OutAct::kLinear);
  v.params.add_segment("enc", v.enc_spec.weight_count());
  v.params.add_segment("dec", v.dec_spec.weight_count());
  v.params.add_segment("obs_logstd", D);

  num::RngStream root(hyper.seed);
  num::RngStream init = root.derive(0);
  num::mlp_init(v.enc_spec, v.params.segment("enc"), init, 0.5);
  num::mlp_init(v.dec_spec, v.params.segment("dec"), init, 0.5);
  for (auto& x : v.params.segment("obs_logstd")) x = std::log(0.5);

  num::Adam opt(v.params.size(), hyper.lr);
  std::vector<double> grad(v.params.size());
  std::vector<std::vector<double>> batch;
  for (int step = 0; step < hyper.steps; ++step) {
    num::RngStream srng = root.derive(1000 + step);
    batch.clear();
    for (int b = 0; b < hyper.batch; ++b)
      batch.push_back(observations[srng.next_u64() % observations.size()]);
    std::fill(grad.begin(), grad.end(), 0.0);
    const double elbo =
        vae_elbo_and_grad(v, batch, srng.derive(1), grad);
    if (!std::isfinite(elbo))
      throw std::runtime_error("vae_train: non-finite loss at step " +
                               std::to_string(step));
    for (auto& g : grad) g /= static_cast<double>(batch.size());
    opt.step(v.params.values(), grad, +1.0);
    if (log != nullptr) log->elbo.push_back(elbo);
  }

  if (log != nullptr) {
    double mse = 0.0, kl_sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : observations) {
      const auto q = v.encode(s);
      const auto m = v.decode_mean(q.mean);
      for (int i = 0; i < D; ++i) mse += (s[i] - m[i]) * (s[i] - m[i]);
      for (int d = 0; d < v.d_z; ++d) {
        const double sg = std::exp(q.log_std[d]);
        kl_sum += 0.5 * (sg * sg + q.mean[d] * q.mean[d] - 1.0) - q.log_std[d];
      }
      ++count;
    }
    log->recon_mse = mse / (static_cast<double>(count) * D);
    log->mean_kl = kl_sum / static_cast<double>(count);
    log->posterior_collapse = log->mean_kl < 1e-3;
  }
  return v;
}

int BaselineModel::state_dim() const {
  return kind == BaselineKind::kZaz ? vae->d_z : obs_dim;
}

int BaselineModel::input_dim() const {
  return kind == BaselineKind::kShs ? d_h : action_dim;
}

void BaselineModel::validate() const {
  if ((kind == BaselineKind::kZaz) != vae.has_value())
    throw std::invalid_argument(
        "BaselineModel: exactly the zaz kind carries a VAE");
}

namespace {

// Open-loop unroll of one rollout with optional gradient accumulation.
double rollout_loss(const BaselineModel& m, const BaselineRollout& ro,
                    std::span<double> g_trans, bool with_grad) {
  const int D = m.obs_dim;
  const int xd = m.state_dim();
  const int ud = m.input_dim();
  const int K = static_cast<int>(ro.s.size()) / D;
  const bool zaz = m.kind == BaselineKind::kZaz;
  const std::vector<double>& drive =
      m.kind == BaselineKind::kShs ? ro.h : ro.a;

  // forward
  std::vector<std::vector<double>> x(K), dec(K);
  std::vector<num::MlpWorkspace> tws(K), dws(K);
  num::MlpWorkspace bw;
  if (zaz) {
    const auto q = m.vae->encode({ro.s.data(), static_cast<std::size_t>(D)});
    x[0] = q.mean;
  } else {
    x[0].assign(ro.s.begin(), ro.s.begin() + D);
  }

  double loss = 0.0;
  std::vector<double> in(xd + ud);
  for (int k = 0; k < K; ++k) {
    if (zaz) {
      dec[k].resize(D);
      num::mlp_forward(m.vae->dec_spec, m.vae->params.segment("dec"), x[k],
                       dws[k], dec[k]);
    }
    const std::vector<double>& pred = zaz ? dec[k] : x[k];
    for (int i = 0; i < D; ++i) {
      const double d = ro.s[static_cast<std::size_t>(k) * D + i] - pred[i];
      loss += d * d;
    }
    if (k + 1 < K) {
      std::copy(x[k].begin(), x[k].end(), in.begin());
      for (int j = 0; j < ud; ++j)
        in[xd + j] = drive[static_cast<std::size_t>(k) * ud + j];
      x[k + 1].resize(xd);
      num::mlp_forward(m.trans_spec, m.params.segment("trans"), in, tws[k],
                       x[k + 1]);
    }
  }
  if (!with_grad) return loss;

  // backward through the unrolled recursion; transition params only.
  std::vector<double> adj(xd, 0.0), adj_prev(xd), up(D), in_grad(xd + ud);
  for (int k = K - 1; k >= 0; --k) {
    std::fill(adj_prev.begin(), adj_prev.end(), 0.0);
    if (k + 1 < K) {
      // adj currently holds dLoss/dx_{k+1}
      std::fill(in_grad.begin(), in_grad.end(), 0.0);
      num::mlp_backward(m.trans_spec, m.params.segment("trans"), tws[k], adj,
                        bw, g_trans, in_grad);
      std::copy(in_grad.begin(), in_grad.begin() + xd, adj_prev.begin());
    }
    const std::vector<double>& pred = zaz ? dec[k] : x[k];
    for (int i = 0; i < D; ++i)
      up[i] = -2.0 * (ro.s[static_cast<std::size_t>(k) * D + i] - pred[i]);
    if (zaz) {
      // frozen decoder: input grad only
      std::vector<double> dec_pg(m.vae->dec_spec.weight_count(), 0.0);
      num::mlp_backward(m.vae->dec_spec, m.vae->params.segment("dec"), dws[k],
                        up, bw, dec_pg, adj_prev);
    } else {
      for (int i = 0; i < D; ++i) adj_prev[i] += up[i];
    }
    adj = adj_prev;
  }
  return loss;
}

}  // namespace

double baseline_loss_and_grad(const BaselineModel& m,
                              const std::vector<const BaselineRollout*>& batch,
                              std::span<double> grad) {
  double loss = 0.0;
  for (const auto* ro : batch) loss += rollout_loss(m, *ro, grad, true);
  return loss / static_cast<double>(batch.size());
}

double baseline_loss(const BaselineModel& m,
                     const std::vector<BaselineRollout>& rollouts) {
  double loss = 0.0;
  std::vector<double> dummy;
  for (const auto& ro : rollouts) loss += rollout_loss(m, ro, dummy, false);
  return loss / static_cast<double>(rollouts.size());
}

BaselineModel train_baseline(BaselineKind kind,
                             const std::vector<BaselineRollout>& rollouts,
                             const BaselineTrainHyper& hyper) {
  if (rollouts.empty())
    throw std::invalid_argument("train_baseline: empty rollouts");
  BaselineModel m;
  m.kind = kind;
  const int K = rollouts.front().K;
  if (K < 2) throw std::invalid_argument("train_baseline: rollouts need K >= 2");
  m.obs_dim = static_cast<int>(rollouts.front().s.size()) / K;
  m.action_dim = static_cast<int>(rollouts.front().a.size()) / K;
  m.d_h = static_cast<int>(rollouts.front().h.size()) / K;

  num::RngStream root(hyper.seed);
  if (kind == BaselineKind::kZaz) {
    std::vector<std::vector<double>> obs;
    for (const auto& ro : rollouts) {
      const int rK = static_cast<int>(ro.s.size()) / m.obs_dim;
      for (int k = 0; k < rK; ++k)
        obs.emplace_back(ro.s.begin() + static_cast<std::size_t>(k) * m.obs_dim,
                         ro.s.begin() + static_cast<std::size_t>(k + 1) * m.obs_dim);
    }
    VaeTrainHyper vh = hyper.vae;
    vh.seed = hyper.seed ^ 0xabcd;
    m.vae = vae_train(obs, vh);
  }

  const int xd = m.state_dim(), ud = m.input_dim();
  m.trans_spec = num::MlpSpec(chain(xd + ud, hyper.hidden, xd), num::Act::kTanh,
                              num::OutAct::kLinear);
  m.params.add_segment("trans", m.trans_spec.weight_count());
  num::RngStream init = root.derive(1);
  num::mlp_init(m.trans_spec, m.params.segment("trans"), init, 0.5);
  m.validate();

  num::Adam opt(m.params.size(), hyper.lr);
  std::vector<double> grad(m.params.size());
  for (int step = 0; step < hyper.steps; ++step) {
    num::RngStream srng = root.derive(1000 + step);
    std::vector<const BaselineRollout*> batch;
    for (int b = 0; b < hyper.batch; ++b)
      batch.push_back(&rollouts[srng.next_u64() % rollouts.size()]);
    std::fill(grad.begin(), grad.end(), 0.0);
    const double loss = baseline_loss_and_grad(m, batch, grad);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_baseline: non-finite loss at step " +
                               std::to_string(step));
    for (auto& g : grad) g /= static_cast<double>(batch.size());
    opt.step(m.params.values(), grad, -1.0);
  }
  return m;
}

std::vector<double> baseline_rollout(const BaselineModel& m,
                                     std::span<const double> x1,
                                     const std::vector<double>& inputs, int K) {
  const int D = m.obs_dim, xd = m.state_dim(), ud = m.input_dim();
  if (static_cast<int>(x1.size()) != xd)
    throw std::invalid_argument("baseline_rollout: initial state dim mismatch");
  if (static_cast<int>(inputs.size()) != (K - 1) * ud)
    throw std::invalid_argument(
        "baseline_rollout: inputs must be (K-1) x input_dim for kind " +
        baseline_kind_name(m.kind));

  std::vector<double> x(x1.begin(), x1.end());
  std::vector<double> out(static_cast<std::size_t>(K) * D);
  std::vector<double> in(xd + ud);
  num::MlpWorkspace ws;
  for (int k = 0; k < K; ++k) {
    if (m.kind == BaselineKind::kZaz) {
      const auto dec = m.vae->decode_mean(x);
      std::copy(dec.begin(), dec.end(), out.begin() + static_cast<std::size_t>(k) * D);
    } else {
      std::copy(x.begin(), x.end(), out.begin() + static_cast<std::size_t>(k) * D);
    }
    if (k + 1 < K) {
      std::copy(x.begin(), x.end(), in.begin());
      for (int j = 0; j < ud; ++j)
        in[xd + j] = inputs[static_cast<std::size_t>(k) * ud + j];
      std::vector<double> xn(xd);
      num::mlp_forward(m.trans_spec, m.params.segment("trans"), in, ws, xn);
      x = std::move(xn);
    }
  }
  return out;
}

}  // namespace dish::baselines
