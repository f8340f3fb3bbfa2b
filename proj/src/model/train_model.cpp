#include "model/train_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "num/adam.hpp"
#include "num/parallel.hpp"

namespace dish::model {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Everything one path needs during forward and backward.
struct PathScratch {
  std::vector<num::MlpWorkspace> f_ws, sig_ws, dm_ws, ds_ws;
  num::MlpWorkspace infer_ws, bw;
  std::vector<double> z;                    // K x d_z
  std::vector<std::vector<double>> dec_m;   // K x D
  std::vector<std::vector<double>> dec_s;   // K x D
  std::vector<std::vector<double>> gain;    // (K-1) x (d_z*d_h)
  std::vector<std::vector<double>> eff;     // (K-1) x d_h
  std::vector<double> head;                 // 2 d_z
  std::vector<double> adj;                  // K x d_z adjoints
};

struct GradView {
  std::span<double> f, sigma, dec_mean, dec_std, infer;
};

GradView grad_view(const LatentModel& m, std::span<double> flat) {
  const auto& pv = m.params();
  auto seg = [&](const char* name) {
    const auto& info = pv.segment_info(std::string(name));
    return flat.subspan(info.offset, info.len);
  };
  return {seg("f"), seg("sigma"), seg("dec_mean"), seg("dec_std"), seg("infer")};
}

// Forward pass for one path under frozen noise; fills scratch and returns
// the path log-weight. When grad is non-null, also backpropagates
// d(log-weight)/d(model params) scaled by grad_scale into it.
double run_path(const LatentModel& m, const SequenceData& seq,
                std::span<const double> u, const PathNoise& noise, int K,
                PathScratch& sc, double grad_scale, GradView* grad) {
  const auto& cfg = m.config();
  const int dz = cfg.d_z, dh = cfg.d_h, D = cfg.obs_dim;

  sc.f_ws.resize(K - 1);
  sc.sig_ws.resize(K - 1);
  sc.dm_ws.resize(K);
  sc.ds_ws.resize(K);
  sc.z.assign(static_cast<std::size_t>(K) * dz, 0.0);
  sc.dec_m.resize(K);
  sc.dec_s.resize(K);
  sc.gain.resize(K - 1);
  sc.eff.resize(K - 1);

  sc.head.resize(2 * dz);
  num::mlp_forward(m.infer_spec(), m.infer_params(), seq.window, sc.infer_ws,
                   sc.head);
  std::vector<double> q_std(dz);
  for (int d = 0; d < dz; ++d) {
    q_std[d] = num::softplus_floored(sc.head[dz + d]);
    sc.z[d] = sc.head[d] + q_std[d] * noise.z1_eps[d];
  }

  // log p0(z1) - log q0(z1) with z1 reparameterized: the q0 part reduces to
  // +sum log std + |eps|^2/2 + const.
  double lw = 0.0;
  for (int d = 0; d < dz; ++d) {
    lw += -0.5 * sc.z[d] * sc.z[d];                       // log p0 kernel
    lw += std::log(q_std[d]) + 0.5 * noise.z1_eps[d] * noise.z1_eps[d];
  }

  double loglik = 0.0;
  for (int k = 0; k < K; ++k) {
    std::span<const double> zk{sc.z.data() + static_cast<std::size_t>(k) * dz,
                               static_cast<std::size_t>(dz)};
    sc.dec_m[k].resize(D);
    sc.dec_s[k].resize(D);
    num::mlp_forward(m.dec_mean_spec(), m.dec_mean_params(), zk, sc.dm_ws[k],
                     sc.dec_m[k]);
    num::mlp_forward(m.dec_std_spec(), m.dec_std_params(), zk, sc.ds_ws[k],
                     sc.dec_s[k]);
    double lk = -0.5 * kLog2Pi * D;
    for (int i = 0; i < D; ++i) {
      const double r =
          (seq.s[static_cast<std::size_t>(k) * D + i] - sc.dec_m[k][i]) /
          sc.dec_s[k][i];
      lk += -std::log(sc.dec_s[k][i]) - 0.5 * r * r;
    }
    if (!std::isfinite(lk))
      throw std::runtime_error("elbo gradient: non-finite likelihood at step " +
                               std::to_string(k));
    loglik += lk;

    if (k + 1 < K) {
      sc.eff[k].resize(dh);
      for (int j = 0; j < dh; ++j)
        sc.eff[k][j] = seq.h[static_cast<std::size_t>(k) * dh + j] +
                       u[static_cast<std::size_t>(k) * dh + j] +
                       noise.w[static_cast<std::size_t>(k) * dh + j];
      std::vector<double> drift(dz);
      sc.gain[k].resize(static_cast<std::size_t>(dz) * dh);
      num::mlp_forward(m.f_spec(), m.f_params(), zk, sc.f_ws[k], drift);
      num::mlp_forward(m.sigma_spec(), m.sigma_params(), zk, sc.sig_ws[k],
                       sc.gain[k]);
      for (int i = 0; i < dz; ++i) {
        double acc = drift[i];
        for (int j = 0; j < dh; ++j) acc += sc.gain[k][i * dh + j] * sc.eff[k][j];
        sc.z[static_cast<std::size_t>(k + 1) * dz + i] = acc;
      }
    }
  }
  lw += loglik;

  double control = 0.0;
  for (int k = 0; k + 1 < K; ++k)
    for (int j = 0; j < dh; ++j) {
      const double uk = u[static_cast<std::size_t>(k) * dh + j];
      control += 0.5 * uk * uk + uk * noise.w[static_cast<std::size_t>(k) * dh + j];
    }
  lw -= control;
  // The p0 and q0 Gaussian normalizers cancel and are omitted.

  if (grad == nullptr) return lw;

  // ---- backward ----
  sc.adj.assign(static_cast<std::size_t>(K) * dz, 0.0);
  std::vector<double> up(D), up_s(D);
  for (int k = K - 1; k >= 0; --k) {
    std::span<double> ak{sc.adj.data() + static_cast<std::size_t>(k) * dz,
                         static_cast<std::size_t>(dz)};
    std::span<const double> zk{sc.z.data() + static_cast<std::size_t>(k) * dz,
                               static_cast<std::size_t>(dz)};

    if (k + 1 < K) {
      // sc.adj already carries grad_scale (folded into every decoder
      // upstream), so transition upstreams take it as-is.
      std::span<const double> anext{
          sc.adj.data() + static_cast<std::size_t>(k + 1) * dz,
          static_cast<std::size_t>(dz)};
      std::vector<double> up_f(anext.begin(), anext.end());
      num::mlp_backward(m.f_spec(), m.f_params(), sc.f_ws[k], up_f, sc.bw,
                        grad->f, ak);
      std::vector<double> up_sig(static_cast<std::size_t>(dz) * dh);
      for (int i = 0; i < dz; ++i)
        for (int j = 0; j < dh; ++j)
          up_sig[i * dh + j] = anext[i] * sc.eff[k][j];
      num::mlp_backward(m.sigma_spec(), m.sigma_params(), sc.sig_ws[k], up_sig,
                        sc.bw, grad->sigma, ak);
    }

    for (int i = 0; i < D; ++i) {
      const double sd = sc.dec_s[k][i];
      const double diff =
          seq.s[static_cast<std::size_t>(k) * D + i] - sc.dec_m[k][i];
      up[i] = grad_scale * diff / (sd * sd);
      up_s[i] = grad_scale * (-1.0 / sd + diff * diff / (sd * sd * sd));
    }
    num::mlp_backward(m.dec_mean_spec(), m.dec_mean_params(), sc.dm_ws[k], up,
                      sc.bw, grad->dec_mean, ak);
    num::mlp_backward(m.dec_std_spec(), m.dec_std_params(), sc.ds_ws[k], up_s,
                      sc.bw, grad->dec_std, ak);
  }

  // Adjoint scaling: mlp_backward calls already carry grad_scale in their
  // upstreams, so sc.adj holds grad_scale * d lw/d z. The z1 head gets the
  // remaining direct terms.
  std::vector<double> up_head(2 * dz);
  for (int d = 0; d < dz; ++d) {
    const double a0 = sc.adj[d] + grad_scale * (-sc.z[d]);  // + d log p0/d z1
    up_head[d] = a0;
    const double ds = a0 * noise.z1_eps[d] + grad_scale * (1.0 / q_std[d]);
    up_head[dz + d] = ds * sigmoid(sc.head[dz + d]);
  }
  std::vector<double> win_grad(seq.window.size(), 0.0);
  num::mlp_backward(m.infer_spec(), m.infer_params(), sc.infer_ws, up_head,
                    sc.bw, grad->infer, win_grad);

  return lw;
}

}  // namespace

double elbo_with_grad(const LatentModel& m, const SequenceData& seq,
                      std::span<const double> u, int L, num::RngStream rng,
                      std::span<double> grad) {
  const auto& cfg = m.config();
  const int K = static_cast<int>(seq.s.size()) / cfg.obs_dim;
  PathScratch sc;

  std::vector<double> lw(L);
  std::vector<PathNoise> noises(L);
  for (int i = 0; i < L; ++i) {
    num::RngStream pr = rng.derive(i);
    noises[i] = PathNoise::draw(pr, K, cfg.d_z, cfg.d_h);
    lw[i] = run_path(m, seq, u, noises[i], K, sc, 1.0, nullptr);
  }
  const double mx = *std::max_element(lw.begin(), lw.end());
  double zsum = 0.0;
  for (double v : lw) zsum += std::exp(v - mx);
  const double elbo = mx + std::log(zsum / L);

  GradView gv = grad_view(m, grad);
  for (int i = 0; i < L; ++i) {
    const double wbar = std::exp(lw[i] - mx) / zsum;
    run_path(m, seq, u, noises[i], K, sc, wbar, &gv);
  }
  return elbo;
}

double evaluate_elbo(const LatentModel& m, const std::vector<SequenceData>& data,
                     int R, int L, int K, std::uint64_t seed, int threads) {
  if (data.empty()) return 0.0;
  std::vector<double> vals(data.size());
  num::RngStream root(seed);
  num::parallel_for(data.size(), threads, [&](std::size_t i) {
    num::RngStream rng = root.derive(i);
    Proposal prop = Proposal::from_inference(m, data[i].window, K);
    auto [p, rep] = apiae_adapt(m, data[i].s, data[i].h, std::move(prop), R, L,
                                rng, K, 1);
    vals[i] = rep.elbo;
  });
  return std::accumulate(vals.begin(), vals.end(), 0.0) /
         static_cast<double>(vals.size());
}

ModelTrainLog train_internal_model(LatentModel& m,
                                   const std::vector<SequenceData>& data,
                                   const ModelTrainHyper& hyper) {
  if (data.empty())
    throw std::invalid_argument("train_internal_model: empty dataset");
  const auto& cfg = m.config();
  const int K = hyper.K;
  for (const auto& seq : data) {
    if (static_cast<int>(seq.s.size()) != K * cfg.obs_dim ||
        static_cast<int>(seq.h.size()) != K * cfg.d_h ||
        static_cast<int>(seq.window.size()) != m.window_input_dim())
      throw std::invalid_argument("train_internal_model: sequence shape mismatch");
  }

  num::RngStream root(hyper.seed);

  // Held-out split from a seeded shuffle.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  num::RngStream shuffle_rng = root.derive(17);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
  std::size_t n_holdout =
      static_cast<std::size_t>(hyper.holdout_frac * data.size());
  if (n_holdout >= data.size()) n_holdout = data.size() - 1;
  std::vector<SequenceData> holdout, train;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_holdout ? holdout : train).push_back(data[order[i]]);
  if (train.empty()) {
    train = data;
    holdout.clear();
  }

  num::Adam opt(m.params().size(), hyper.lr);
  ModelTrainLog log;
  const std::size_t np = m.params().size();
  const int B = std::min<int>(hyper.batch, static_cast<int>(train.size()));
  std::vector<std::vector<double>> seq_grad(B, std::vector<double>(np));
  std::vector<double> seq_elbo(B);
  std::vector<double> grad(np);

  for (int step = 0; step < hyper.steps; ++step) {
    num::RngStream step_rng = root.derive(1000003ULL * step + 7);
    std::vector<std::size_t> batch_idx(B);
    for (int b = 0; b < B; ++b)
      batch_idx[b] = step_rng.next_u64() % train.size();

    num::parallel_for(static_cast<std::size_t>(B), hyper.threads,
                      [&](std::size_t b) {
      const SequenceData& seq = train[batch_idx[b]];
      num::RngStream seq_rng = step_rng.derive(100 + b);
      Proposal prop = Proposal::from_inference(m, seq.window, K);
      if (hyper.adapt) {
        num::RngStream arng = seq_rng.derive(1);
        auto [adapted, rep] = apiae_adapt(m, seq.s, seq.h, std::move(prop),
                                          hyper.R, hyper.L, arng, K, 1);
        prop = std::move(adapted);
      }
      std::fill(seq_grad[b].begin(), seq_grad[b].end(), 0.0);
      seq_elbo[b] = elbo_with_grad(m, seq, prop.u, hyper.L, seq_rng.derive(2),
                                   seq_grad[b]);
    });

    std::fill(grad.begin(), grad.end(), 0.0);
    double batch_elbo = 0.0;
    for (int b = 0; b < B; ++b) {
      batch_elbo += seq_elbo[b];
      for (std::size_t j = 0; j < np; ++j) grad[j] += seq_grad[b][j];
    }
    batch_elbo /= B;
    for (auto& g : grad) g /= B;
    for (double g : grad)
      if (!std::isfinite(g))
        throw std::runtime_error(
            "train_internal_model: non-finite gradient at minibatch step " +
            std::to_string(step));

    opt.step(m.params().values(), grad, +1.0);
    log.train_elbo.push_back(batch_elbo);

    if (!holdout.empty() &&
        (step % hyper.eval_every == hyper.eval_every - 1 ||
         step + 1 == hyper.steps)) {
      log.eval_steps.push_back(step);
      log.holdout_elbo.push_back(evaluate_elbo(
          m, holdout, hyper.eval_R, hyper.L, K, hyper.seed ^ 0xe7a1u, hyper.threads));
    }
  }
  log.final_holdout_elbo =
      log.holdout_elbo.empty()
          ? (log.train_elbo.empty() ? 0.0 : log.train_elbo.back())
          : log.holdout_elbo.back();
  return log;
}

}  // namespace dish::model
