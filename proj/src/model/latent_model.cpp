#include "model/latent_model.hpp"

#include <cmath>
#include <stdexcept>

namespace dish::model {

namespace {

std::vector<int> layer_chain(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(out);
  return sizes;
}

// Inverse of softplus for y > 0 (ignoring the floor).
double softplus_inv(double y) {
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

}  // namespace

void LatentModel::build_specs() {
  using num::Act;
  using num::OutAct;
  f_spec_ = num::MlpSpec(layer_chain(cfg_.d_z, cfg_.f_hidden, cfg_.d_z),
                         Act::kTanh, OutAct::kLinear);
  sigma_spec_ =
      num::MlpSpec(layer_chain(cfg_.d_z, cfg_.sigma_hidden, cfg_.d_z * cfg_.d_h),
                   Act::kTanh, OutAct::kSoftplus);
  dec_mean_spec_ =
      num::MlpSpec(layer_chain(cfg_.d_z, cfg_.dec_mean_hidden, cfg_.obs_dim),
                   Act::kTanh, OutAct::kLinear);
  dec_std_spec_ =
      num::MlpSpec(layer_chain(cfg_.d_z, cfg_.dec_std_hidden, cfg_.obs_dim),
                   Act::kTanh, OutAct::kSoftplus);
  infer_spec_ = num::MlpSpec(
      layer_chain(cfg_.window * cfg_.obs_dim, cfg_.infer_hidden, 2 * cfg_.d_z),
      Act::kTanh, OutAct::kLinear);

  params_ = num::ParamVector();
  params_.add_segment("f", f_spec_.weight_count());
  params_.add_segment("sigma", sigma_spec_.weight_count());
  params_.add_segment("dec_mean", dec_mean_spec_.weight_count());
  params_.add_segment("dec_std", dec_std_spec_.weight_count());
  params_.add_segment("infer", infer_spec_.weight_count());
}

LatentModel::LatentModel(const LatentModelConfig& cfg, num::RngStream& init_rng)
    : cfg_(cfg) {
  build_specs();
  num::mlp_init(f_spec_, params_.segment("f"), init_rng, 0.5);
  num::mlp_init(sigma_spec_, params_.segment("sigma"), init_rng, 0.5);
  num::mlp_init(dec_mean_spec_, params_.segment("dec_mean"), init_rng, 0.5);
  num::mlp_init(dec_std_spec_, params_.segment("dec_std"), init_rng, 0.5);
  num::mlp_init(infer_spec_, params_.segment("infer"), init_rng, 0.5);

  // Start with moderate noise gains and decoder stds.
  auto set_out_bias = [](const num::MlpSpec& spec, std::span<double> p,
                         double value) {
    const auto& sizes = spec.layer_sizes;
    const int out = sizes.back();
    const std::size_t end = spec.weight_count();
    for (int i = 0; i < out; ++i) p[end - out + i] = value;
  };
  set_out_bias(sigma_spec_, params_.segment("sigma"), softplus_inv(0.3));
  set_out_bias(dec_std_spec_, params_.segment("dec_std"), softplus_inv(0.5));
}

LatentModel LatentModel::linear(const std::vector<std::vector<double>>& A,
                                const std::vector<std::vector<double>>& B,
                                const std::vector<std::vector<double>>& C,
                                double dec_std, int window) {
  LatentModel m;
  m.cfg_.d_z = static_cast<int>(A.size());
  m.cfg_.d_h = static_cast<int>(B.at(0).size());
  m.cfg_.obs_dim = static_cast<int>(C.size());
  m.cfg_.window = window;
  m.cfg_.f_hidden.clear();
  m.cfg_.sigma_hidden.clear();
  m.cfg_.dec_mean_hidden.clear();
  m.cfg_.dec_std_hidden.clear();
  m.cfg_.infer_hidden.clear();
  m.build_specs();

  const int dz = m.cfg_.d_z, dh = m.cfg_.d_h, D = m.cfg_.obs_dim;
  auto fp = m.params_.segment("f");
  for (int i = 0; i < dz; ++i)
    for (int j = 0; j < dz; ++j) fp[i * dz + j] = A[i][j];
  auto sp = m.params_.segment("sigma");
  // weights zero; bias = softplus_inv(B - floor) so the output equals B.
  for (int i = 0; i < dz; ++i)
    for (int j = 0; j < dh; ++j) {
      const double b = B[i][j];
      if (b <= num::kSoftplusFloor)
        throw std::invalid_argument(
            "LatentModel::linear: B entries must exceed the softplus floor");
      sp[dz * dh * dz + i * dh + j] = softplus_inv(b - num::kSoftplusFloor);
    }
  auto dm = m.params_.segment("dec_mean");
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < dz; ++j) dm[i * dz + j] = C[i][j];
  auto ds = m.params_.segment("dec_std");
  if (dec_std <= num::kSoftplusFloor)
    throw std::invalid_argument("LatentModel::linear: dec_std too small");
  for (int i = 0; i < D; ++i)
    ds[static_cast<std::size_t>(D) * dz + i] =
        softplus_inv(dec_std - num::kSoftplusFloor);
  return m;
}

void LatentModel::step_effective(std::span<const double> z,
                                 std::span<const double> eff,
                                 std::span<double> z_next,
                                 num::MlpWorkspace& ws) const {
  const int dz = cfg_.d_z, dh = cfg_.d_h;
  if (static_cast<int>(z.size()) != dz ||
      static_cast<int>(eff.size()) != dh ||
      static_cast<int>(z_next.size()) != dz)
    throw std::invalid_argument("latent step: dimension mismatch");
  for (double v : z)
    if (!std::isfinite(v))
      throw std::invalid_argument("latent step: non-finite latent state");
  for (double v : eff)
    if (!std::isfinite(v))
      throw std::invalid_argument("latent step: non-finite command");

  std::vector<double> drift(dz), gain(static_cast<std::size_t>(dz) * dh);
  num::mlp_forward(f_spec_, f_params(), z, ws, drift);
  num::mlp_forward(sigma_spec_, sigma_params(), z, ws, gain);
  for (int i = 0; i < dz; ++i) {
    double acc = drift[i];
    for (int j = 0; j < dh; ++j) acc += gain[i * dh + j] * eff[j];
    z_next[i] = acc;
  }
}

std::vector<double> LatentModel::prior_step(std::span<const double> z,
                                            std::span<const double> h,
                                            std::span<const double> w) const {
  if (h.size() != w.size())
    throw std::invalid_argument("prior_step: h/w dimension mismatch");
  std::vector<double> eff(h.size());
  for (std::size_t j = 0; j < eff.size(); ++j) eff[j] = h[j] + w[j];
  std::vector<double> out(cfg_.d_z);
  num::MlpWorkspace ws;
  step_effective(z, eff, out, ws);
  return out;
}

std::vector<double> LatentModel::proposal_step(std::span<const double> z,
                                               std::span<const double> h,
                                               std::span<const double> u,
                                               std::span<const double> w) const {
  if (h.size() != w.size() || u.size() != w.size())
    throw std::invalid_argument("proposal_step: command dimension mismatch");
  std::vector<double> eff(h.size());
  for (std::size_t j = 0; j < eff.size(); ++j) eff[j] = h[j] + u[j] + w[j];
  std::vector<double> out(cfg_.d_z);
  num::MlpWorkspace ws;
  step_effective(z, eff, out, ws);
  return out;
}

void LatentModel::decode_into(std::span<const double> z, num::MlpWorkspace& ws,
                              std::vector<double>& mean,
                              std::vector<double>& std) const {
  mean.resize(cfg_.obs_dim);
  std.resize(cfg_.obs_dim);
  num::mlp_forward(dec_mean_spec_, dec_mean_params(), z, ws, mean);
  num::mlp_forward(dec_std_spec_, dec_std_params(), z, ws, std);
}

num::DiagGaussian LatentModel::decode(std::span<const double> z) const {
  num::MlpWorkspace ws;
  std::vector<double> mean, std;
  decode_into(z, ws, mean, std);
  num::DiagGaussian g;
  g.mean = std::move(mean);
  g.log_std.resize(cfg_.obs_dim);
  for (int i = 0; i < cfg_.obs_dim; ++i) g.log_std[i] = std::log(std[i]);
  return g;
}

num::DiagGaussian LatentModel::infer_initial(
    std::span<const double> window) const {
  if (static_cast<int>(window.size()) != window_input_dim())
    throw std::invalid_argument(
        "infer_initial: window length " + std::to_string(window.size()) +
        " does not match " + std::to_string(window_input_dim()));
  const auto head = num::mlp_forward(infer_spec_, infer_params(), window);
  num::DiagGaussian g;
  g.mean.assign(head.begin(), head.begin() + cfg_.d_z);
  g.log_std.resize(cfg_.d_z);
  for (int i = 0; i < cfg_.d_z; ++i)
    g.log_std[i] = std::log(num::softplus_floored(head[cfg_.d_z + i]));
  return g;
}

}  // namespace dish::model
