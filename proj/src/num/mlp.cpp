#include "num/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "num/rng.hpp"

namespace dish::num {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_floored(double x) { return kSoftplusFloor + softplus(x); }

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void apply_activation(Act a, std::span<const double> pre,
                      std::span<double> post) {
  switch (a) {
    case Act::kTanh:
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = std::tanh(pre[i]);
      break;
    case Act::kRelu:
      for (std::size_t i = 0; i < pre.size(); ++i)
        post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
      break;
    case Act::kLinear:
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i];
      break;
  }
}

}  // namespace

MlpSpec::MlpSpec(std::vector<int> sizes, Act hidden, OutAct out)
    : layer_sizes(std::move(sizes)), output_act(out) {
  const int n_hidden = static_cast<int>(layer_sizes.size()) - 2;
  hidden_acts.assign(n_hidden > 0 ? n_hidden : 0, hidden);
  validate();
}

std::size_t MlpSpec::weight_count() const {
  std::size_t n = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l)
    n += static_cast<std::size_t>(layer_sizes[l + 1]) * layer_sizes[l] +
         layer_sizes[l + 1];
  return n;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("MlpSpec: need at least [in, out] layer sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("MlpSpec: layer sizes must be positive");
  const std::size_t n_hidden = layer_sizes.size() - 2;
  if (hidden_acts.size() != n_hidden)
    throw std::invalid_argument("MlpSpec: one hidden activation per hidden layer");
}

void mlp_forward(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input, MlpWorkspace& ws,
                 std::span<double> output) {
  const auto& sizes = spec.layer_sizes;
  const int nt = spec.transforms();
  if (static_cast<int>(input.size()) != sizes[0])
    throw std::invalid_argument(
        "mlp_forward: input length " + std::to_string(input.size()) +
        " does not match layer 0 size " + std::to_string(sizes[0]));
  if (params.size() != spec.weight_count())
    throw std::invalid_argument(
        "mlp_forward: param slice length " + std::to_string(params.size()) +
        " does not match weight count " + std::to_string(spec.weight_count()));
  if (static_cast<int>(output.size()) != sizes[nt])
    throw std::invalid_argument("mlp_forward: output length mismatch");

  ws.act.resize(nt + 1);
  ws.pre.resize(nt);
  ws.act[0].assign(input.begin(), input.end());

  std::size_t off = 0;
  for (int l = 0; l < nt; ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double* w = params.data() + off;
    const double* b = w + static_cast<std::size_t>(out) * in;
    ws.pre[l].resize(out);
    ws.act[l + 1].resize(out);
    const double* x = ws.act[l].data();
    for (int i = 0; i < out; ++i) {
      double acc = b[i];
      const double* wi = w + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) acc += wi[j] * x[j];
      ws.pre[l][i] = acc;
    }
    if (l + 1 < nt) {
      apply_activation(spec.hidden_acts[l], ws.pre[l], ws.act[l + 1]);
    } else {
      switch (spec.output_act) {
        case OutAct::kLinear:
          ws.act[l + 1] = ws.pre[l];
          break;
        case OutAct::kSoftplus:
          for (int i = 0; i < out; ++i)
            ws.act[l + 1][i] = softplus_floored(ws.pre[l][i]);
          break;
      }
    }
    off += static_cast<std::size_t>(out) * in + out;
  }
  const auto& last = ws.act[nt];
  std::copy(last.begin(), last.end(), output.begin());
}

std::vector<double> mlp_forward(const MlpSpec& spec,
                                std::span<const double> params,
                                std::span<const double> input) {
  MlpWorkspace ws;
  std::vector<double> out(spec.output_dim());
  mlp_forward(spec, params, input, ws, out);
  return out;
}

void mlp_backward(const MlpSpec& spec, std::span<const double> params,
                  const MlpWorkspace& ws, std::span<const double> upstream,
                  MlpWorkspace& scratch, std::span<double> param_grad,
                  std::span<double> input_grad) {
  const auto& sizes = spec.layer_sizes;
  const int nt = spec.transforms();
  if (static_cast<int>(upstream.size()) != sizes[nt])
    throw std::invalid_argument(
        "mlp_backward: upstream length " + std::to_string(upstream.size()) +
        " does not match output size " + std::to_string(sizes[nt]));
  if (param_grad.size() != spec.weight_count())
    throw std::invalid_argument("mlp_backward: param_grad length mismatch");
  if (static_cast<int>(input_grad.size()) != sizes[0])
    throw std::invalid_argument("mlp_backward: input_grad length mismatch");

  scratch.delta.resize(nt + 1);

  // delta[l] = dL/d(pre-activation of transform l). Seed from the output.
  auto& dout = scratch.delta[nt];
  dout.resize(sizes[nt]);
  switch (spec.output_act) {
    case OutAct::kLinear:
      for (int i = 0; i < sizes[nt]; ++i) dout[i] = upstream[i];
      break;
    case OutAct::kSoftplus:
      for (int i = 0; i < sizes[nt]; ++i)
        dout[i] = upstream[i] * sigmoid(ws.pre[nt - 1][i]);
      break;
  }

  // Param offsets per transform, computed once.
  std::vector<std::size_t> offs(nt);
  std::size_t off = 0;
  for (int l = 0; l < nt; ++l) {
    offs[l] = off;
    off += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  }

  for (int l = nt - 1; l >= 0; --l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double* w = params.data() + offs[l];
    const double* x = ws.act[l].data();
    const auto& d = scratch.delta[l + 1];

    double* gw = param_grad.data() + offs[l];
    double* gb = gw + static_cast<std::size_t>(out) * in;
    for (int i = 0; i < out; ++i) {
      const double di = d[i];
      gb[i] += di;
      double* gwi = gw + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) gwi[j] += di * x[j];
    }

    auto& dprev = scratch.delta[l];
    dprev.assign(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double di = d[i];
      const double* wi = w + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) dprev[j] += di * wi[j];
    }
    if (l > 0) {
      // Pull the upstream through transform l-1's activation.
      const auto& pre = ws.pre[l - 1];
      const auto& post = ws.act[l];
      switch (spec.hidden_acts[l - 1]) {
        case Act::kTanh:
          for (int j = 0; j < in; ++j)
            dprev[j] *= 1.0 - post[j] * post[j];
          break;
        case Act::kRelu:
          for (int j = 0; j < in; ++j)
            if (pre[j] <= 0.0) dprev[j] = 0.0;
          break;
        case Act::kLinear:
          break;
      }
    }
  }

  const auto& din = scratch.delta[0];
  for (int j = 0; j < sizes[0]; ++j) input_grad[j] += din[j];
}

MlpGrads mlp_backward(const MlpSpec& spec, std::span<const double> params,
                      std::span<const double> input,
                      std::span<const double> upstream) {
  MlpWorkspace ws, scratch;
  std::vector<double> out(spec.output_dim());
  mlp_forward(spec, params, input, ws, out);
  MlpGrads g;
  g.param_grad.assign(spec.weight_count(), 0.0);
  g.input_grad.assign(spec.input_dim(), 0.0);
  mlp_backward(spec, params, ws, upstream, ws, g.param_grad, g.input_grad);
  return g;
}

void mlp_init(const MlpSpec& spec, std::span<double> params, RngStream& rng,
              double weight_scale) {
  if (params.size() != spec.weight_count())
    throw std::invalid_argument("mlp_init: param slice length mismatch");
  const auto& sizes = spec.layer_sizes;
  std::size_t off = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes.size()); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double scale = weight_scale / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < out * in; ++i)
      params[off + i] = scale * rng.normal();
    off += static_cast<std::size_t>(out) * in;
    for (int i = 0; i < out; ++i) params[off + i] = 0.0;
    off += out;
  }
}

}  // namespace dish::num
