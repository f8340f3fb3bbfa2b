#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dish::num {

enum class Act { kTanh, kRelu, kLinear };

/// Softplus output carries a fixed 1e-4 floor; it backs strictly-positive
/// quantities (noise gains, decoder stds) without overflow or exact zeros.
enum class OutAct { kLinear, kSoftplus };

inline constexpr double kSoftplusFloor = 1e-4;

double softplus(double x);
double softplus_floored(double x);

/// Shape of a small dense feed-forward network. Parameters live in an
/// external flat slice, laid out per layer as row-major W then b.
struct MlpSpec {
  std::vector<int> layer_sizes;            // [in, hidden..., out]
  std::vector<Act> hidden_acts;            // one per hidden layer
  OutAct output_act = OutAct::kLinear;

  MlpSpec() = default;
  MlpSpec(std::vector<int> sizes, Act hidden, OutAct out);

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int transforms() const { return static_cast<int>(layer_sizes.size()) - 1; }
  std::size_t weight_count() const;
  void validate() const;
};

/// Scratch buffers reused across forward/backward calls so hot loops do
/// not allocate. One workspace per thread.
struct MlpWorkspace {
  std::vector<std::vector<double>> act;   // post-activation, act[0] = input
  std::vector<std::vector<double>> pre;   // pre-activation per transform
  std::vector<std::vector<double>> delta; // backward scratch
};

void mlp_forward(const MlpSpec& spec, std::span<const double> params,
                 std::span<const double> input, MlpWorkspace& ws,
                 std::span<double> output);

std::vector<double> mlp_forward(const MlpSpec& spec,
                                std::span<const double> params,
                                std::span<const double> input);

/// Exact reverse-mode gradients of upstream . output. Requires act/pre from
/// the matching forward call. Accumulates (+=) into param_grad and
/// input_grad so callers can sum over a batch.
void mlp_backward(const MlpSpec& spec, std::span<const double> params,
                  const MlpWorkspace& ws, std::span<const double> upstream,
                  MlpWorkspace& scratch, std::span<double> param_grad,
                  std::span<double> input_grad);

struct MlpGrads {
  std::vector<double> param_grad;
  std::vector<double> input_grad;
};

MlpGrads mlp_backward(const MlpSpec& spec, std::span<const double> params,
                      std::span<const double> input,
                      std::span<const double> upstream);

/// Fills params with scaled Gaussian entries (1/sqrt(fan_in) weights,
/// zero biases).
void mlp_init(const MlpSpec& spec, std::span<double> params, class RngStream& rng,
              double weight_scale = 1.0);

}  // namespace dish::num
