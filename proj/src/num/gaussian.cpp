#include "num/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dish::num {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)
}

DiagGaussian standard_normal(std::size_t dim) {
  DiagGaussian g;
  g.mean.assign(dim, 0.0);
  g.log_std.assign(dim, 0.0);
  return g;
}

double gaussian_logpdf(std::span<const double> x, const DiagGaussian& g) {
  if (x.size() != g.mean.size() || g.mean.size() != g.log_std.size())
    throw std::invalid_argument("gaussian_logpdf: dimension mismatch");
  double acc = -0.5 * kLog2Pi * static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]))
      throw std::invalid_argument("gaussian_logpdf: non-finite input at dim " +
                                  std::to_string(i));
    const double inv_std = std::exp(-g.log_std[i]);
    const double z = (x[i] - g.mean[i]) * inv_std;
    acc += -g.log_std[i] - 0.5 * z * z;
  }
  return acc;
}

double std_normal_logpdf(std::span<const double> x) {
  double acc = -0.5 * kLog2Pi * static_cast<double>(x.size());
  for (double v : x) acc -= 0.5 * v * v;
  return acc;
}

std::vector<double> gaussian_sample(RngStream& rng, const DiagGaussian& g) {
  if (g.mean.size() != g.log_std.size())
    throw std::invalid_argument("gaussian_sample: dimension mismatch");
  std::vector<double> out(g.mean.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = g.mean[i] + std::exp(g.log_std[i]) * rng.normal();
  return out;
}

}  // namespace dish::num
