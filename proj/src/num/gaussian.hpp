#pragma once

#include <span>
#include <vector>

#include "num/rng.hpp"

namespace dish::num {

/// Diagonal Gaussian with std = exp(log_std).
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> log_std;

  std::size_t dim() const { return mean.size(); }
};

DiagGaussian standard_normal(std::size_t dim);

double gaussian_logpdf(std::span<const double> x, const DiagGaussian& g);

/// logpdf of a standard normal at x.
double std_normal_logpdf(std::span<const double> x);

std::vector<double> gaussian_sample(RngStream& rng, const DiagGaussian& g);

}  // namespace dish::num
