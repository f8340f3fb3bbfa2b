#include "num/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dish::num {

void Adam::step(std::span<double> params, std::span<const double> grad,
                double direction) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("Adam: size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] += direction * lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

}  // namespace dish::num
