#pragma once

#include <span>
#include <vector>

namespace dish::num {

/// Adam state for gradient ascent/descent on a flat parameter array.
/// A zero gradient leaves parameters bit-exact (moments stay zero).
class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  /// params += direction * step. direction = +1 ascends, -1 descends.
  void step(std::span<double> params, std::span<const double> grad,
            double direction);

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace dish::num
