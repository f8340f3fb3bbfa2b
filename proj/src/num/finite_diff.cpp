#include "num/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dish::num {

std::vector<double> finite_diff_grad(const ScalarFn& f,
                                     std::span<const double> params,
                                     double eps) {
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + eps;
    const double fp = f(p);
    p[i] = saved - eps;
    const double fm = f(p);
    p[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error(
          "finite_diff: non-finite probe at coordinate " + std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

double finite_diff_check(const ScalarFn& f, std::span<const double> params,
                         std::span<const double> analytic_grad, double eps) {
  if (analytic_grad.size() != params.size())
    throw std::invalid_argument("finite_diff_check: gradient length mismatch");
  const auto numeric = finite_diff_grad(f, params, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double a = analytic_grad[i], n = numeric[i];
    const double diff = std::abs(a - n);
    if (diff < 1e-12) continue;
    const double denom = std::max(1e-8, 0.5 * (std::abs(a) + std::abs(n)));
    worst = std::max(worst, diff / denom);
  }
  return worst;
}

}  // namespace dish::num
