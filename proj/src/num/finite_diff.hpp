#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dish::num {

/// Scalar-valued map over a flat parameter array.
using ScalarFn = std::function<double(std::span<const double>)>;

/// Max over coordinates of the relative error between an analytic gradient
/// and central finite differences. Relative error uses the symmetric
/// denominator max(eps_abs, (|a|+|n|)/2), with exact agreement below
/// 1e-12 treated as zero error.
double finite_diff_check(const ScalarFn& f, std::span<const double> params,
                         std::span<const double> analytic_grad, double eps);

/// Central-difference gradient (test utility; O(2n) evaluations).
std::vector<double> finite_diff_grad(const ScalarFn& f,
                                     std::span<const double> params,
                                     double eps);

}  // namespace dish::num
