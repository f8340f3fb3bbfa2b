#include "num/rng.hpp"

#include <cmath>
#include <numbers>

namespace dish::num {

double RngStream::normal() {
  // Box-Muller, cosine branch only. Two uniforms per draw keeps the stream
  // stateless between calls (no cached spare), which copy semantics require.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dish::num
