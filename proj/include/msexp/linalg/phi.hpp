#pragma once

#include <cmath>

#include "msexp/common.hpp"

namespace msexp {

/// phi-functions of exponential integrators for nonpositive real arguments:
/// phi_0(z) = exp(z), phi_{p+1}(z) = (phi_p(z) - 1/p!) / z, with the
/// removable singularity at z = 0 handled by a truncated Taylor series.
/// Supported orders p in {0, 1, 2}.
inline double phi_scalar(int p, double z) {
  require(p >= 0 && p <= 2, "phi_scalar: order must be 0, 1 or 2");
  require(z <= 0.0, "phi_scalar: argument must be nonpositive");

  if (p == 0) return std::exp(z);

  // Below the threshold the direct quotient loses digits to cancellation;
  // an 8-term series is exact to well beyond double precision there. The
  // quotient for phi_2 divides twice, so it switches earlier.
  const double threshold = (p == 1) ? 1e-5 : 1e-2;
  if (std::abs(z) < threshold) {
    // phi_p(z) = sum_{k>=0} z^k / (k+p)!
    double factorial = 1.0;
    for (int j = 1; j <= p; ++j) factorial *= j;
    double sum = 0.0;
    double zk = 1.0;
    for (int k = 0; k < 8; ++k) {
      if (k > 0) {
        zk *= z;
        factorial *= (k + p);
      }
      sum += zk / factorial;
    }
    return sum;
  }

  const double phi1 = std::expm1(z) / z;
  if (p == 1) return phi1;
  return (phi1 - 1.0) / z;  // phi_2
}

}  // namespace msexp
