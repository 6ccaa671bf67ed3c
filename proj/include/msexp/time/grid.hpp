#pragma once

#include <cmath>

#include "msexp/common.hpp"

namespace msexp {

/// Uniform time grid with tau * n_steps = t_max.
struct TimeGrid {
  double tau = 0.0;
  int n_steps = 0;
  double t_max = 0.0;

  static TimeGrid uniform(double t_max, int n_steps) {
    require(t_max > 0.0 && n_steps >= 1, "TimeGrid: t_max > 0 and n_steps >= 1 required");
    TimeGrid g{t_max / n_steps, n_steps, t_max};
    require(std::abs(g.tau * n_steps - t_max) <= 1e-12 * t_max,
            "TimeGrid: tau * n_steps does not reproduce t_max");
    return g;
  }
};

}  // namespace msexp
