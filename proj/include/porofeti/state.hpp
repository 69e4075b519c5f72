#pragma once

#include "porofeti/core.hpp"

namespace porofeti {

/// All coefficient vectors of one time level.
struct StateSnapshot {
  int step = 0;
  double time = 0.0;
  Vector u_P, xi_P, eta, p, u_E, xi_E, lambda;
};

}  // namespace porofeti
