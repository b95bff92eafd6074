#pragma once

#include "adt/model.hpp"

namespace adt::model::detail {

// Clamped sigmoid CE head: dL/dz = w * (y_hat - y) inside the clamp window,
// 0 once the clamp is active (the output is a constant there).
inline bool clamped(double y_hat) {
  return y_hat < kProbEps || y_hat > 1.0 - kProbEps;
}

}  // namespace adt::model::detail
