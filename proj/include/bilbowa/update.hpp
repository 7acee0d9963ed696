#pragma once

#include <atomic>
#include <cmath>

#include "bilbowa/types.hpp"

namespace bilbowa {

// Componentwise clamp of a single update delta to [-bound, bound].
template <class Scalar>
inline Scalar clip_component(Scalar delta, Scalar bound) {
  return std::min(bound, std::max(-bound, delta));
}

// Records the largest applied update component across threads. Attach one to
// a training run to verify the clipping contract.
struct UpdateMonitor {
  std::atomic<double> max_abs{0.0};

  void observe(double magnitude) {
    double seen = max_abs.load(std::memory_order_relaxed);
    while (magnitude > seen &&
           !max_abs.compare_exchange_weak(seen, magnitude, std::memory_order_relaxed)) {
    }
  }
};

// row(r) += step clamped componentwise to [-clip, clip]. `step` must not
// alias rows of `m`. clip may be +infinity (no-op clamp).
template <class Scalar, class Expr>
inline void apply_row_step(MatrixX<Scalar>& m, Eigen::Index r, const Expr& step, Scalar clip,
                           UpdateMonitor* monitor = nullptr) {
  auto clamped = step.cwiseMax(-clip).cwiseMin(clip);
  if (monitor != nullptr && step.size() > 0) {
    monitor->observe(static_cast<double>(clamped.cwiseAbs().maxCoeff()));
  }
  m.row(r) += clamped;
}

}  // namespace bilbowa
