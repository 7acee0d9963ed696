#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bilbowa/types.hpp"
#include "bilbowa/update.hpp"

namespace bilbowa {

// One (center, context) training pair drawn from a sentence window.
struct TrainingPair {
  WordId center;
  WordId context;
  bool operator==(const TrainingPair&) const = default;
};

namespace detail {

// Logistic arguments are clamped to +-30; beyond that sigma is 1 within 1e-13.
inline constexpr double kMaxLogit = 30.0;

template <class Scalar>
inline Scalar clamp_logit(Scalar x) {
  return std::min(Scalar(kMaxLogit), std::max(Scalar(-kMaxLogit), x));
}

template <class Scalar>
inline Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// -log sigma(x), computed as softplus(-x) to stay accurate near zero loss.
template <class Scalar>
inline Scalar neg_log_sigmoid(Scalar x) {
  if (x >= Scalar(0)) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

}  // namespace detail

// Dynamic-window pair extraction: for each position t, in order, draws
// b uniform in {1..window} from rng and emits (w_t, w_{t+j}) for
// j = -b..b, j != 0, within sentence bounds, in ascending j order. The draw
// order is part of the contract so a seeded run is reproducible.
inline void extract_pairs_into(std::span<const WordId> sentence, int window, Rng& rng,
                               std::vector<TrainingPair>& pairs) {
  if (window < 1) throw std::invalid_argument("extract_pairs: window must be >= 1");
  pairs.clear();
  if (sentence.size() < 2) return;
  pairs.reserve(sentence.size() * static_cast<std::size_t>(window));
  std::uniform_int_distribution<int> shrink(1, window);
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(sentence.size());
  for (std::ptrdiff_t t = 0; t < len; ++t) {
    const int b = shrink(rng);
    for (std::ptrdiff_t j = -b; j <= b; ++j) {
      if (j == 0) continue;
      const std::ptrdiff_t c = t + j;
      if (c < 0 || c >= len) continue;
      pairs.push_back({sentence[static_cast<std::size_t>(t)], sentence[static_cast<std::size_t>(c)]});
    }
  }
}

inline std::vector<TrainingPair> extract_pairs(std::span<const WordId> sentence, int window,
                                               Rng& rng) {
  std::vector<TrainingPair> pairs;
  extract_pairs_into(sentence, window, rng, pairs);
  return pairs;
}

// Negative-sampling loss for one pair:
//   -log sigma(u_c . v_w) - sum_n log sigma(-u_n . v_w)
// with v_w = input.row(center), u_* = output rows, dot products clamped to
// [-30, 30] before the logistic.
template <class Scalar>
Scalar sg_loss(const MatrixX<Scalar>& input, const MatrixX<Scalar>& output, WordId center,
               WordId context, std::span<const WordId> noise) {
  if (input.cols() != output.cols()) {
    throw std::invalid_argument("sg_loss: input/output dimensionality mismatch");
  }
  if (noise.empty()) throw std::invalid_argument("sg_loss: need at least one noise word");
  const auto v = input.row(center);
  Scalar pos = detail::clamp_logit(Scalar(v.dot(output.row(context))));
  Scalar loss = detail::neg_log_sigmoid(pos);
  for (WordId n : noise) {
    Scalar neg = detail::clamp_logit(Scalar(v.dot(output.row(n))));
    loss += detail::neg_log_sigmoid(-neg);
  }
  return loss;
}

// One clipped SGD step on the pair; returns the pre-update loss.
// Gradients:
//   d/dv_w = (sigma(u_c.v)-1) u_c + sum_n sigma(u_n.v) u_n
//   d/du_c = (sigma(u_c.v)-1) v
//   d/du_n = sigma(u_n.v) v
// Each applied update component is eta * gradient clamped to [-clip, clip].
// WithLoss=false skips the loss bookkeeping (half the transcendentals) and
// returns 0; the hot training loop uses that path.
template <class Scalar, bool WithLoss = true>
Scalar sg_update(MatrixX<Scalar>& input, MatrixX<Scalar>& output, WordId center, WordId context,
                 std::span<const WordId> noise, Scalar eta, Scalar clip,
                 UpdateMonitor* monitor = nullptr) {
  if (input.cols() != output.cols()) {
    throw std::invalid_argument("sg_update: input/output dimensionality mismatch");
  }
  if (noise.empty()) throw std::invalid_argument("sg_update: need at least one noise word");
  if (!(eta > Scalar(0))) throw std::invalid_argument("sg_update: eta must be positive");

  static thread_local RowVectorX<Scalar> input_step;
  static thread_local std::vector<Scalar> noise_scale;
  input_step.resize(input.cols());
  noise_scale.clear();

  const auto v = input.row(center);
  Scalar pos = detail::clamp_logit(Scalar(v.dot(output.row(context))));
  const Scalar a_pos = detail::sigmoid(pos) - Scalar(1);
  Scalar loss = WithLoss ? detail::neg_log_sigmoid(pos) : Scalar(0);

  // All gradient coefficients come from the pre-update state: accumulate the
  // center-word step and the per-noise scales first, apply everything after.
  input_step.noalias() = (-eta * a_pos) * output.row(context);
  for (WordId n : noise) {
    Scalar neg = detail::clamp_logit(Scalar(v.dot(output.row(n))));
    const Scalar a_neg = detail::sigmoid(neg);
    if (WithLoss) loss += detail::neg_log_sigmoid(-neg);
    input_step.noalias() += (-eta * a_neg) * output.row(n);
    noise_scale.push_back(-eta * a_neg);
  }
  apply_row_step(output, context, (-eta * a_pos) * v, clip, monitor);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    apply_row_step(output, noise[i], noise_scale[i] * v, clip, monitor);
  }
  apply_row_step(input, center, input_step, clip, monitor);
  return loss;
}

}  // namespace bilbowa
