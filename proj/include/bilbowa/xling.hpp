#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "bilbowa/corpus.hpp"
#include "bilbowa/types.hpp"
#include "bilbowa/update.hpp"

namespace bilbowa {

// Mean bag-of-words sentence vector; repeated ids contribute once per
// occurrence.
template <class Scalar>
RowVectorX<Scalar> sentence_mean(std::span<const WordId> ids, const MatrixX<Scalar>& embeddings) {
  if (ids.empty()) throw std::domain_error("sentence_mean: empty sentence");
  RowVectorX<Scalar> mean = RowVectorX<Scalar>::Zero(embeddings.cols());
  for (WordId id : ids) mean += embeddings.row(id);
  mean /= static_cast<Scalar>(ids.size());
  return mean;
}

// Squared Euclidean distance between the two mean sentence vectors.
template <class Scalar>
Scalar bilbowa_loss(std::span<const WordId> e_ids, std::span<const WordId> f_ids,
                    const MatrixX<Scalar>& input_e, const MatrixX<Scalar>& input_f) {
  if (input_e.cols() != input_f.cols()) {
    throw std::invalid_argument("bilbowa_loss: dimensionality mismatch");
  }
  return (sentence_mean(e_ids, input_e) - sentence_mean(f_ids, input_f)).squaredNorm();
}

struct XlingStepStats {
  double loss = 0.0;
  int m = 0;  // e-side length after subsampling; 0 marks a no-op step
  int n = 0;
  std::vector<WordId> updated_e;  // distinct touched ids
  std::vector<WordId> updated_f;
};

namespace detail {

inline std::vector<WordId> distinct_ids(std::span<const WordId> ids) {
  std::vector<WordId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// One clipped step on the sentence-mean L2 loss, scaled by lambda. With
// g = mean_e - mean_f, each occurrence of a word in the e sentence receives
// the occurrence gradient (2/m) g, each f occurrence -(2/n) g; only the
// input matrices are touched.
template <class Scalar>
XlingStepStats bilbowa_update(std::span<const WordId> e_ids, std::span<const WordId> f_ids,
                              MatrixX<Scalar>& input_e, MatrixX<Scalar>& input_f, Scalar lambda,
                              Scalar eta, Scalar clip, UpdateMonitor* monitor = nullptr) {
  if (!(lambda >= Scalar(0))) throw std::invalid_argument("bilbowa_update: lambda must be >= 0");
  if (!(eta > Scalar(0))) throw std::invalid_argument("bilbowa_update: eta must be positive");
  const RowVectorX<Scalar> gap = sentence_mean(e_ids, input_e) - sentence_mean(f_ids, input_f);

  XlingStepStats stats;
  stats.loss = static_cast<double>(gap.squaredNorm());
  stats.m = static_cast<int>(e_ids.size());
  stats.n = static_cast<int>(f_ids.size());
  stats.updated_e = detail::distinct_ids(e_ids);
  stats.updated_f = detail::distinct_ids(f_ids);

  const Scalar scale_e = -eta * lambda * Scalar(2) / static_cast<Scalar>(e_ids.size());
  const Scalar scale_f = eta * lambda * Scalar(2) / static_cast<Scalar>(f_ids.size());
  for (WordId id : e_ids) apply_row_step(input_e, id, scale_e * gap, clip, monitor);
  for (WordId id : f_ids) apply_row_step(input_f, id, scale_f * gap, clip, monitor);
  return stats;
}

// Sum_ij a_ij ||r_e_i - r_f_j||^2. Quadratic in the vocabulary sizes; meant
// for small-scale verification, not training.
template <class Scalar>
Scalar exact_xling_objective(const MatrixX<Scalar>& alignment, const MatrixX<Scalar>& input_e,
                             const MatrixX<Scalar>& input_f) {
  if (alignment.rows() != input_e.rows() || alignment.cols() != input_f.rows()) {
    throw std::invalid_argument("exact_xling_objective: alignment dims do not match embeddings");
  }
  if (input_e.cols() != input_f.cols()) {
    throw std::invalid_argument("exact_xling_objective: dimensionality mismatch");
  }
  Scalar total(0);
  for (Eigen::Index i = 0; i < alignment.rows(); ++i) {
    for (Eigen::Index j = 0; j < alignment.cols(); ++j) {
      const Scalar a = alignment(i, j);
      if (a == Scalar(0)) continue;
      total += a * (input_e.row(i) - input_f.row(j)).squaredNorm();
    }
  }
  return total;
}

// Draws sentence pairs either uniformly at random or as a cyclic sweep.
class ParallelSampler {
 public:
  explicit ParallelSampler(std::span<const SentencePair> pairs, bool sequential = false)
      : pairs_(pairs), sequential_(sequential) {
    if (pairs.empty()) throw std::invalid_argument("ParallelSampler: empty parallel corpus");
  }

  const SentencePair& next(Rng& rng) {
    if (sequential_) {
      const SentencePair& pair = pairs_[cursor_];
      cursor_ = (cursor_ + 1) % pairs_.size();
      return pair;
    }
    std::uniform_int_distribution<std::size_t> pick(0, pairs_.size() - 1);
    return pairs_[pick(rng)];
  }

  std::size_t size() const { return pairs_.size(); }

 private:
  std::span<const SentencePair> pairs_;
  bool sequential_;
  std::size_t cursor_ = 0;
};

// One cross-lingual training step: sample a pair, subsample both sides with
// the parallel-corpus keep probabilities, then update. If either side comes
// back empty the step is a no-op (m or n stays 0).
template <class Scalar>
XlingStepStats xling_step(ParallelSampler& sampler, MatrixX<Scalar>& input_e,
                          MatrixX<Scalar>& input_f, const SubsampleTable& subsample_e,
                          const SubsampleTable& subsample_f, Scalar lambda, Scalar eta,
                          Scalar clip, Rng& rng, UpdateMonitor* monitor = nullptr) {
  const SentencePair& pair = sampler.next(rng);
  std::vector<WordId> e_ids = subsample_e.apply(pair.e_ids, rng);
  std::vector<WordId> f_ids = subsample_f.apply(pair.f_ids, rng);
  if (e_ids.empty() || f_ids.empty()) {
    XlingStepStats stats;
    stats.m = static_cast<int>(e_ids.size());
    stats.n = static_cast<int>(f_ids.size());
    return stats;
  }
  return bilbowa_update(std::span<const WordId>(e_ids), std::span<const WordId>(f_ids), input_e,
                        input_f, lambda, eta, clip, monitor);
}

}  // namespace bilbowa
