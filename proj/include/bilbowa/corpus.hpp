#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bilbowa/types.hpp"
#include "bilbowa/vocab.hpp"

namespace bilbowa {

// One line-aligned pair of id sequences; both sides non-empty by construction.
struct SentencePair {
  std::vector<WordId> e_ids;
  std::vector<WordId> f_ids;
};

// p_keep = min(1, sqrt(threshold / freq)); monotone non-increasing in freq.
// freq must be positive.
double keep_probability(double freq, double threshold);

// Each token is independently retained with keep_probability(freq, threshold);
// order is preserved. threshold <= 0 disables subsampling (everything kept).
std::vector<WordId> subsample_sentence(std::span<const WordId> ids, const Vocabulary& vocab,
                                       double threshold, Rng& rng);

// Precomputed per-id keep probabilities, so hot loops avoid recomputing
// sqrt(t/f). Ids with zero count keep probability 1 (they never occur in the
// counted corpus anyway).
class SubsampleTable {
 public:
  SubsampleTable() = default;  // disabled: keeps everything
  SubsampleTable(std::span<const std::uint64_t> counts, std::uint64_t total_tokens,
                 double threshold);

  bool enabled() const { return enabled_; }
  double keep(WordId id) const { return enabled_ ? keep_[static_cast<std::size_t>(id)] : 1.0; }
  std::vector<WordId> apply(std::span<const WordId> ids, Rng& rng) const;
  void apply_into(std::span<const WordId> ids, Rng& rng, std::vector<WordId>& kept) const;

 private:
  std::vector<double> keep_;
  bool enabled_ = false;
};

// Streams line-aligned sentence pairs from two sources. Out-of-vocabulary
// tokens are dropped; pairs with either side empty after dropping are
// skipped. A line-count mismatch between the sources is an ingestion error
// reporting both counts.
class ParallelReader {
 public:
  ParallelReader(std::istream& source_e, std::istream& source_f, const Vocabulary& vocab_e,
                 const Vocabulary& vocab_f);

  std::optional<SentencePair> next();

  std::uint64_t lines_e() const { return lines_e_; }
  std::uint64_t lines_f() const { return lines_f_; }

 private:
  std::istream& source_e_;
  std::istream& source_f_;
  const Vocabulary& vocab_e_;
  const Vocabulary& vocab_f_;
  std::uint64_t lines_e_ = 0;
  std::uint64_t lines_f_ = 0;
};

std::vector<SentencePair> read_parallel(std::istream& source_e, std::istream& source_f,
                                        const Vocabulary& vocab_e, const Vocabulary& vocab_f);

// Noise-word sampler with P(i) proportional to count_i^alpha. Implemented as
// an alias table over the V ids, so the produced distribution is exact and
// every id has nonzero probability. Immutable after construction.
class NoiseTable {
 public:
  NoiseTable(std::span<const std::uint64_t> counts, double alpha);
  NoiseTable(const Vocabulary& vocab, double alpha) : NoiseTable(vocab.counts(), alpha) {}

  WordId sample(Rng& rng) const;
  double probability(WordId id) const { return target_[static_cast<std::size_t>(id)]; }
  double alpha() const { return alpha_; }
  std::size_t size() const { return accept_.size(); }

 private:
  std::vector<double> accept_;  // acceptance threshold per slot
  std::vector<WordId> alias_;
  std::vector<double> target_;  // exact normalized probabilities
  double alpha_ = 0.75;
};

// Validates slots >= V, then builds the sampler. The alias structure needs
// exactly V slots and realizes the target distribution exactly, so any
// admissible slot budget satisfies the quantization contract.
NoiseTable build_noise_table(const Vocabulary& vocab, double alpha, std::size_t slots);

}  // namespace bilbowa
