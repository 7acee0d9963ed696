#include "bilbowa/corpus.hpp"

#include <cmath>
#include <istream>
#include <stdexcept>
#include <string>

#include "bilbowa/error.hpp"

namespace bilbowa {

double keep_probability(double freq, double threshold) {
  if (freq <= 0.0) throw std::domain_error("keep_probability: freq must be positive");
  return std::min(1.0, std::sqrt(threshold / freq));
}

std::vector<WordId> subsample_sentence(std::span<const WordId> ids, const Vocabulary& vocab,
                                       double threshold, Rng& rng) {
  std::vector<WordId> kept;
  kept.reserve(ids.size());
  if (threshold <= 0.0) {
    kept.assign(ids.begin(), ids.end());
    return kept;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (WordId id : ids) {
    double p = keep_probability(vocab.frequency(id), threshold);
    if (p >= 1.0 || unit(rng) < p) kept.push_back(id);
  }
  return kept;
}

SubsampleTable::SubsampleTable(std::span<const std::uint64_t> counts, std::uint64_t total_tokens,
                               double threshold) {
  if (threshold <= 0.0) return;
  enabled_ = true;
  keep_.resize(counts.size(), 1.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0 || total_tokens == 0) continue;
    double freq = static_cast<double>(counts[i]) / static_cast<double>(total_tokens);
    keep_[i] = keep_probability(freq, threshold);
  }
}

std::vector<WordId> SubsampleTable::apply(std::span<const WordId> ids, Rng& rng) const {
  std::vector<WordId> kept;
  apply_into(ids, rng, kept);
  return kept;
}

void SubsampleTable::apply_into(std::span<const WordId> ids, Rng& rng,
                                std::vector<WordId>& kept) const {
  kept.clear();
  kept.reserve(ids.size());
  if (!enabled_) {
    kept.assign(ids.begin(), ids.end());
    return;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (WordId id : ids) {
    double p = keep_[static_cast<std::size_t>(id)];
    if (p >= 1.0 || unit(rng) < p) kept.push_back(id);
  }
}

ParallelReader::ParallelReader(std::istream& source_e, std::istream& source_f,
                               const Vocabulary& vocab_e, const Vocabulary& vocab_f)
    : source_e_(source_e), source_f_(source_f), vocab_e_(vocab_e), vocab_f_(vocab_f) {}

std::optional<SentencePair> ParallelReader::next() {
  std::string line_e;
  std::string line_f;
  for (;;) {
    bool got_e = static_cast<bool>(std::getline(source_e_, line_e));
    bool got_f = static_cast<bool>(std::getline(source_f_, line_f));
    if (got_e) ++lines_e_;
    if (got_f) ++lines_f_;
    if (got_e != got_f) {
      // Drain the longer stream so the error can report both totals.
      std::istream& rest = got_e ? source_e_ : source_f_;
      std::uint64_t& count = got_e ? lines_e_ : lines_f_;
      std::string sink;
      while (std::getline(rest, sink)) ++count;
      throw IngestError("parallel line count mismatch " + std::to_string(lines_e_) + "≠" +
                        std::to_string(lines_f_));
    }
    if (!got_e) return std::nullopt;
    SentencePair pair{vocab_e_.to_ids(line_e), vocab_f_.to_ids(line_f)};
    if (pair.e_ids.empty() || pair.f_ids.empty()) continue;
    return pair;
  }
}

std::vector<SentencePair> read_parallel(std::istream& source_e, std::istream& source_f,
                                        const Vocabulary& vocab_e, const Vocabulary& vocab_f) {
  ParallelReader reader(source_e, source_f, vocab_e, vocab_f);
  std::vector<SentencePair> pairs;
  while (auto pair = reader.next()) pairs.push_back(std::move(*pair));
  return pairs;
}

NoiseTable::NoiseTable(std::span<const std::uint64_t> counts, double alpha) : alpha_(alpha) {
  if (counts.empty()) throw std::invalid_argument("NoiseTable: empty vocabulary");
  const std::size_t n = counts.size();
  target_.resize(n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    target_[i] = std::pow(static_cast<double>(counts[i]), alpha);
    norm += target_[i];
  }
  if (norm <= 0.0) throw std::invalid_argument("NoiseTable: all-zero counts");
  for (double& p : target_) p /= norm;

  // Vose alias construction.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    alias_[i] = static_cast<WordId>(i);
    scaled[i] = target_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    std::size_t s = small.back();
    std::size_t l = large.back();
    small.pop_back();
    large.pop_back();
    accept_[s] = scaled[s];
    alias_[s] = static_cast<WordId>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  // Leftovers are 1.0 up to rounding.
  for (std::size_t i : small) accept_[i] = 1.0;
  for (std::size_t i : large) accept_[i] = 1.0;
}

WordId NoiseTable::sample(Rng& rng) const {
  // Multiply-shift slot pick and a 53-bit coin: two raw draws, no division.
  // The residual slot bias of size/2^64 is far below the distributional
  // tolerance any test or training run can resolve.
  const std::size_t i = static_cast<std::size_t>(
      (static_cast<unsigned __int128>(rng()) * accept_.size()) >> 64);
  const double coin = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return coin < accept_[i] ? static_cast<WordId>(i) : alias_[i];
}

NoiseTable build_noise_table(const Vocabulary& vocab, double alpha, std::size_t slots) {
  if (vocab.empty()) throw std::invalid_argument("build_noise_table: empty vocabulary");
  if (slots < vocab.size()) {
    throw std::invalid_argument("build_noise_table: table size below vocabulary size");
  }
  return NoiseTable(vocab, alpha);
}

}  // namespace bilbowa
