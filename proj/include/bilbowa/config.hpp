#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bilbowa {

struct TrainConfig {
  int dim = 40;
  int window = 5;
  int negatives = 15;
  double eta0 = 0.1;
  double lambda = 1.0;  // 0 disables the cross-lingual term
  double clip = 0.1;
  double mono_subsample_t = 1e-4;      // 0 disables
  double parallel_subsample_t = 1e-4;  // 0 disables
  int epochs = 1;
  int workers_per_language = 1;
  int xling_workers = 1;
  std::uint64_t seed = 1;
  double noise_alpha = 0.75;
  std::uint64_t min_count = 5;
  std::size_t max_vocab = 0;  // 0 = unlimited
  bool deterministic = false;

  // Cross-lingual steps per 1000 monolingual words. <= 0 keeps the default
  // scheduling: one step per round in deterministic mode, unthrottled in
  // asynchronous mode.
  double xling_steps_per_kword = 0.0;
  // Consume the parallel corpus as a cyclic sweep instead of uniform draws.
  bool sequential_parallel = false;

  std::uint64_t log_every_words = 100000;
  int probe_pairs = 256;  // held-out sample size per loss term

  std::string lang_e = "e";
  std::string lang_f = "f";

  void validate() const {
    if (dim < 1) throw std::invalid_argument("config: dim must be >= 1");
    if (window < 1) throw std::invalid_argument("config: window must be >= 1");
    if (negatives < 1) throw std::invalid_argument("config: negatives must be >= 1");
    if (!(eta0 > 0.0)) throw std::invalid_argument("config: eta0 must be positive");
    if (!(clip > 0.0)) throw std::invalid_argument("config: clip must be positive");
    if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (workers_per_language < 1 || xling_workers < 1) {
      throw std::invalid_argument("config: worker counts must be >= 1");
    }
    if (deterministic && (workers_per_language > 1 || xling_workers > 1)) {
      throw std::invalid_argument("config: deterministic mode requires single workers");
    }
    if (noise_alpha < 0.0 || noise_alpha > 1.0) {
      throw std::invalid_argument("config: noise_alpha must be in [0,1]");
    }
    if (min_count < 1) throw std::invalid_argument("config: min_count must be >= 1");
  }
};

}  // namespace bilbowa
