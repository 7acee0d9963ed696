#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bilbowa/config.hpp"
#include "bilbowa/corpus.hpp"
#include "bilbowa/error.hpp"
#include "bilbowa/model.hpp"
#include "bilbowa/skipgram.hpp"
#include "bilbowa/update.hpp"
#include "bilbowa/vocab.hpp"
#include "bilbowa/xling.hpp"

namespace bilbowa {

// Linear decay from eta0 with a floor of eta0 * 1e-4.
inline double lr_schedule(double progress, double eta0) {
  return std::max(eta0 * (1.0 - progress), eta0 * 1e-4);
}

// Shared monotone counter of monolingual target words consumed across all
// workers; drives the learning-rate schedule.
class ProgressCounter {
 public:
  ProgressCounter() = default;
  explicit ProgressCounter(std::uint64_t total) : total_(total) {}

  void add(std::uint64_t n) { processed_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t processed() const {
    return std::min(processed_.load(std::memory_order_relaxed), total_);
  }
  std::uint64_t total() const { return total_; }
  double fraction() const {
    if (total_ == 0) return 1.0;
    return static_cast<double>(processed()) / static_cast<double>(total_);
  }

 private:
  std::atomic<std::uint64_t> processed_{0};
  std::uint64_t total_ = 0;
};

// Everything the trainer consumes, resolved to ids. Monolingual sentences
// are non-empty id sequences; parallel-side unigram counts feed the
// parallel subsampling tables.
struct TrainData {
  Vocabulary vocab_e;
  Vocabulary vocab_f;
  std::vector<std::vector<WordId>> mono_e;
  std::vector<std::vector<WordId>> mono_f;
  std::vector<SentencePair> parallel;
  std::vector<std::uint64_t> parallel_counts_e;
  std::vector<std::uint64_t> parallel_counts_f;
  std::uint64_t parallel_tokens_e = 0;
  std::uint64_t parallel_tokens_f = 0;

  std::uint64_t mono_tokens_e() const {
    std::uint64_t n = 0;
    for (const auto& s : mono_e) n += s.size();
    return n;
  }
  std::uint64_t mono_tokens_f() const {
    std::uint64_t n = 0;
    for (const auto& s : mono_f) n += s.size();
    return n;
  }
};

namespace detail {

inline void add_parallel_counts(TrainData& data) {
  data.parallel_counts_e.assign(data.vocab_e.size(), 0);
  data.parallel_counts_f.assign(data.vocab_f.size(), 0);
  data.parallel_tokens_e = 0;
  data.parallel_tokens_f = 0;
  for (const SentencePair& pair : data.parallel) {
    for (WordId id : pair.e_ids) ++data.parallel_counts_e[static_cast<std::size_t>(id)];
    for (WordId id : pair.f_ids) ++data.parallel_counts_f[static_cast<std::size_t>(id)];
    data.parallel_tokens_e += pair.e_ids.size();
    data.parallel_tokens_f += pair.f_ids.size();
  }
}

inline std::vector<std::vector<WordId>> ids_from_stream(std::istream& in,
                                                        const Vocabulary& vocab) {
  std::vector<std::vector<WordId>> sentences;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<WordId> ids = vocab.to_ids(line);
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }
  return sentences;
}

}  // namespace detail

// Builds vocabularies from the monolingual corpora, maps everything to ids,
// and gathers parallel-side counts. Parallel paths may be empty when the
// cross-lingual term is disabled.
TrainData load_train_data(const std::string& mono_e_path, const std::string& mono_f_path,
                          const std::string& parallel_e_path, const std::string& parallel_f_path,
                          const TrainConfig& config);

// In-memory variant for tests and embedding callers.
TrainData make_train_data(std::span<const std::string> mono_e, std::span<const std::string> mono_f,
                          std::span<const std::string> parallel_e,
                          std::span<const std::string> parallel_f, const TrainConfig& config);

struct ProgressRecord {
  std::uint64_t step = 0;   // record ordinal
  std::uint64_t words = 0;  // monolingual words processed
  double eta = 0.0;
  double mono_loss_e = 0.0;
  double mono_loss_f = 0.0;
  double xling_loss = 0.0;
};

using ProgressSink = std::function<void(const ProgressRecord&)>;

// Pre-drawn evaluation pairs used to report losses without mutating the
// model.
struct ProbePair {
  WordId center;
  WordId context;
  std::vector<WordId> noise;
};

struct ProbeSample {
  std::vector<ProbePair> pairs_e;
  std::vector<ProbePair> pairs_f;
  std::vector<SentencePair> parallel;
};

// Draws (center, context, noise) triples the same way training does, minus
// subsampling: uniform sentence, uniform position, dynamic window.
std::vector<ProbePair> draw_probe_pairs(const std::vector<std::vector<WordId>>& sentences,
                                        const NoiseTable& noise, int window, int negatives,
                                        int pairs, Rng& rng);

ProbeSample make_probe_sample(const TrainData& data, const TrainConfig& config, int pairs,
                              std::uint64_t seed);

struct ProbeLosses {
  double mono_e = 0.0;
  double mono_f = 0.0;
  double xling = 0.0;
};

// Averaged sg_loss per language and averaged bilbowa_loss on the sample.
// Read-only; empty categories report NaN.
template <class Scalar>
ProbeLosses loss_probe(const MatrixX<Scalar>& input_e, const MatrixX<Scalar>& output_e,
                       const MatrixX<Scalar>& input_f, const MatrixX<Scalar>& output_f,
                       const ProbeSample& sample) {
  auto mono_mean = [](const MatrixX<Scalar>& input, const MatrixX<Scalar>& output,
                      const std::vector<ProbePair>& pairs) {
    if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const ProbePair& p : pairs) {
      total += static_cast<double>(
          sg_loss(input, output, p.center, p.context, std::span<const WordId>(p.noise)));
    }
    return total / static_cast<double>(pairs.size());
  };
  ProbeLosses losses;
  losses.mono_e = mono_mean(input_e, output_e, sample.pairs_e);
  losses.mono_f = mono_mean(input_f, output_f, sample.pairs_f);
  if (sample.parallel.empty()) {
    losses.xling = std::numeric_limits<double>::quiet_NaN();
  } else {
    double total = 0.0;
    for (const SentencePair& pair : sample.parallel) {
      total += static_cast<double>(bilbowa_loss(std::span<const WordId>(pair.e_ids),
                                                std::span<const WordId>(pair.f_ids), input_e,
                                                input_f));
    }
    losses.xling = total / static_cast<double>(sample.parallel.size());
  }
  return losses;
}

template <class Scalar>
ProbeLosses loss_probe(const EmbeddingModel<Scalar>& model, const ProbeSample& sample) {
  return loss_probe(model.input_e, model.output_e, model.input_f, model.output_f, sample);
}

struct TrainStats {
  double train_seconds = 0.0;  // worker phase only
  std::uint64_t words_processed = 0;
  std::uint64_t sg_updates = 0;
  std::uint64_t xling_steps = 0;
};

template <class Scalar>
struct TrainResult {
  EmbeddingModel<Scalar> model;
  TrainStats stats;
};

namespace detail {

inline constexpr std::uint64_t kSeedInputE = 0x11;
inline constexpr std::uint64_t kSeedInputF = 0x22;
inline constexpr std::uint64_t kSeedMonoE = 0x1000;
inline constexpr std::uint64_t kSeedMonoF = 0x2000;
inline constexpr std::uint64_t kSeedXling = 0x3000;
inline constexpr std::uint64_t kSeedProbe = 0x4000;
inline constexpr std::uint64_t kFiniteCheckEvery = 1u << 20;

template <class Scalar>
struct TrainerState {
  const TrainConfig& cfg;
  const TrainData& data;
  MatrixX<Scalar> input_e, input_f, output_e, output_f;
  NoiseTable noise_e, noise_f;
  SubsampleTable mono_sub_e, mono_sub_f, par_sub_e, par_sub_f;
  ProgressCounter words;
  UpdateMonitor* monitor = nullptr;
  std::atomic<std::uint64_t> sg_updates{0};
  std::atomic<std::uint64_t> xling_steps{0};
  std::atomic<bool> stop{false};
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  TrainerState(const TrainConfig& config, const TrainData& d, std::uint64_t words_total)
      : cfg(config),
        data(d),
        noise_e(d.vocab_e, config.noise_alpha),
        noise_f(d.vocab_f, config.noise_alpha),
        mono_sub_e(d.vocab_e.counts(), d.vocab_e.total_tokens(), config.mono_subsample_t),
        mono_sub_f(d.vocab_f.counts(), d.vocab_f.total_tokens(), config.mono_subsample_t),
        par_sub_e(d.parallel_counts_e, d.parallel_tokens_e, config.parallel_subsample_t),
        par_sub_f(d.parallel_counts_f, d.parallel_tokens_f, config.parallel_subsample_t),
        words(words_total) {
    input_e = init_embeddings<Scalar>(static_cast<Eigen::Index>(d.vocab_e.size()), cfg.dim,
                                      mix_seed(cfg.seed, kSeedInputE), InitScheme::kGaussian);
    input_f = init_embeddings<Scalar>(static_cast<Eigen::Index>(d.vocab_f.size()), cfg.dim,
                                      mix_seed(cfg.seed, kSeedInputF), InitScheme::kGaussian);
    output_e = init_embeddings<Scalar>(static_cast<Eigen::Index>(d.vocab_e.size()), cfg.dim, 0,
                                       InitScheme::kZeros);
    output_f = init_embeddings<Scalar>(static_cast<Eigen::Index>(d.vocab_f.size()), cfg.dim, 0,
                                       InitScheme::kZeros);
  }

  bool xling_enabled() const { return cfg.lambda > 0.0 && !data.parallel.empty(); }

  void fail(std::exception_ptr e) {
    std::lock_guard<std::mutex> lock(failure_mutex);
    if (!failure) failure = e;
    failed.store(true, std::memory_order_relaxed);
    stop.store(true, std::memory_order_relaxed);
  }

  void rethrow_if_failed() {
    if (failed.load(std::memory_order_relaxed)) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (failure) std::rethrow_exception(failure);
    }
  }

  // Per-worker reusable buffers; the sentence loop must not allocate.
  struct WorkerScratch {
    std::vector<WordId> noise;
    std::vector<WordId> kept;
    std::vector<TrainingPair> pairs;
    std::uint64_t updates = 0;
    std::uint64_t next_finite_check = kFiniteCheckEvery;

    explicit WorkerScratch(int negatives)
        : noise(static_cast<std::size_t>(negatives)) {}
  };

  // Subsample, extract pairs, update. Returns the raw token count consumed.
  std::uint64_t mono_sentence_step(bool lang_e, const std::vector<WordId>& sentence, Rng& rng,
                                   WorkerScratch& scratch, const char* worker_name) {
    MatrixX<Scalar>& input = lang_e ? input_e : input_f;
    MatrixX<Scalar>& output = lang_e ? output_e : output_f;
    const NoiseTable& noise_table = lang_e ? noise_e : noise_f;
    const SubsampleTable& sub = lang_e ? mono_sub_e : mono_sub_f;

    words.add(sentence.size());
    const Scalar eta = static_cast<Scalar>(lr_schedule(words.fraction(), cfg.eta0));
    sub.apply_into(sentence, rng, scratch.kept);
    extract_pairs_into(scratch.kept, cfg.window, rng, scratch.pairs);
    for (const TrainingPair& pair : scratch.pairs) {
      for (int i = 0; i < cfg.negatives; ++i) {
        WordId n = noise_table.sample(rng);
        if (n == pair.context) n = noise_table.sample(rng);  // single retry, then accept
        scratch.noise[static_cast<std::size_t>(i)] = n;
      }
      sg_update<Scalar, false>(input, output, pair.center, pair.context,
                               std::span<const WordId>(scratch.noise), eta,
                               static_cast<Scalar>(cfg.clip), monitor);
      if (++scratch.updates >= scratch.next_finite_check) {
        scratch.next_finite_check += kFiniteCheckEvery;
        if (!std::isfinite(static_cast<double>(input(pair.center, 0)))) {
          throw NumericError(std::string("non-finite parameters detected by ") + worker_name +
                             " after " + std::to_string(scratch.updates) + " updates");
        }
      }
    }
    return sentence.size();
  }
};

}  // namespace detail

// Joint asynchronous training: one skipgram worker set per language plus a
// cross-lingual worker sharing the embedding matrices without locks, or a
// single-threaded round-robin interleave in deterministic mode.
template <class Scalar>
TrainResult<Scalar> train(const TrainConfig& cfg, const TrainData& data, ProgressSink sink = {},
                          UpdateMonitor* monitor = nullptr) {
  cfg.validate();
  if (data.vocab_e.empty() || data.mono_e.empty()) {
    throw IngestError("monolingual corpus for language " + cfg.lang_e + " is empty");
  }
  if (data.vocab_f.empty() || data.mono_f.empty()) {
    throw IngestError("monolingual corpus for language " + cfg.lang_f + " is empty");
  }
  if (cfg.lambda > 0.0 && data.parallel.empty()) {
    throw IngestError("parallel corpus is empty but lambda > 0");
  }

  const std::uint64_t tokens_e = data.mono_tokens_e();
  const std::uint64_t tokens_f = data.mono_tokens_f();
  const std::uint64_t words_total = static_cast<std::uint64_t>(cfg.epochs) * (tokens_e + tokens_f);

  detail::TrainerState<Scalar> state(cfg, data, words_total);
  state.monitor = monitor;
  ProbeSample probe = make_probe_sample(data, cfg, cfg.probe_pairs,
                                        mix_seed(cfg.seed, detail::kSeedProbe));

  std::uint64_t record_index = 0;
  std::uint64_t next_log = cfg.log_every_words == 0 ? ~0ull : cfg.log_every_words;
  auto emit = [&](std::uint64_t at_words) {
    if (!sink) return;
    ProbeLosses losses =
        loss_probe(state.input_e, state.output_e, state.input_f, state.output_f, probe);
    sink(ProgressRecord{++record_index, at_words, lr_schedule(state.words.fraction(), cfg.eta0),
                        losses.mono_e, losses.mono_f, losses.xling});
  };

  const auto t0 = std::chrono::steady_clock::now();

  if (cfg.deterministic) {
    Rng rng_e(mix_seed(cfg.seed, detail::kSeedMonoE));
    Rng rng_f(mix_seed(cfg.seed, detail::kSeedMonoF));
    Rng rng_x(mix_seed(cfg.seed, detail::kSeedXling));
    typename detail::TrainerState<Scalar>::WorkerScratch scratch_e(cfg.negatives);
    typename detail::TrainerState<Scalar>::WorkerScratch scratch_f(cfg.negatives);
    std::optional<ParallelSampler> sampler;
    if (state.xling_enabled()) sampler.emplace(data.parallel, cfg.sequential_parallel);

    std::uint64_t cursor_e = 0, cursor_f = 0;
    int epoch_e = 0, epoch_f = 0;
    std::uint64_t xsteps = 0;
    double owed_xling = 0.0;

    auto advance = [&](bool lang_e, std::uint64_t& cursor, int& epoch, Rng& rng,
                       typename detail::TrainerState<Scalar>::WorkerScratch& scratch)
        -> std::uint64_t {
      const auto& sentences = lang_e ? data.mono_e : data.mono_f;
      if (epoch >= cfg.epochs) return 0;
      std::uint64_t consumed = state.mono_sentence_step(
          lang_e, sentences[cursor], rng, scratch, lang_e ? "mono_e worker 0" : "mono_f worker 0");
      if (++cursor == sentences.size()) {
        cursor = 0;
        ++epoch;
      }
      return consumed;
    };

    while (epoch_e < cfg.epochs || epoch_f < cfg.epochs) {
      std::uint64_t round_tokens = 0;
      round_tokens += advance(true, cursor_e, epoch_e, rng_e, scratch_e);
      round_tokens += advance(false, cursor_f, epoch_f, rng_f, scratch_f);
      if (sampler) {
        const Scalar eta = static_cast<Scalar>(lr_schedule(state.words.fraction(), cfg.eta0));
        std::uint64_t steps = 1;
        if (cfg.xling_steps_per_kword > 0.0) {
          owed_xling += static_cast<double>(round_tokens) * cfg.xling_steps_per_kword / 1000.0;
          steps = static_cast<std::uint64_t>(owed_xling);
          owed_xling -= static_cast<double>(steps);
        }
        for (std::uint64_t s = 0; s < steps; ++s) {
          XlingStepStats st = xling_step(*sampler, state.input_e, state.input_f, state.par_sub_e,
                                         state.par_sub_f, static_cast<Scalar>(cfg.lambda), eta,
                                         static_cast<Scalar>(cfg.clip), rng_x, monitor);
          ++xsteps;
          if (xsteps % detail::kFiniteCheckEvery == 0 && !std::isfinite(st.loss)) {
            throw NumericError("non-finite parameters detected by xling worker 0 after " +
                               std::to_string(xsteps) + " steps");
          }
        }
      }
      if (state.words.processed() >= next_log) {
        emit(state.words.processed());
        next_log += cfg.log_every_words;
      }
    }
    state.sg_updates = scratch_e.updates + scratch_f.updates;
    state.xling_steps = xsteps;
  } else {
    std::atomic<int> mono_active{2 * cfg.workers_per_language};
    std::vector<std::thread> threads;

    auto mono_worker = [&](bool lang_e, int index) {
      try {
        const auto& sentences = lang_e ? data.mono_e : data.mono_f;
        Rng rng(mix_seed(cfg.seed, (lang_e ? detail::kSeedMonoE : detail::kSeedMonoF) +
                                       static_cast<std::uint64_t>(index)));
        typename detail::TrainerState<Scalar>::WorkerScratch scratch(cfg.negatives);
        const std::string name = std::string(lang_e ? "mono_e" : "mono_f") + " worker " +
                                 std::to_string(index);
        const std::size_t stride = static_cast<std::size_t>(cfg.workers_per_language);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
          for (std::size_t s = static_cast<std::size_t>(index); s < sentences.size();
               s += stride) {
            if (state.failed.load(std::memory_order_relaxed)) break;
            state.mono_sentence_step(lang_e, sentences[s], rng, scratch, name.c_str());
          }
          if (state.failed.load(std::memory_order_relaxed)) break;
        }
        state.sg_updates.fetch_add(scratch.updates, std::memory_order_relaxed);
      } catch (...) {
        state.fail(std::current_exception());
      }
      mono_active.fetch_sub(1, std::memory_order_relaxed);
    };

    auto xling_worker = [&](int index) {
      try {
        if (!state.xling_enabled()) return;
        Rng rng(mix_seed(cfg.seed, detail::kSeedXling + static_cast<std::uint64_t>(index)));
        ParallelSampler sampler(data.parallel, cfg.sequential_parallel);
        std::uint64_t steps = 0;
        const double ratio = cfg.xling_steps_per_kword;
        while (!state.stop.load(std::memory_order_relaxed)) {
          if (ratio > 0.0) {
            const double budget = static_cast<double>(state.words.processed()) * ratio / 1000.0;
            if (static_cast<double>(steps) >= budget) {
              std::this_thread::yield();
              continue;
            }
          }
          const Scalar eta = static_cast<Scalar>(lr_schedule(state.words.fraction(), cfg.eta0));
          XlingStepStats st = xling_step(sampler, state.input_e, state.input_f, state.par_sub_e,
                                         state.par_sub_f, static_cast<Scalar>(cfg.lambda), eta,
                                         static_cast<Scalar>(cfg.clip), rng, monitor);
          ++steps;
          if (steps % detail::kFiniteCheckEvery == 0 && !std::isfinite(st.loss)) {
            throw NumericError("non-finite parameters detected by xling worker " +
                               std::to_string(index) + " after " + std::to_string(steps) +
                               " steps");
          }
        }
        state.xling_steps.fetch_add(steps, std::memory_order_relaxed);
      } catch (...) {
        state.fail(std::current_exception());
      }
    };

    threads.reserve(static_cast<std::size_t>(2 * cfg.workers_per_language + cfg.xling_workers));
    for (int w = 0; w < cfg.workers_per_language; ++w) threads.emplace_back(mono_worker, true, w);
    for (int w = 0; w < cfg.workers_per_language; ++w) threads.emplace_back(mono_worker, false, w);
    for (int w = 0; w < cfg.xling_workers; ++w) threads.emplace_back(xling_worker, w);

    while (mono_active.load(std::memory_order_relaxed) > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      if (state.words.processed() >= next_log) {
        emit(state.words.processed());
        next_log += cfg.log_every_words;
      }
    }
    state.stop.store(true, std::memory_order_relaxed);
    for (std::thread& t : threads) t.join();
  }

  const auto t1 = std::chrono::steady_clock::now();
  state.rethrow_if_failed();

  if (!state.input_e.allFinite() || !state.input_f.allFinite() || !state.output_e.allFinite() ||
      !state.output_f.allFinite()) {
    throw NumericError("non-finite parameters in final model");
  }

  emit(state.words.processed());  // final record

  TrainResult<Scalar> result;
  result.model.lang_e = cfg.lang_e;
  result.model.lang_f = cfg.lang_f;
  result.model.input_e = std::move(state.input_e);
  result.model.input_f = std::move(state.input_f);
  result.model.output_e = std::move(state.output_e);
  result.model.output_f = std::move(state.output_f);
  result.model.config = cfg;
  result.stats.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  result.stats.words_processed = state.words.processed();
  result.stats.sg_updates = state.sg_updates.load();
  result.stats.xling_steps = state.xling_steps.load();
  return result;
}

}  // namespace bilbowa
