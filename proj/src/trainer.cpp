#include "bilbowa/trainer.hpp"

#include <fstream>
#include <sstream>

namespace bilbowa {

namespace {

std::vector<std::vector<WordId>> load_mono_sentences(const std::string& path,
                                                     const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus: " + path);
  return detail::ids_from_stream(in, vocab);
}

}  // namespace

TrainData load_train_data(const std::string& mono_e_path, const std::string& mono_f_path,
                          const std::string& parallel_e_path, const std::string& parallel_f_path,
                          const TrainConfig& config) {
  TrainData data;
  data.vocab_e = build_vocab_file(mono_e_path, config.min_count, config.max_vocab);
  data.vocab_f = build_vocab_file(mono_f_path, config.min_count, config.max_vocab);
  data.mono_e = load_mono_sentences(mono_e_path, data.vocab_e);
  data.mono_f = load_mono_sentences(mono_f_path, data.vocab_f);
  if (!parallel_e_path.empty() || !parallel_f_path.empty()) {
    std::ifstream par_e(parallel_e_path);
    if (!par_e) throw IngestError("cannot open parallel corpus: " + parallel_e_path);
    std::ifstream par_f(parallel_f_path);
    if (!par_f) throw IngestError("cannot open parallel corpus: " + parallel_f_path);
    data.parallel = read_parallel(par_e, par_f, data.vocab_e, data.vocab_f);
  }
  detail::add_parallel_counts(data);
  return data;
}

TrainData make_train_data(std::span<const std::string> mono_e, std::span<const std::string> mono_f,
                          std::span<const std::string> parallel_e,
                          std::span<const std::string> parallel_f, const TrainConfig& config) {
  auto join = [](std::span<const std::string> lines) {
    std::stringstream s;
    for (const std::string& line : lines) s << line << '\n';
    return s;
  };
  TrainData data;
  data.vocab_e = build_vocab(mono_e, config.min_count, config.max_vocab);
  data.vocab_f = build_vocab(mono_f, config.min_count, config.max_vocab);
  {
    std::stringstream se = join(mono_e);
    data.mono_e = detail::ids_from_stream(se, data.vocab_e);
    std::stringstream sf = join(mono_f);
    data.mono_f = detail::ids_from_stream(sf, data.vocab_f);
  }
  if (!parallel_e.empty() || !parallel_f.empty()) {
    std::stringstream pe = join(parallel_e);
    std::stringstream pf = join(parallel_f);
    data.parallel = read_parallel(pe, pf, data.vocab_e, data.vocab_f);
  }
  detail::add_parallel_counts(data);
  return data;
}

std::vector<ProbePair> draw_probe_pairs(const std::vector<std::vector<WordId>>& sentences,
                                        const NoiseTable& noise, int window, int negatives,
                                        int pairs, Rng& rng) {
  std::vector<ProbePair> out;
  if (sentences.empty() || pairs <= 0) return out;
  std::uniform_int_distribution<std::size_t> pick_sentence(0, sentences.size() - 1);
  std::uniform_int_distribution<int> shrink(1, window);
  int attempts = pairs * 20;
  while (static_cast<int>(out.size()) < pairs && attempts-- > 0) {
    const std::vector<WordId>& s = sentences[pick_sentence(rng)];
    if (s.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pick_pos(0, s.size() - 1);
    const std::size_t t = pick_pos(rng);
    const int b = shrink(rng);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(t) - b);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(s.size()) - 1, static_cast<std::ptrdiff_t>(t) + b);
    if (hi == lo) continue;
    std::uniform_int_distribution<std::ptrdiff_t> pick_ctx(lo, hi - 1);
    std::ptrdiff_t c = pick_ctx(rng);
    if (c >= static_cast<std::ptrdiff_t>(t)) ++c;  // skip the center position
    ProbePair pair;
    pair.center = s[t];
    pair.context = s[static_cast<std::size_t>(c)];
    pair.noise.resize(static_cast<std::size_t>(negatives));
    for (WordId& n : pair.noise) {
      n = noise.sample(rng);
      if (n == pair.context) n = noise.sample(rng);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

ProbeSample make_probe_sample(const TrainData& data, const TrainConfig& config, int pairs,
                              std::uint64_t seed) {
  ProbeSample sample;
  if (pairs <= 0) return sample;
  Rng rng(seed);
  if (!data.mono_e.empty() && !data.vocab_e.empty()) {
    NoiseTable noise(data.vocab_e, config.noise_alpha);
    sample.pairs_e =
        draw_probe_pairs(data.mono_e, noise, config.window, config.negatives, pairs, rng);
  }
  if (!data.mono_f.empty() && !data.vocab_f.empty()) {
    NoiseTable noise(data.vocab_f, config.noise_alpha);
    sample.pairs_f =
        draw_probe_pairs(data.mono_f, noise, config.window, config.negatives, pairs, rng);
  }
  if (!data.parallel.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, data.parallel.size() - 1);
    sample.parallel.reserve(static_cast<std::size_t>(pairs));
    for (int i = 0; i < pairs; ++i) sample.parallel.push_back(data.parallel[pick(rng)]);
  }
  return sample;
}

}  // namespace bilbowa
