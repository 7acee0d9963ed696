// Command-line front end: vocabulary building, joint training, embedding
// export, translation and classification evaluation, and loss probing.
//
// Exit codes: 0 success, 1 usage, 2 input/parse failure, 3 numeric failure.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bilbowa/corpus.hpp"
#include "bilbowa/error.hpp"
#include "bilbowa/eval.hpp"
#include "bilbowa/model.hpp"
#include "bilbowa/trainer.hpp"
#include "bilbowa/vocab.hpp"

namespace {

using nlohmann::json;
using namespace bilbowa;

struct VocabArgs {
  std::string corpus;
  std::string out;
  std::uint64_t min_count = 5;
  std::size_t max_vocab = 0;
};

struct TrainArgs {
  std::string mono_e, mono_f, parallel_e, parallel_f, out_prefix, log_path;
  TrainConfig config;
  bool save_output = false;
};

struct ExportArgs {
  std::string vec, out, words_path;
  std::size_t top = 0;
};

struct TranslateArgs {
  std::string src_vec, tgt_vec, dict, baseline, json_path;
  int k = 5;
};

struct ClassifyArgs {
  std::string src_vec, tgt_vec, train_docs, test_docs, json_path;
  int epochs = 10;
  std::uint64_t seed = 1;
};

struct ProbeArgs {
  std::string vec_e, vec_f, out_vec_e, out_vec_f;
  std::string mono_e, mono_f, parallel_e, parallel_f;
  int samples = 256;
  int window = 5;
  int negatives = 15;
  double noise_alpha = 0.75;
  std::uint64_t seed = 1;
};

int run_vocab(const VocabArgs& args) {
  Vocabulary vocab = build_vocab_file(args.corpus, args.min_count, args.max_vocab);
  save_vocab_file(vocab, args.out);
  std::cout << "V=" << vocab.size() << " tokens=" << vocab.total_tokens() << "\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  TrainConfig config = args.config;
  config.validate();
  const bool with_parallel = config.lambda > 0.0;
  if (with_parallel && (args.parallel_e.empty() || args.parallel_f.empty())) {
    throw std::invalid_argument("--parallel-e and --parallel-f are required unless --lambda 0");
  }
  TrainData data = load_train_data(args.mono_e, args.mono_f,
                                   with_parallel ? args.parallel_e : std::string(),
                                   with_parallel ? args.parallel_f : std::string(), config);

  std::ofstream log_file;
  std::ostream* log = &std::cerr;
  if (!args.log_path.empty()) {
    log_file.open(args.log_path);
    if (!log_file) throw IngestError("cannot open log output: " + args.log_path);
    log = &log_file;
  }
  *log << "step,words_processed,eta,mono_loss_e,mono_loss_f,xling_loss\n";
  ProgressSink sink = [log](const ProgressRecord& r) {
    *log << r.step << ',' << r.words << ',' << r.eta << ',' << r.mono_loss_e << ','
         << r.mono_loss_f << ',' << r.xling_loss << std::endl;
  };

  TrainResult<float> result = train<float>(config, data, sink);
  save_text_file(result.model.input_e, data.vocab_e.words(), args.out_prefix + ".e.vec");
  save_text_file(result.model.input_f, data.vocab_f.words(), args.out_prefix + ".f.vec");
  if (args.save_output) {
    save_text_file(result.model.output_e, data.vocab_e.words(), args.out_prefix + ".e.out.vec");
    save_text_file(result.model.output_f, data.vocab_f.words(), args.out_prefix + ".f.out.vec");
  }
  const double words_per_sec =
      result.stats.train_seconds > 0.0
          ? static_cast<double>(result.stats.words_processed) / result.stats.train_seconds
          : 0.0;
  std::cout << "V_e=" << data.vocab_e.size() << " V_f=" << data.vocab_f.size()
            << " words=" << result.stats.words_processed
            << " sg_updates=" << result.stats.sg_updates
            << " xling_steps=" << result.stats.xling_steps << " seconds=" << std::fixed
            << std::setprecision(2) << result.stats.train_seconds
            << " words_per_sec=" << std::setprecision(0) << words_per_sec << "\n";
  return 0;
}

int run_export(const ExportArgs& args) {
  LoadedEmbeddings<float> loaded = load_text_file<float>(args.vec);
  std::vector<std::string> words;
  MatrixX<float> matrix;
  if (!args.words_path.empty()) {
    std::ifstream in(args.words_path);
    if (!in) throw IngestError("cannot open word list: " + args.words_path);
    WordIndex index(loaded.words);
    std::string word;
    std::vector<WordId> rows;
    while (std::getline(in, word)) {
      if (!word.empty() && word.back() == '\r') word.pop_back();
      if (word.empty()) continue;
      auto id = index.find(word);
      if (!id) throw IngestError("word not present in embeddings: " + word);
      rows.push_back(*id);
      words.push_back(word);
    }
    matrix.resize(static_cast<Eigen::Index>(rows.size()), loaded.matrix.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      matrix.row(static_cast<Eigen::Index>(i)) = loaded.matrix.row(rows[i]);
    }
  } else {
    std::size_t keep = loaded.words.size();
    if (args.top > 0) keep = std::min(keep, args.top);
    words.assign(loaded.words.begin(), loaded.words.begin() + static_cast<std::ptrdiff_t>(keep));
    matrix = loaded.matrix.topRows(static_cast<Eigen::Index>(keep));
  }
  save_text_file(matrix, words, args.out);
  std::cout << "V=" << matrix.rows() << " K=" << matrix.cols() << "\n";
  return 0;
}

int run_translate(const TranslateArgs& args) {
  if (args.k < 1) throw std::invalid_argument("--k must be >= 1");
  if (!args.baseline.empty() && args.baseline != "edit-distance") {
    throw std::invalid_argument("unknown --baseline: " + args.baseline);
  }
  LoadedEmbeddings<float> src = load_text_file<float>(args.src_vec);
  LoadedEmbeddings<float> tgt = load_text_file<float>(args.tgt_vec);
  WordIndex src_index(src.words);
  WordIndex tgt_index(tgt.words);
  TranslationTestSet test = load_translation_pairs_file(args.dict);

  json summary;
  PrecisionStats stats;
  auto evaluate = [&](int k) {
    if (args.baseline == "edit-distance") {
      return edit_distance_baseline(test, tgt_index, k, &stats);
    }
    return precision_at_k(test, src.matrix, src_index, tgt.matrix, tgt_index, k, &stats);
  };
  const double p1 = evaluate(1);
  std::cout << "P@1=" << p1 << "\n";
  summary["p_at_1"] = p1;
  if (args.k > 1) {
    const double pk = evaluate(args.k);
    std::cout << "P@" << args.k << "=" << pk << "\n";
    summary["p_at_" + std::to_string(args.k)] = pk;
  }
  std::cout << "oov_sources=" << stats.oov_sources << "\n";
  summary["oov_sources"] = stats.oov_sources;
  summary["evaluated"] = stats.evaluated;
  summary["baseline"] = args.baseline.empty() ? "cosine" : args.baseline;
  if (!args.json_path.empty()) {
    std::ofstream out(args.json_path);
    if (!out) throw IngestError("cannot open summary output: " + args.json_path);
    out << summary.dump(2) << "\n";
  }
  return 0;
}

int run_classify(const ClassifyArgs& args) {
  LoadedEmbeddings<float> src = load_text_file<float>(args.src_vec);
  LoadedEmbeddings<float> tgt = load_text_file<float>(args.tgt_vec);
  WordIndex src_index(src.words);
  WordIndex tgt_index(tgt.words);
  std::vector<LabeledDocument> train_docs = load_labeled_documents_file(args.train_docs);
  std::vector<LabeledDocument> test_docs = load_labeled_documents_file(args.test_docs);

  TransferResult result = direct_transfer_eval(
      std::span<const LabeledDocument>(train_docs), std::span<const LabeledDocument>(test_docs),
      src.matrix, src_index, tgt.matrix, tgt_index, args.epochs, args.seed);

  json summary;
  for (const auto& [label, accuracy] : result.per_label) {
    std::cout << "acc[" << label << "]=" << accuracy << "\n";
    summary["per_label"][label] = accuracy;
  }
  std::cout << "accuracy=" << result.accuracy << "\n";
  summary["accuracy"] = result.accuracy;
  summary["test_docs"] = result.test_docs;
  if (!args.json_path.empty()) {
    std::ofstream out(args.json_path);
    if (!out) throw IngestError("cannot open summary output: " + args.json_path);
    out << summary.dump(2) << "\n";
  }
  return 0;
}

std::vector<std::vector<WordId>> read_index_sentences(const std::string& path,
                                                      const WordIndex& index) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus: " + path);
  std::vector<std::vector<WordId>> sentences;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<WordId> ids;
    for (std::string_view token : split_tokens(line)) {
      if (auto id = index.find(token)) ids.push_back(*id);
    }
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }
  return sentences;
}

int run_probe(const ProbeArgs& args) {
  LoadedEmbeddings<float> emb_e = load_text_file<float>(args.vec_e);
  LoadedEmbeddings<float> emb_f = load_text_file<float>(args.vec_f);
  WordIndex index_e(emb_e.words);
  WordIndex index_f(emb_f.words);

  auto load_output = [](const std::string& path, const MatrixX<float>& like) {
    if (path.empty()) {
      return MatrixX<float>(MatrixX<float>::Zero(like.rows(), like.cols()));
    }
    LoadedEmbeddings<float> loaded = load_text_file<float>(path);
    if (loaded.matrix.rows() != like.rows() || loaded.matrix.cols() != like.cols()) {
      throw IngestError("output embedding shape does not match input embeddings: " + path);
    }
    return loaded.matrix;
  };
  MatrixX<float> out_e = load_output(args.out_vec_e, emb_e.matrix);
  MatrixX<float> out_f = load_output(args.out_vec_f, emb_f.matrix);

  auto sentences_e = read_index_sentences(args.mono_e, index_e);
  auto sentences_f = read_index_sentences(args.mono_f, index_f);
  auto token_counts = [](const std::vector<std::vector<WordId>>& sentences, std::size_t vocab) {
    std::vector<std::uint64_t> counts(vocab, 0);
    for (const auto& s : sentences) {
      for (WordId id : s) ++counts[static_cast<std::size_t>(id)];
    }
    return counts;
  };

  ProbeSample sample;
  Rng rng(args.seed);
  NoiseTable noise_e(token_counts(sentences_e, index_e.size()), args.noise_alpha);
  NoiseTable noise_f(token_counts(sentences_f, index_f.size()), args.noise_alpha);
  sample.pairs_e =
      draw_probe_pairs(sentences_e, noise_e, args.window, args.negatives, args.samples, rng);
  sample.pairs_f =
      draw_probe_pairs(sentences_f, noise_f, args.window, args.negatives, args.samples, rng);

  if (!args.parallel_e.empty() || !args.parallel_f.empty()) {
    std::ifstream in_e(args.parallel_e);
    if (!in_e) throw IngestError("cannot open parallel corpus: " + args.parallel_e);
    std::ifstream in_f(args.parallel_f);
    if (!in_f) throw IngestError("cannot open parallel corpus: " + args.parallel_f);
    std::string line_e, line_f;
    std::uint64_t n_e = 0, n_f = 0;
    std::vector<SentencePair> pairs;
    for (;;) {
      const bool got_e = static_cast<bool>(std::getline(in_e, line_e));
      const bool got_f = static_cast<bool>(std::getline(in_f, line_f));
      if (got_e) ++n_e;
      if (got_f) ++n_f;
      if (got_e != got_f) {
        std::string sink;
        while (std::getline(got_e ? in_e : in_f, sink)) got_e ? ++n_e : ++n_f;
        throw IngestError("parallel line count mismatch " + std::to_string(n_e) + "≠" +
                          std::to_string(n_f));
      }
      if (!got_e) break;
      SentencePair pair;
      for (std::string_view token : split_tokens(line_e)) {
        if (auto id = index_e.find(token)) pair.e_ids.push_back(*id);
      }
      for (std::string_view token : split_tokens(line_f)) {
        if (auto id = index_f.find(token)) pair.f_ids.push_back(*id);
      }
      if (!pair.e_ids.empty() && !pair.f_ids.empty()) pairs.push_back(std::move(pair));
    }
    if (!pairs.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
      for (int i = 0; i < args.samples; ++i) sample.parallel.push_back(pairs[pick(rng)]);
    }
  }

  ProbeLosses losses = loss_probe(emb_e.matrix, out_e, emb_f.matrix, out_f, sample);
  std::cout << "mono_loss_e=" << losses.mono_e << "\n"
            << "mono_loss_f=" << losses.mono_f << "\n"
            << "xling_loss=" << losses.xling << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilbowa: bilingual word embedding trainer and evaluator"};
  app.require_subcommand(1);

  VocabArgs vocab_args;
  CLI::App* cmd_vocab = app.add_subcommand("vocab", "Build a vocabulary file from a corpus");
  cmd_vocab->add_option("corpus", vocab_args.corpus, "tokenized corpus, one sentence per line")
      ->required();
  cmd_vocab->add_option("--min-count", vocab_args.min_count, "drop words seen fewer times")
      ->capture_default_str();
  cmd_vocab->add_option("--max-vocab", vocab_args.max_vocab, "keep only the most frequent words (0 = all)")
      ->capture_default_str();
  cmd_vocab->add_option("--out", vocab_args.out, "vocabulary output path")->required();

  TrainArgs train_args;
  CLI::App* cmd_train = app.add_subcommand("train", "Train bilingual embeddings");
  cmd_train->add_option("--mono-e", train_args.mono_e, "monolingual corpus, language e")->required();
  cmd_train->add_option("--mono-f", train_args.mono_f, "monolingual corpus, language f")->required();
  cmd_train->add_option("--parallel-e", train_args.parallel_e, "parallel corpus, e side");
  cmd_train->add_option("--parallel-f", train_args.parallel_f, "parallel corpus, f side");
  cmd_train->add_option("--out-prefix", train_args.out_prefix, "output prefix for .e.vec/.f.vec")
      ->required();
  cmd_train->add_option("--dim", train_args.config.dim, "embedding dimensionality")
      ->capture_default_str();
  cmd_train->add_option("--window", train_args.config.window, "max skipgram window")
      ->capture_default_str();
  cmd_train->add_option("--negatives", train_args.config.negatives, "noise words per pair")
      ->capture_default_str();
  cmd_train->add_option("--eta0", train_args.config.eta0, "initial learning rate")
      ->capture_default_str();
  cmd_train->add_option("--lambda", train_args.config.lambda, "cross-lingual weight (0 disables)")
      ->capture_default_str();
  cmd_train->add_option("--clip", train_args.config.clip, "per-component update clip bound")
      ->capture_default_str();
  cmd_train->add_option("--subsample", train_args.config.mono_subsample_t,
                        "monolingual subsampling threshold (0 disables)")
      ->capture_default_str();
  cmd_train->add_option("--parallel-subsample", train_args.config.parallel_subsample_t,
                        "parallel subsampling threshold (0 disables)")
      ->capture_default_str();
  cmd_train->add_option("--epochs", train_args.config.epochs, "passes over monolingual data")
      ->capture_default_str();
  cmd_train->add_option("--workers", train_args.config.workers_per_language,
                        "skipgram workers per language")
      ->capture_default_str();
  cmd_train->add_option("--xling-workers", train_args.config.xling_workers, "cross-lingual workers")
      ->capture_default_str();
  cmd_train->add_option("--seed", train_args.config.seed, "random seed")->capture_default_str();
  cmd_train->add_option("--noise-alpha", train_args.config.noise_alpha, "noise distribution exponent")
      ->capture_default_str();
  cmd_train->add_option("--min-count", train_args.config.min_count, "vocabulary count threshold")
      ->capture_default_str();
  cmd_train->add_option("--max-vocab", train_args.config.max_vocab, "vocabulary size cap (0 = none)")
      ->capture_default_str();
  cmd_train->add_flag("--deterministic", train_args.config.deterministic,
                      "single-worker round-robin schedule, bit-reproducible");
  cmd_train->add_option("--xling-ratio", train_args.config.xling_steps_per_kword,
                        "cross-lingual steps per 1000 mono words (0 = default schedule)")
      ->capture_default_str();
  cmd_train->add_flag("--sequential-parallel", train_args.config.sequential_parallel,
                      "sweep the parallel corpus cyclically instead of sampling");
  cmd_train->add_option("--log", train_args.log_path, "progress log path (default: stderr)");
  cmd_train->add_option("--log-every", train_args.config.log_every_words,
                        "progress cadence in mono words")
      ->capture_default_str();
  cmd_train->add_option("--probe-pairs", train_args.config.probe_pairs,
                        "held-out pairs per probe loss")
      ->capture_default_str();
  cmd_train->add_flag("--save-output", train_args.save_output,
                      "also persist output (context) matrices as .out.vec");

  ExportArgs export_args;
  CLI::App* cmd_export = app.add_subcommand("export", "Re-export an embedding file (validate/subset)");
  cmd_export->add_option("--vec", export_args.vec, "input embedding file")->required();
  cmd_export->add_option("--out", export_args.out, "output embedding file")->required();
  CLI::Option* top_opt =
      cmd_export->add_option("--top", export_args.top, "keep only the first N rows")
          ->capture_default_str();
  cmd_export->add_option("--words", export_args.words_path, "keep only words listed in this file")
      ->excludes(top_opt);

  TranslateArgs translate_args;
  CLI::App* cmd_translate = app.add_subcommand("translate", "Word translation P@k evaluation");
  cmd_translate->add_option("--src-vec", translate_args.src_vec, "source embeddings")->required();
  cmd_translate->add_option("--tgt-vec", translate_args.tgt_vec, "target embeddings")->required();
  cmd_translate->add_option("--dict", translate_args.dict, "test dictionary (source<TAB>translation)")
      ->required();
  cmd_translate->add_option("--k", translate_args.k, "neighborhood size")->capture_default_str();
  cmd_translate->add_option("--baseline", translate_args.baseline,
                            "use a baseline ranker instead of cosine (edit-distance)");
  cmd_translate->add_option("--json", translate_args.json_path, "machine-readable summary path");

  ClassifyArgs classify_args;
  CLI::App* cmd_classify =
      app.add_subcommand("classify", "Cross-lingual document classification (direct transfer)");
  cmd_classify->add_option("--src-vec", classify_args.src_vec, "source embeddings")->required();
  cmd_classify->add_option("--tgt-vec", classify_args.tgt_vec, "target embeddings")->required();
  cmd_classify->add_option("--train-docs", classify_args.train_docs,
                           "labeled training docs, source language")
      ->required();
  cmd_classify->add_option("--test-docs", classify_args.test_docs,
                           "labeled test docs, target language")
      ->required();
  cmd_classify->add_option("--epochs", classify_args.epochs, "perceptron epochs")
      ->capture_default_str();
  cmd_classify->add_option("--seed", classify_args.seed, "shuffle seed")->capture_default_str();
  cmd_classify->add_option("--json", classify_args.json_path, "machine-readable summary path");

  ProbeArgs probe_args;
  CLI::App* cmd_probe = app.add_subcommand("probe", "Report held-out losses for saved embeddings");
  cmd_probe->add_option("--vec-e", probe_args.vec_e, "input embeddings, language e")->required();
  cmd_probe->add_option("--vec-f", probe_args.vec_f, "input embeddings, language f")->required();
  cmd_probe->add_option("--out-vec-e", probe_args.out_vec_e,
                        "context embeddings, language e (zeros if omitted)");
  cmd_probe->add_option("--out-vec-f", probe_args.out_vec_f,
                        "context embeddings, language f (zeros if omitted)");
  cmd_probe->add_option("--mono-e", probe_args.mono_e, "monolingual sample corpus e")->required();
  cmd_probe->add_option("--mono-f", probe_args.mono_f, "monolingual sample corpus f")->required();
  cmd_probe->add_option("--parallel-e", probe_args.parallel_e, "parallel sample corpus, e side");
  cmd_probe->add_option("--parallel-f", probe_args.parallel_f, "parallel sample corpus, f side");
  cmd_probe->add_option("--samples", probe_args.samples, "pairs per loss term")
      ->capture_default_str();
  cmd_probe->add_option("--window", probe_args.window, "window for pair drawing")
      ->capture_default_str();
  cmd_probe->add_option("--negatives", probe_args.negatives, "noise words per pair")
      ->capture_default_str();
  cmd_probe->add_option("--noise-alpha", probe_args.noise_alpha, "noise distribution exponent")
      ->capture_default_str();
  cmd_probe->add_option("--seed", probe_args.seed, "sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_vocab->parsed()) return run_vocab(vocab_args);
    if (cmd_train->parsed()) return run_train(train_args);
    if (cmd_export->parsed()) return run_export(export_args);
    if (cmd_translate->parsed()) return run_translate(translate_args);
    if (cmd_classify->parsed()) return run_classify(classify_args);
    if (cmd_probe->parsed()) return run_probe(probe_args);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
