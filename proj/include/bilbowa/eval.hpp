#pragma once

#include <algorithm>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bilbowa/types.hpp"
#include "bilbowa/vocab.hpp"

namespace bilbowa {

// Word list + lookup for evaluation over loaded embedding files, where no
// frequency information exists.
class WordIndex {
 public:
  WordIndex() = default;
  explicit WordIndex(std::vector<std::string> words);
  static WordIndex from_vocabulary(const Vocabulary& vocab);

  std::optional<WordId> find(std::string_view word) const;
  const std::string& word(WordId id) const { return words_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return words_.size(); }
  std::span<const std::string> words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId, StringViewHash, std::equal_to<>> word_to_id_;
};

struct Neighbor {
  WordId id;
  double score;
};

// Top-k target rows by descending cosine similarity; ties broken by word id.
// Zero-norm target rows rank last (sentinel score -2, below any cosine).
// Similarities are accumulated in double precision regardless of Scalar.
template <class Scalar>
std::vector<Neighbor> nearest_neighbor_ids(const RowVectorX<Scalar>& query,
                                           const MatrixX<Scalar>& targets, int k) {
  if (k < 1) throw std::invalid_argument("nearest_neighbor_ids: k must be >= 1");
  if (targets.rows() == 0) throw std::invalid_argument("nearest_neighbor_ids: empty targets");
  if (query.size() != targets.cols()) {
    throw std::invalid_argument("nearest_neighbor_ids: dimensionality mismatch");
  }
  const RowVectorX<double> q = query.template cast<double>();
  const double query_norm = q.norm();
  if (query_norm == 0.0) throw std::domain_error("nearest_neighbor_ids: zero-norm query");

  std::vector<Neighbor> scored(static_cast<std::size_t>(targets.rows()));
  for (Eigen::Index r = 0; r < targets.rows(); ++r) {
    const RowVectorX<double> row = targets.row(r).template cast<double>();
    const double row_norm = row.norm();
    const double score = row_norm == 0.0 ? -2.0 : q.dot(row) / (query_norm * row_norm);
    scored[static_cast<std::size_t>(r)] = {static_cast<WordId>(r), score};
  }
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const Neighbor& a, const Neighbor& b) {
                      return a.score != b.score ? a.score > b.score : a.id < b.id;
                    });
  scored.resize(take);
  return scored;
}

template <class Scalar>
std::vector<std::pair<std::string, double>> nearest_neighbors(const RowVectorX<Scalar>& query,
                                                              const MatrixX<Scalar>& targets,
                                                              std::span<const std::string> words,
                                                              int k) {
  std::vector<std::pair<std::string, double>> out;
  for (const Neighbor& n : nearest_neighbor_ids(query, targets, k)) {
    out.emplace_back(words[static_cast<std::size_t>(n.id)], n.score);
  }
  return out;
}

// Lines `source<TAB>translation`; repeated sources accumulate an accepted
// translation set.
struct TranslationTestSet {
  struct Entry {
    std::string source;
    std::vector<std::string> translations;
  };
  std::vector<Entry> entries;
};

TranslationTestSet load_translation_pairs(std::istream& in);
TranslationTestSet load_translation_pairs_file(const std::string& path);

struct PrecisionStats {
  std::size_t evaluated = 0;
  std::size_t hits = 0;
  std::size_t oov_sources = 0;
  std::size_t zero_norm_sources = 0;
};

// Fraction of test entries whose accepted set intersects the top-k cosine
// neighbors. Sources missing from the vocabulary (or with zero-norm rows)
// count as misses and are tallied separately.
template <class Scalar>
double precision_at_k(const TranslationTestSet& test, const MatrixX<Scalar>& source_embeddings,
                      const WordIndex& source_index, const MatrixX<Scalar>& target_embeddings,
                      const WordIndex& target_index, int k, PrecisionStats* stats = nullptr) {
  if (test.entries.empty()) throw std::domain_error("precision_at_k: empty test set");
  PrecisionStats local;
  for (const auto& entry : test.entries) {
    ++local.evaluated;
    const auto src_id = source_index.find(entry.source);
    if (!src_id) {
      ++local.oov_sources;
      continue;
    }
    const RowVectorX<Scalar> query = source_embeddings.row(*src_id);
    if (query.template cast<double>().norm() == 0.0) {
      ++local.zero_norm_sources;
      continue;
    }
    for (const Neighbor& n : nearest_neighbor_ids(query, target_embeddings, k)) {
      const std::string& word = target_index.word(n.id);
      if (std::find(entry.translations.begin(), entry.translations.end(), word) !=
          entry.translations.end()) {
        ++local.hits;
        break;
      }
    }
  }
  if (stats != nullptr) *stats = local;
  return static_cast<double>(local.hits) / static_cast<double>(local.evaluated);
}

// Levenshtein distance over bytes, unit costs.
int edit_distance(std::string_view a, std::string_view b);

// P@k with candidates ranked by ascending edit distance (ties by word id).
double edit_distance_baseline(const TranslationTestSet& test, const WordIndex& target_index,
                              int k, PrecisionStats* stats = nullptr);

struct LabeledDocument {
  std::string label;
  std::vector<std::string> tokens;
};

// Lines `label<TAB>token token ...`.
std::vector<LabeledDocument> load_labeled_documents(std::istream& in);
std::vector<LabeledDocument> load_labeled_documents_file(const std::string& path);

// Smoothed idf over the index: ln((1 + N) / (1 + df)) + 1.
std::vector<double> idf_table(std::span<const LabeledDocument> docs, const WordIndex& index);

// tf-idf-weighted sum of embedding rows, L2-normalized. Out-of-vocabulary
// tokens are skipped; a document with no in-vocabulary tokens is an error.
template <class Scalar>
RowVectorX<Scalar> doc_vector(const LabeledDocument& doc, std::span<const double> idf,
                              const MatrixX<Scalar>& embeddings, const WordIndex& index) {
  std::unordered_map<WordId, int> tf;
  for (const std::string& token : doc.tokens) {
    if (auto id = index.find(token)) ++tf[*id];
  }
  if (tf.empty()) {
    std::string head;
    for (std::size_t i = 0; i < doc.tokens.size() && i < 3; ++i) {
      if (i) head += ' ';
      head += doc.tokens[i];
    }
    throw std::domain_error("document has no in-vocabulary tokens: '" + head + "...'");
  }
  RowVectorX<Scalar> vec = RowVectorX<Scalar>::Zero(embeddings.cols());
  for (const auto& [id, count] : tf) {
    vec += static_cast<Scalar>(count * idf[static_cast<std::size_t>(id)]) * embeddings.row(id);
  }
  const Scalar norm = vec.norm();
  if (norm > Scalar(0)) vec /= norm;
  return vec;
}

// Multiclass perceptron with running averaging over every training step;
// prediction uses the averaged weights, ties broken by label index.
struct PerceptronModel {
  std::vector<std::string> labels;
  MatrixX<double> weights;      // one row per label
  VectorX<double> bias;
  MatrixX<double> avg_weights;
  VectorX<double> avg_bias;

  int predict(const RowVectorX<double>& x) const { return argmax(avg_weights, avg_bias, x); }
  int predict_current(const RowVectorX<double>& x) const { return argmax(weights, bias, x); }

  static int argmax(const MatrixX<double>& w, const VectorX<double>& b,
                    const RowVectorX<double>& x);
};

PerceptronModel train_averaged_perceptron(const MatrixX<double>& examples,
                                          std::span<const int> labels,
                                          std::vector<std::string> label_names, int epochs,
                                          std::uint64_t seed);

struct TransferResult {
  double accuracy = 0.0;
  std::vector<std::pair<std::string, double>> per_label;  // label -> accuracy on test docs
  std::size_t test_docs = 0;
};

// Direct transfer: idf and classifier come from the source training docs;
// target docs are featurized with the target embeddings and the target
// pool's own (unlabeled) idf statistics, then classified as-is.
template <class Scalar>
TransferResult direct_transfer_eval(std::span<const LabeledDocument> train_docs,
                                    std::span<const LabeledDocument> test_docs,
                                    const MatrixX<Scalar>& source_embeddings,
                                    const WordIndex& source_index,
                                    const MatrixX<Scalar>& target_embeddings,
                                    const WordIndex& target_index, int epochs,
                                    std::uint64_t seed) {
  if (train_docs.empty() || test_docs.empty()) {
    throw std::domain_error("direct_transfer_eval: empty document set");
  }
  std::vector<std::string> label_names;
  for (const LabeledDocument& doc : train_docs) {
    if (std::find(label_names.begin(), label_names.end(), doc.label) == label_names.end()) {
      label_names.push_back(doc.label);
    }
  }
  std::sort(label_names.begin(), label_names.end());

  const std::vector<double> idf_src = idf_table(train_docs, source_index);
  MatrixX<double> x(static_cast<Eigen::Index>(train_docs.size()), source_embeddings.cols());
  std::vector<int> y(train_docs.size());
  for (std::size_t i = 0; i < train_docs.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        doc_vector(train_docs[i], idf_src, source_embeddings, source_index)
            .template cast<double>();
    y[i] = static_cast<int>(std::find(label_names.begin(), label_names.end(),
                                      train_docs[i].label) -
                            label_names.begin());
  }
  PerceptronModel model = train_averaged_perceptron(x, y, label_names, epochs, seed);

  const std::vector<double> idf_tgt = idf_table(test_docs, target_index);
  TransferResult result;
  result.test_docs = test_docs.size();
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> per_label;  // hit, total
  std::size_t hits = 0;
  for (const LabeledDocument& doc : test_docs) {
    const RowVectorX<double> vec =
        doc_vector(doc, idf_tgt, target_embeddings, target_index).template cast<double>();
    const int predicted = model.predict(vec);
    const bool correct = model.labels[static_cast<std::size_t>(predicted)] == doc.label;
    hits += correct ? 1 : 0;
    auto& bucket = per_label[doc.label];
    bucket.first += correct ? 1 : 0;
    ++bucket.second;
  }
  result.accuracy = static_cast<double>(hits) / static_cast<double>(test_docs.size());
  for (const auto& [label, bucket] : per_label) {
    result.per_label.emplace_back(
        label, static_cast<double>(bucket.first) / static_cast<double>(bucket.second));
  }
  std::sort(result.per_label.begin(), result.per_label.end());
  return result;
}

}  // namespace bilbowa
