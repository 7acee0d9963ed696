#include "bilbowa/eval.hpp"

#include <fstream>
#include <istream>
#include <numeric>

#include "bilbowa/error.hpp"

namespace bilbowa {

WordIndex::WordIndex(std::vector<std::string> words) : words_(std::move(words)) {
  word_to_id_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    word_to_id_.emplace(words_[i], static_cast<WordId>(i));
  }
}

WordIndex WordIndex::from_vocabulary(const Vocabulary& vocab) {
  return WordIndex(std::vector<std::string>(vocab.words().begin(), vocab.words().end()));
}

std::optional<WordId> WordIndex::find(std::string_view word) const {
  auto it = word_to_id_.find(word);
  if (it == word_to_id_.end()) return std::nullopt;
  return it->second;
}

TranslationTestSet load_translation_pairs(std::istream& in) {
  TranslationTestSet test;
  std::unordered_map<std::string, std::size_t, StringViewHash, std::equal_to<>> by_source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw ParseError("expected 'source<TAB>translation'", line_no);
    }
    std::string source = line.substr(0, tab);
    std::string translation = line.substr(tab + 1);
    auto it = by_source.find(std::string_view(source));
    if (it == by_source.end()) {
      by_source.emplace(source, test.entries.size());
      test.entries.push_back({std::move(source), {std::move(translation)}});
    } else {
      auto& set = test.entries[it->second].translations;
      if (std::find(set.begin(), set.end(), translation) == set.end()) {
        set.push_back(std::move(translation));
      }
    }
  }
  return test;
}

TranslationTestSet load_translation_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open dictionary: " + path);
  return load_translation_pairs(in);
}

int edit_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);  // keep the rows short
  std::vector<int> prev(b.size() + 1);
  std::vector<int> curr(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    curr[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int subst = prev[j - 1] + (a[i - 1] != b[j - 1]);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, subst});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

double edit_distance_baseline(const TranslationTestSet& test, const WordIndex& target_index,
                              int k, PrecisionStats* stats) {
  if (test.entries.empty()) throw std::domain_error("edit_distance_baseline: empty test set");
  if (k < 1) throw std::invalid_argument("edit_distance_baseline: k must be >= 1");
  PrecisionStats local;
  std::vector<std::pair<int, WordId>> ranked(target_index.size());
  for (const auto& entry : test.entries) {
    ++local.evaluated;
    for (std::size_t i = 0; i < target_index.size(); ++i) {
      ranked[i] = {edit_distance(entry.source, target_index.word(static_cast<WordId>(i))),
                   static_cast<WordId>(i)};
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                      ranked.end());
    bool hit = false;
    for (std::size_t i = 0; i < take && !hit; ++i) {
      const std::string& word = target_index.word(ranked[i].second);
      hit = std::find(entry.translations.begin(), entry.translations.end(), word) !=
            entry.translations.end();
    }
    local.hits += hit ? 1 : 0;
  }
  if (stats != nullptr) *stats = local;
  return static_cast<double>(local.hits) / static_cast<double>(local.evaluated);
}

std::vector<LabeledDocument> load_labeled_documents(std::istream& in) {
  std::vector<LabeledDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError("expected 'label<TAB>token ...'", line_no);
    }
    LabeledDocument doc;
    doc.label = line.substr(0, tab);
    for (std::string_view token : split_tokens(std::string_view(line).substr(tab + 1))) {
      doc.tokens.emplace_back(token);
    }
    if (doc.tokens.empty()) throw ParseError("document has no tokens", line_no);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<LabeledDocument> load_labeled_documents_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open documents: " + path);
  return load_labeled_documents(in);
}

std::vector<double> idf_table(std::span<const LabeledDocument> docs, const WordIndex& index) {
  if (docs.empty()) throw std::domain_error("idf_table: no documents");
  std::vector<std::size_t> df(index.size(), 0);
  std::vector<bool> seen(index.size());
  for (const LabeledDocument& doc : docs) {
    std::fill(seen.begin(), seen.end(), false);
    for (const std::string& token : doc.tokens) {
      if (auto id = index.find(token)) seen[static_cast<std::size_t>(*id)] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) df[i] += seen[i] ? 1 : 0;
  }
  std::vector<double> idf(index.size());
  const double n = static_cast<double>(docs.size());
  for (std::size_t i = 0; i < idf.size(); ++i) {
    idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return idf;
}

int PerceptronModel::argmax(const MatrixX<double>& w, const VectorX<double>& b,
                            const RowVectorX<double>& x) {
  int best = 0;
  double best_score = w.row(0).dot(x) + b(0);
  for (Eigen::Index l = 1; l < w.rows(); ++l) {
    const double score = w.row(l).dot(x) + b(l);
    if (score > best_score) {
      best = static_cast<int>(l);
      best_score = score;
    }
  }
  return best;
}

PerceptronModel train_averaged_perceptron(const MatrixX<double>& examples,
                                          std::span<const int> labels,
                                          std::vector<std::string> label_names, int epochs,
                                          std::uint64_t seed) {
  if (examples.rows() == 0 || static_cast<std::size_t>(examples.rows()) != labels.size()) {
    throw std::invalid_argument("train_averaged_perceptron: examples/labels mismatch");
  }
  if (epochs < 1) throw std::invalid_argument("train_averaged_perceptron: epochs must be >= 1");
  std::vector<bool> present(label_names.size());
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= label_names.size()) {
      throw std::invalid_argument("train_averaged_perceptron: label id out of range");
    }
    present[static_cast<std::size_t>(y)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw std::invalid_argument("train_averaged_perceptron: need at least 2 distinct labels");
  }

  const Eigen::Index n_labels = static_cast<Eigen::Index>(label_names.size());
  PerceptronModel model;
  model.labels = std::move(label_names);
  model.weights = MatrixX<double>::Zero(n_labels, examples.cols());
  model.bias = VectorX<double>::Zero(n_labels);
  MatrixX<double> weight_sum = MatrixX<double>::Zero(n_labels, examples.cols());
  VectorX<double> bias_sum = VectorX<double>::Zero(n_labels);

  Rng rng(seed);
  std::vector<std::size_t> order(static_cast<std::size_t>(examples.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t steps = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const RowVectorX<double> x = examples.row(static_cast<Eigen::Index>(i));
      const int truth = labels[i];
      const int predicted = PerceptronModel::argmax(model.weights, model.bias, x);
      if (predicted != truth) {
        model.weights.row(truth) += x;
        model.bias(truth) += 1.0;
        model.weights.row(predicted) -= x;
        model.bias(predicted) -= 1.0;
      }
      weight_sum += model.weights;
      bias_sum += model.bias;
      ++steps;
    }
  }
  model.avg_weights = weight_sum / static_cast<double>(steps);
  model.avg_bias = bias_sum / static_cast<double>(steps);
  return model;
}

}  // namespace bilbowa
