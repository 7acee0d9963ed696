#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bilbowa/config.hpp"
#include "bilbowa/error.hpp"
#include "bilbowa/types.hpp"
#include "bilbowa/vocab.hpp"

namespace bilbowa {

enum class InitScheme { kGaussian, kZeros };

// Gaussian scheme fills row-major order with i.i.d. N(0,1) draws from the
// seeded generator; result is a pure function of (V, K, seed, scheme).
template <class Scalar>
MatrixX<Scalar> init_embeddings(Eigen::Index rows, Eigen::Index dim, std::uint64_t seed,
                                InitScheme scheme) {
  if (rows < 1 || dim < 1) {
    throw std::invalid_argument("init_embeddings: rows and dim must be >= 1");
  }
  MatrixX<Scalar> m(rows, dim);
  if (scheme == InitScheme::kZeros) {
    m.setZero();
    return m;
  }
  Rng rng(seed);
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = gauss(rng);
  }
  return m;
}

namespace detail {

// Shortest decimal form that round-trips exactly.
template <class Scalar>
void append_number(std::string& out, Scalar value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

template <class Scalar>
Scalar parse_number(std::string_view text, std::size_t line_no) {
  Scalar value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("invalid number '" + std::string(text) + "'", line_no);
  }
  return value;
}

}  // namespace detail

// word2vec-style text format: header `V K`, then `word v_1 ... v_K` per row
// in id order. Values are written with full round-trip precision.
template <class Scalar>
void save_text(const MatrixX<Scalar>& matrix, std::span<const std::string> words,
               std::ostream& out) {
  if (static_cast<std::size_t>(matrix.rows()) != words.size()) {
    throw std::invalid_argument("save_text: matrix rows do not match vocabulary size");
  }
  std::string line;
  line.reserve(64 + static_cast<std::size_t>(matrix.cols()) * 16);
  line += std::to_string(matrix.rows());
  line += ' ';
  line += std::to_string(matrix.cols());
  line += '\n';
  out << line;
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    line.clear();
    line += words[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      line += ' ';
      detail::append_number(line, matrix(r, c));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IngestError("embedding write failed");
}

template <class Scalar>
void save_text(const MatrixX<Scalar>& matrix, const Vocabulary& vocab, std::ostream& out) {
  save_text(matrix, vocab.words(), out);
}

template <class Scalar>
void save_text_file(const MatrixX<Scalar>& matrix, std::span<const std::string> words,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open embedding output: " + path);
  save_text(matrix, words, out);
}

template <class Scalar>
struct LoadedEmbeddings {
  std::vector<std::string> words;
  MatrixX<Scalar> matrix;
};

template <class Scalar>
LoadedEmbeddings<Scalar> load_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing 'V K' header", 1);
  auto header = split_tokens(line);
  if (header.size() != 2) throw ParseError("expected 'V K' header", 1);
  std::int64_t rows = detail::parse_number<std::int64_t>(header[0], 1);
  std::int64_t dim = detail::parse_number<std::int64_t>(header[1], 1);
  if (rows < 0 || dim < 1) throw ParseError("invalid header dimensions", 1);

  LoadedEmbeddings<Scalar> loaded;
  loaded.words.reserve(static_cast<std::size_t>(rows));
  loaded.matrix.resize(rows, dim);
  std::size_t line_no = 1;
  std::int64_t r = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_tokens(line);
    if (fields.empty()) continue;
    if (r >= rows) throw ParseError("expected " + std::to_string(rows) + " rows", line_no);
    if (fields.size() != static_cast<std::size_t>(dim) + 1) {
      throw ParseError("expected " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size() - 1),
                       line_no);
    }
    loaded.words.emplace_back(fields[0]);
    for (std::int64_t c = 0; c < dim; ++c) {
      loaded.matrix(r, c) =
          detail::parse_number<Scalar>(fields[static_cast<std::size_t>(c) + 1], line_no);
    }
    ++r;
  }
  if (r != rows) {
    throw ParseError("expected " + std::to_string(rows) + " rows, got " + std::to_string(r),
                     line_no + 1);
  }
  return loaded;
}

template <class Scalar>
LoadedEmbeddings<Scalar> load_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open embedding file: " + path);
  return load_text<Scalar>(in);
}

// The learned parameters for a language pair: input embeddings R (the
// cross-lingually regularized representations) and output/context embeddings
// U (used only by negative sampling).
template <class Scalar>
struct EmbeddingModel {
  std::string lang_e;
  std::string lang_f;
  MatrixX<Scalar> input_e;
  MatrixX<Scalar> input_f;
  MatrixX<Scalar> output_e;
  MatrixX<Scalar> output_f;
  TrainConfig config;

  Eigen::Index dim() const { return input_e.cols(); }
};

}  // namespace bilbowa
