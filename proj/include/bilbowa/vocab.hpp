#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bilbowa/types.hpp"

namespace bilbowa {

// Splits a line on runs of spaces/tabs; trailing '\r' is stripped.
std::vector<std::string_view> split_tokens(std::string_view line);

struct StringViewHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
};

// Immutable word <-> id mapping with frequency counts. Ids are assigned in
// descending count order, ties broken lexicographically, so id 0 is always
// the most frequent word. Safe to share across threads once built.
class Vocabulary {
 public:
  Vocabulary() = default;

  // `counts` need not be sorted or filtered; words below min_count are
  // dropped, and if max_vocab > 0 only the top max_vocab words survive.
  static Vocabulary from_counts(std::vector<std::pair<std::string, std::uint64_t>> counts,
                                std::uint64_t min_count, std::size_t max_vocab = 0);

  std::optional<WordId> find(std::string_view word) const;
  const std::string& word(WordId id) const { return words_[static_cast<std::size_t>(id)]; }
  std::uint64_t count(WordId id) const { return counts_[static_cast<std::size_t>(id)]; }
  double frequency(WordId id) const {
    return static_cast<double>(count(id)) / static_cast<double>(total_tokens_);
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::uint64_t min_count() const { return min_count_; }
  std::span<const std::string> words() const { return words_; }
  std::span<const std::uint64_t> counts() const { return counts_; }

  // Maps a tokenized line to ids, dropping out-of-vocabulary tokens.
  std::vector<WordId> to_ids(std::string_view line) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId, StringViewHash, std::equal_to<>> word_to_id_;
  std::uint64_t total_tokens_ = 0;
  std::uint64_t min_count_ = 1;
};

// One sentence per line, tokens separated by spaces.
Vocabulary build_vocab(std::istream& sentences, std::uint64_t min_count, std::size_t max_vocab = 0);
Vocabulary build_vocab(std::span<const std::string> sentences, std::uint64_t min_count,
                       std::size_t max_vocab = 0);
Vocabulary build_vocab_file(const std::string& path, std::uint64_t min_count,
                            std::size_t max_vocab = 0);

// Vocabulary file: one-line header `#total_tokens=N`, then `word<TAB>count`
// per line in descending count order.
void save_vocab(const Vocabulary& vocab, std::ostream& out);
void save_vocab_file(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(std::istream& in);
Vocabulary load_vocab_file(const std::string& path);

}  // namespace bilbowa
