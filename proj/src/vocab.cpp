#include "bilbowa/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bilbowa/error.hpp"

namespace bilbowa {

std::vector<std::string_view> split_tokens(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

Vocabulary Vocabulary::from_counts(std::vector<std::pair<std::string, std::uint64_t>> counts,
                                   std::uint64_t min_count, std::size_t max_vocab) {
  std::erase_if(counts, [&](const auto& wc) { return wc.second < min_count; });
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (max_vocab > 0 && counts.size() > max_vocab) counts.resize(max_vocab);

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.words_.reserve(counts.size());
  vocab.counts_.reserve(counts.size());
  vocab.word_to_id_.reserve(counts.size());
  for (auto& [word, count] : counts) {
    WordId id = static_cast<WordId>(vocab.words_.size());
    vocab.word_to_id_.emplace(word, id);
    vocab.words_.push_back(std::move(word));
    vocab.counts_.push_back(count);
    vocab.total_tokens_ += count;
  }
  return vocab;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = word_to_id_.find(word);
  if (it == word_to_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<WordId> Vocabulary::to_ids(std::string_view line) const {
  std::vector<WordId> ids;
  for (std::string_view token : split_tokens(line)) {
    auto it = word_to_id_.find(token);
    if (it != word_to_id_.end()) ids.push_back(it->second);
  }
  return ids;
}

Vocabulary build_vocab(std::istream& sentences, std::uint64_t min_count, std::size_t max_vocab) {
  std::unordered_map<std::string, std::uint64_t, StringViewHash, std::equal_to<>> counter;
  std::string line;
  while (std::getline(sentences, line)) {
    for (std::string_view token : split_tokens(line)) {
      auto it = counter.find(token);
      if (it == counter.end()) {
        counter.emplace(std::string(token), 1);
      } else {
        ++it->second;
      }
    }
  }
  if (sentences.bad()) throw IngestError("vocabulary input stream failed mid-read");
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  counts.reserve(counter.size());
  for (auto& [word, count] : counter) counts.emplace_back(word, count);
  return Vocabulary::from_counts(std::move(counts), min_count, max_vocab);
}

Vocabulary build_vocab(std::span<const std::string> sentences, std::uint64_t min_count,
                       std::size_t max_vocab) {
  std::stringstream joined;
  for (const std::string& s : sentences) joined << s << '\n';
  return build_vocab(joined, min_count, max_vocab);
}

Vocabulary build_vocab_file(const std::string& path, std::uint64_t min_count,
                            std::size_t max_vocab) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus: " + path);
  return build_vocab(in, min_count, max_vocab);
}

void save_vocab(const Vocabulary& vocab, std::ostream& out) {
  out << "#total_tokens=" << vocab.total_tokens() << '\n';
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.words()[i] << '\t' << vocab.counts()[i] << '\n';
  }
  if (!out) throw IngestError("vocabulary write failed");
}

void save_vocab_file(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot open vocabulary output: " + path);
  save_vocab(vocab, out);
}

Vocabulary load_vocab(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("#total_tokens=")) {
    throw ParseError("expected '#total_tokens=N' header", 1);
  }
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  std::uint64_t min_count = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'word<TAB>count'", line_no);
    std::uint64_t count = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, count);
    if (ec != std::errc{} || ptr != last) throw ParseError("invalid count field", line_no);
    counts.emplace_back(line.substr(0, tab), count);
    min_count = min_count == 0 ? count : std::min(min_count, count);
  }
  return Vocabulary::from_counts(std::move(counts), std::max<std::uint64_t>(min_count, 1));
}

Vocabulary load_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open vocabulary: " + path);
  return load_vocab(in);
}

}  // namespace bilbowa
