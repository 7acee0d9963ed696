#pragma once

#include <stdexcept>
#include <string>

namespace bilbowa {

// Unreadable or malformed input data (corpora, embedding files, dictionaries).
class IngestError : public std::runtime_error {
 public:
  explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

// Structured-file parse failure; carries the 1-based line number when known.
class ParseError : public IngestError {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : IngestError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Non-finite parameters detected during training.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bilbowa
