#ifndef TREELSTM_ERRORS_H_
#define TREELSTM_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treelstm {

// Operand shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed tree / embedding / pair input. `position` is a character
// offset for s-expressions and a 1-based line number for line formats.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// NaN/Inf in a loss or gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pearson/Spearman requested on a constant vector.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace treelstm

#endif  // TREELSTM_ERRORS_H_
