#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdeop {

// Error taxonomy used across the library.  The CLI maps these onto exit codes:
//   std::invalid_argument, ConfigError, FormatError -> 1 (bad input / bad config)
//   IoError                                         -> 2 (file system)
//   NumericError                                    -> 3 (divergence / overflow)

// A file could not be opened, created, or fully read/written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A file opened fine but its content does not match the expected format.
// `row` is the 1-based line number of the offending record (0 when the
// problem is not attributable to a single line, e.g. a bad header field).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row ? what + " (line " + std::to_string(row) + ")" : what),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Configuration that parsed but fails semantic validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A computation left the finite range: solver overflow, diverged training, ...
// `step` and `path` locate the failure when known (-1 otherwise).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, long step = -1, long path = -1)
      : std::runtime_error(what), step_(step), path_(path) {}
  long step() const { return step_; }
  long path() const { return path_; }

 private:
  long step_;
  long path_;
};

}  // namespace sdeop
