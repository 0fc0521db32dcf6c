#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iclap {

/// Violated precondition on an argument (wrong length, out-of-range value...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed touch/codebook/model text. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& detail, const std::string& source = {})
      : std::runtime_error((source.empty() ? "" : source + ": ") + "line " + std::to_string(line) + ": " + detail),
        line_(line),
        detail_(detail) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Frame whose total mass is zero, for which normalized moments are undefined.
class DegenerateFrameError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Clustering cannot produce the requested number of distinct centroids.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A reference model could not be built (no usable samples).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iclap
