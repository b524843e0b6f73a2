#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adafuse {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constructor argument violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An ensemble (hypothesis list or pruning mask) selects zero members.
class EmptyEnsemble : public Error {
 public:
  using Error::Error;
};

/// A pruning mask's length does not match the ensemble size L.
class MaskLengthMismatch : public Error {
 public:
  using Error::Error;
};

/// An operation that requires at least one input pair received none.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Hypothesis sets in one file disagree on the number of snapshots.
class RaggedEnsemble : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries the file path and 1-based line number
/// (line 0 when the failure is not tied to a specific line).
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& message)
      : Error(format(path, line, message)), path_(std::move(path)), line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& path, std::size_t line,
                            const std::string& message) {
    std::string out = path.empty() ? std::string("<input>") : path;
    if (line > 0) {
      out += ':';
      out += std::to_string(line);
    }
    out += ": ";
    out += message;
    return out;
  }

  std::string path_;
  std::size_t line_;
};

}  // namespace adafuse
