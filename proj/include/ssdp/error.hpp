#pragma once

#include <stdexcept>
#include <string>

namespace ssdp {

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a record invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration value (out of range, unknown key, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a loss term or gradient goes non-finite during training.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, long step, std::string term)
      : std::runtime_error(what), step_(step), term_(std::move(term)) {}
  long step() const noexcept { return step_; }
  const std::string& term() const noexcept { return term_; }

 private:
  long step_;
  std::string term_;
};

}  // namespace ssdp
