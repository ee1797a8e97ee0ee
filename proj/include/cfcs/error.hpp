#pragma once

#include <stdexcept>
#include <string>

namespace cfcs {

// Process exit codes used by the command line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
  virtual const char* tag() const noexcept = 0;
};

// Violated precondition: dimension mismatch, invalid parameter, bad flag.
class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
  const char* tag() const noexcept override { return "usage"; }
};

// Malformed input file or config.
class ParseError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kData; }
  const char* tag() const noexcept override { return "parse"; }
};

// A constraint whose subgradient vanishes where a step is required,
// e.g. an all-zero measurement row.
class DegenerateConstraintError : public Error {
 public:
  DegenerateConstraintError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kNumerical; }
  const char* tag() const noexcept override { return "degenerate"; }

 private:
  std::size_t index_;
};

// Non-finite iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kNumerical; }
  const char* tag() const noexcept override { return "divergence"; }

 private:
  std::size_t iteration_;
};

}  // namespace cfcs
