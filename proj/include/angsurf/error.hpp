#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace angsurf {

// Error categories. The CLI maps each category to a distinct exit status.
enum class ErrorCode {
  domain,
  numeric,
  feasibility,
  empty_sample,
  invalid_config,
  optimization,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ErrorCode::domain, m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorCode::numeric, m) {}
};

struct FeasibilityError : Error {
  FeasibilityError(const std::string& m, std::size_t index)
      : Error(ErrorCode::feasibility, m), index_(index) {}
  // Index of the first record whose beta shape is nonpositive.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

struct EmptySampleError : Error {
  explicit EmptySampleError(const std::string& m) : Error(ErrorCode::empty_sample, m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCode::invalid_config, m) {}
};

struct OptimizationError : Error {
  explicit OptimizationError(const std::string& m) : Error(ErrorCode::optimization, m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCode::io, m) {}
};

}  // namespace angsurf
