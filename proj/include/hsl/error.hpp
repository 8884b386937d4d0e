#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hsl {

/// Error categories; values match the hsl_status codes of the C API.
enum class ErrorCode : int {
  Config = 1,
  Contract = 2,
  Sampling = 3,
  Domain = 4,
  Divergence = 5,
  Io = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Invalid user-facing configuration (bad budgets, unknown keys, ...).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

/// Caller broke a precondition (dimension mismatch, wrong kind).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(ErrorCode::Contract, what) {}
};

/// A randomized sampler exhausted its retry budget.
class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& what) : Error(ErrorCode::Sampling, what) {}
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};

/// Non-finite model state during training.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t round, const std::string& what)
      : Error(ErrorCode::Divergence, what), round_(round) {}
  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace hsl
