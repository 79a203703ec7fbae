#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cobexplain {

// Base class for all recoverable toolchain errors.  The CLI maps these to
// exit code 1; UsageError maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Bad command lines, bad config files, invalid flag combinations.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  enum class Code {
    NoProcedureDivision,
    DuplicateParagraph,
    MultipleProgramIds,
    BadProgramId,
  };

  ParseError(Code code, std::string message) : Error(std::move(message)), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class AmbiguousProgramIdError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class TokenLimitExceededError : public Error {
 public:
  TokenLimitExceededError(std::int64_t estimate, std::int64_t limit, std::string unit = {})
      : Error(build_message(estimate, limit, unit)),
        estimate_(estimate),
        limit_(limit),
        unit_(std::move(unit)) {}

  std::int64_t estimate() const { return estimate_; }
  std::int64_t limit() const { return limit_; }
  const std::string& unit() const { return unit_; }

 private:
  static std::string build_message(std::int64_t estimate, std::int64_t limit,
                                   const std::string& unit) {
    std::string msg = "token estimate " + std::to_string(estimate) + " exceeds limit " +
                      std::to_string(limit);
    if (!unit.empty()) msg = unit + ": " + msg;
    return msg;
  }

  std::int64_t estimate_;
  std::int64_t limit_;
  std::string unit_;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class JudgeParseError : public Error {
 public:
  JudgeParseError(std::string message, std::string raw)
      : Error(std::move(message)), raw_(std::move(raw)) {}

  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class PipelineOrderError : public Error {
 public:
  using Error::Error;
};

class UnmergeableUnitError : public Error {
 public:
  using Error::Error;
};

class EmptyReferenceError : public Error {
 public:
  using Error::Error;
};

class EmptySampleError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class ScaleError : public Error {
 public:
  using Error::Error;
};

}  // namespace cobexplain
