#pragma once

#include <stdexcept>
#include <string>

namespace bbsoc {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidOrder,
  kDegenerateDomain,
  kExtrapolation,
  kDimensionMismatch,
  kNotFound,
  kDegenerateStencil,
  kInvalidWeight,
  kNonDifferentiable,
  kParse,
  kIo,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; `code()` distinguishes failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bbsoc
