#include "bbsoc/error.hpp"

namespace bbsoc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidOrder: return "invalid-order";
    case ErrorCode::kDegenerateDomain: return "degenerate-domain";
    case ErrorCode::kExtrapolation: return "extrapolation";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kDegenerateStencil: return "degenerate-stencil";
    case ErrorCode::kInvalidWeight: return "invalid-weight";
    case ErrorCode::kNonDifferentiable: return "non-differentiable";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace bbsoc
