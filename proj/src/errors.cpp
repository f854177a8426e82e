#include "factorpred/errors.hpp"

namespace factorpred {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "E_INVALID_INPUT";
    case ErrorCode::kDimensionMismatch: return "E_DIMENSION";
    case ErrorCode::kDegeneratePanel: return "E_DEGENERATE";
    case ErrorCode::kRankDeficient: return "E_RANK";
    case ErrorCode::kSolverFailure: return "E_SOLVER";
    case ErrorCode::kIllConditioned: return "E_CONDITIONING";
    case ErrorCode::kInvalidOrder: return "E_ORDER";
    case ErrorCode::kSelectionFailed: return "E_SELECTION";
    case ErrorCode::kParse: return "E_PARSE";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kConfig: return "E_CONFIG";
  }
  return "E_UNKNOWN";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidOrder:
      return 2;
    case ErrorCode::kIo:
    case ErrorCode::kParse:
    case ErrorCode::kInvalidInput:
    case ErrorCode::kDimensionMismatch:
      return 3;
    case ErrorCode::kDegeneratePanel:
    case ErrorCode::kRankDeficient:
    case ErrorCode::kSolverFailure:
    case ErrorCode::kIllConditioned:
    case ErrorCode::kSelectionFailed:
      return 4;
  }
  return 4;
}

}  // namespace factorpred
