#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace factorpred {

/// Failure categories raised by the library. Each maps to a stable,
/// machine-readable code string and to one of the CLI exit codes.
enum class ErrorCode {
  kInvalidInput,       // non-finite values, malformed domain objects
  kDimensionMismatch,  // shapes of arguments disagree
  kDegeneratePanel,    // fewer than two rows or no variation at all
  kRankDeficient,      // requested order exceeds numerical rank
  kSolverFailure,      // eigensolver did not converge
  kIllConditioned,     // least-squares design numerically singular
  kInvalidOrder,       // order outside the admissible range
  kSelectionFailed,    // no order in the sweep could be evaluated
  kParse,              // malformed input file contents
  kIo,                 // file missing or unwritable
  kConfig,             // invalid run configuration
};

std::string_view code_name(ErrorCode code);

/// Process exit code used by the CLI: 2 config, 3 I/O, 4 numerical.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace factorpred
