#pragma once

#include <stdexcept>
#include <string>

namespace wde {

enum class ErrorCode {
  InvalidShape,
  OutOfRange,
  UnsupportedLattice,
  DegenerateSplit,
  BipartiteViolation,
  NonInvertible,
  DecompositionFailure,
  InvalidCorrelation,
  InvalidIndex,
  InvalidLevels,
  EmptySample,
  HypothesisViolation,
  DegenerateConstant,
  DegenerateEstimate,
  Unsupported,
  InvalidArgument,
  Parse,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by arithmetic rather than by bad input.
  bool numerical() const noexcept {
    return code_ == ErrorCode::NonInvertible ||
           code_ == ErrorCode::DecompositionFailure ||
           code_ == ErrorCode::DegenerateEstimate ||
           code_ == ErrorCode::DegenerateConstant;
  }

 private:
  ErrorCode code_;
};

}  // namespace wde
