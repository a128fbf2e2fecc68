#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collab {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonSymmetric,
  NotPositiveDefinite,
  SigmaNotPD,
  SigmaGNotZero,
  PreconditionViolated,
  DidNotConverge,
  NoPositiveEigenvalue,
  NumericalFailure,
  SingularSystem,
  TargetUnreachable,
  SdpFailure,
  RecoveryNotRank1,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SigmaNotPD: return "SigmaNotPD";
    case ErrorCode::SigmaGNotZero: return "SigmaGNotZero";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::NoPositiveEigenvalue: return "NoPositiveEigenvalue";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::SdpFailure: return "SdpFailure";
    case ErrorCode::RecoveryNotRank1: return "RecoveryNotRank1";
  }
  return "Unknown";
}

// Errors caused by bad input rather than by a solver giving up.
inline bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonSymmetric:
    case ErrorCode::SigmaNotPD:
    case ErrorCode::SigmaGNotZero:
    case ErrorCode::PreconditionViolated:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace collab
