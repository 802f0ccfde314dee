#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace transop {

enum class ErrorKind {
  DefectiveMatrix,
  ComplexSpectrum,
  IllConditionedEigvecs,
  Overflow,
  EvalDomain,
  DimMismatch,
  ZeroEigenvalue,
  QuadratureFailure,
  SpectrumViolation,
  NonCommuting,
  SeriesDiverging,
  SharedBasisRequired,
  SingularMatrix,
  SingularSystem,
  TruncationTooSmall,
  GridMismatch,
  InvalidArgument,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorKind::ComplexSpectrum: return "ComplexSpectrum";
    case ErrorKind::IllConditionedEigvecs: return "IllConditionedEigvecs";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::EvalDomain: return "EvalDomain";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::SpectrumViolation: return "SpectrumViolation";
    case ErrorKind::NonCommuting: return "NonCommuting";
    case ErrorKind::SeriesDiverging: return "SeriesDiverging";
    case ErrorKind::SharedBasisRequired: return "SharedBasisRequired";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Input problems (bad config, bad arguments) versus numerical failures.
  bool is_validation() const noexcept {
    return kind_ == ErrorKind::ParseError || kind_ == ErrorKind::ValidationError;
  }

 private:
  ErrorKind kind_;
};

}  // namespace transop
