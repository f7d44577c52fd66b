#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinorbit {

enum class ErrorKind {
  Evaluation,
  DegenerateGap,
  GrowthViolation,
  C2Violation,
  OutOfExtent,
  QuadratureFailure,
  IllConditionedGram,
  AllGramsIllConditioned,
  DuplicateAnchors,
  UnsupportedCoupling,
  EigensolverStall,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` discriminates the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Evaluation: return "EvaluationError";
    case ErrorKind::DegenerateGap: return "DegenerateGap";
    case ErrorKind::GrowthViolation: return "GrowthViolation";
    case ErrorKind::C2Violation: return "C2Violation";
    case ErrorKind::OutOfExtent: return "OutOfExtent";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::IllConditionedGram: return "IllConditionedGram";
    case ErrorKind::AllGramsIllConditioned: return "AllGramsIllConditioned";
    case ErrorKind::DuplicateAnchors: return "DuplicateAnchors";
    case ErrorKind::UnsupportedCoupling: return "UnsupportedCoupling";
    case ErrorKind::EigensolverStall: return "EigensolverStall";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

}  // namespace spinorbit
