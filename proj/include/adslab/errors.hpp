#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adslab {

// Every failure raised by the library carries one of these kinds. The CLI maps
// kinds onto process exit codes (see exit_code()).
enum class ErrorKind {
  kZeroMatrix,
  kNotNull,
  kNotOnManifold,
  kNotTangent,
  kUnnormalizedVelocity,
  kNotTimelikeRelated,
  kDegenerateSubspace,
  kDegenerateQuadruple,
  kNotMonotone,
  kNotHyperbolic,
  kNoConvergence,
  kNotDiscreteLike,
  kNotAcausal,
  kChartFailure,
  kDegenerateInput,
  kNotSpacelike,
  kNumericalDegeneracy,
  kDegenerateDistance,
  kNoLimit,
  kBoundaryMismatch,
  kNotConvex,
  kNotConformal,
  kBadCurvatureRange,
  kStencilOutOfDomain,
  kReductionFailure,
  kInvalidInput,
  kInternal,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroMatrix: return "ZeroMatrix";
    case ErrorKind::kNotNull: return "NotNull";
    case ErrorKind::kNotOnManifold: return "NotOnManifold";
    case ErrorKind::kNotTangent: return "NotTangent";
    case ErrorKind::kUnnormalizedVelocity: return "UnnormalizedVelocity";
    case ErrorKind::kNotTimelikeRelated: return "NotTimelikeRelated";
    case ErrorKind::kDegenerateSubspace: return "DegenerateSubspace";
    case ErrorKind::kDegenerateQuadruple: return "DegenerateQuadruple";
    case ErrorKind::kNotMonotone: return "NotMonotone";
    case ErrorKind::kNotHyperbolic: return "NotHyperbolic";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kNotDiscreteLike: return "NotDiscreteLike";
    case ErrorKind::kNotAcausal: return "NotAcausal";
    case ErrorKind::kChartFailure: return "ChartFailure";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kNotSpacelike: return "NotSpacelike";
    case ErrorKind::kNumericalDegeneracy: return "NumericalDegeneracy";
    case ErrorKind::kDegenerateDistance: return "DegenerateDistance";
    case ErrorKind::kNoLimit: return "NoLimit";
    case ErrorKind::kBoundaryMismatch: return "BoundaryMismatch";
    case ErrorKind::kNotConvex: return "NotConvex";
    case ErrorKind::kNotConformal: return "NotConformal";
    case ErrorKind::kBadCurvatureRange: return "BadCurvatureRange";
    case ErrorKind::kStencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorKind::kReductionFailure: return "ReductionFailure";
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kInternal: return "Internal";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// 0 pass, 2 input, 3 chart, 4 boundary, 5 convergence, 1 internal.
constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kBadCurvatureRange:
    case ErrorKind::kNotMonotone:
    case ErrorKind::kNotAcausal:
    case ErrorKind::kDegenerateInput:
      return 2;
    case ErrorKind::kChartFailure:
      return 3;
    case ErrorKind::kBoundaryMismatch:
    case ErrorKind::kNoLimit:
      return 4;
    case ErrorKind::kNoConvergence:
    case ErrorKind::kReductionFailure:
      return 5;
    default:
      return 1;
  }
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace adslab
