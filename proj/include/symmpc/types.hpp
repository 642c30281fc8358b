#ifndef SYMMPC_TYPES_HPP_
#define SYMMPC_TYPES_HPP_

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace symmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Failure categories. The CLI maps each onto an exit code through
/// error_category().
enum class ErrorCode {
  // input / parsing
  ParseError,
  DimensionMismatch,
  // validation
  NonPositiveOffset,
  EmptyPolytope,
  SingularMap,
  NotStabilizable,
  NotDetectable,
  BadWeights,
  DegenerateConstraintSet,
  NotASymmetry,
  GroupTooLarge,
  BadHorizon,
  NotPlanar,
  TooLarge,
  // numerical
  LpFailure,
  NumericalFailure,
  NoConvergence,
  NoFiniteDetermination,
  CondenseFailure,
  NoMatch,
  IndexOverflow,
  SingularKkt,
};

enum class ErrorCategory { Parse, Validation, Numerical };

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveOffset: return "NonPositiveOffset";
    case ErrorCode::EmptyPolytope: return "EmptyPolytope";
    case ErrorCode::SingularMap: return "SingularMap";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NotDetectable: return "NotDetectable";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::DegenerateConstraintSet: return "DegenerateConstraintSet";
    case ErrorCode::NotASymmetry: return "NotASymmetry";
    case ErrorCode::GroupTooLarge: return "GroupTooLarge";
    case ErrorCode::BadHorizon: return "BadHorizon";
    case ErrorCode::NotPlanar: return "NotPlanar";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::LpFailure: return "LpFailure";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoFiniteDetermination: return "NoFiniteDetermination";
    case ErrorCode::CondenseFailure: return "CondenseFailure";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::IndexOverflow: return "IndexOverflow";
    case ErrorCode::SingularKkt: return "SingularKkt";
  }
  return "Unknown";
}

inline ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::DimensionMismatch:
      return ErrorCategory::Parse;
    case ErrorCode::LpFailure:
    case ErrorCode::NumericalFailure:
    case ErrorCode::NoConvergence:
    case ErrorCode::NoFiniteDetermination:
    case ErrorCode::CondenseFailure:
    case ErrorCode::NoMatch:
    case ErrorCode::IndexOverflow:
    case ErrorCode::SingularKkt:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Validation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Numerical thresholds shared by all modules. Overridable per run.
struct Tolerances {
  double row = 1e-9;          // row matching for polytope equality and constraint permutations
  double dim = 1e-9;          // Chebyshev radius below which a polytope is lower-dimensional
  double degenerate = 1e-8;   // t* at or below this counts as t* = 0
  double feasibility = 1e-8;  // simplex feasibility tolerance
  double rank = 1e-9;         // relative singular value cutoff for row rank
  double symmetry = 1e-9;     // residuals of the symmetry conditions
};

/// Scale-aware comparison used for matrix identities: absolute below 1, relative above.
inline double scaled_tolerance(double tol, double magnitude) {
  return tol * (magnitude > 1.0 ? magnitude : 1.0);
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace symmpc

#endif  // SYMMPC_TYPES_HPP_
