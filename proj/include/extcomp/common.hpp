// common.hpp -- error types and small shared utilities.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace extcomp {

enum class ErrorKind {
  // dataset
  MissingColumn,
  NonNumericCell,
  TreatmentOutsideDeclaredSet,
  EmptySource,
  ContinuousWithoutBinning,
  // nuisance
  EmptySubset,
  IrlsNonConvergence,
  SeparationDetected,
  UnseenCategoryLevel,
  // estimators
  EmptyCell,
  ExternalNotUniform,
  MissingAnchorArm,
  DenominatorNearZero,
  MissingW,
  PositivityFloorTriggered,
  // diagnostics
  NoCommonSupport,
  MissingControlArm,
  // inference
  TooManyReplicateFailures,
  // generic
  InvalidSpec,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Discrete covariate cell. Categorical codes are stored as doubles, so exact
// comparison is well defined; std::vector's lexicographic order keys maps.
using Cell = std::vector<double>;

std::string cell_to_string(const Cell& cell);

enum class OutcomeKind { Binary, Continuous };

}  // namespace extcomp
