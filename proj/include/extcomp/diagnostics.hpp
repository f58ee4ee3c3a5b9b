// diagnostics.hpp -- the testable restriction on shared control arms and
// positivity audits over covariate cells.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "extcomp/dataset.hpp"

namespace extcomp {

struct FalsifyOptions {
  int control_treatment = 0;
  // Violated when any |standardized difference| exceeds std_threshold, or when
  // an absolute difference exceeds abs_margin with both cells adequately
  // sized. Two routes so degenerate-variance cells still register.
  double std_threshold = 4.0;
  double abs_margin = 0.05;
  std::size_t margin_min_rows = 30;
  std::optional<BinningRule> binning;
};

struct FalsificationCell {
  Cell x;
  double mean_trial = 0.0;
  double mean_external = 0.0;
  double difference = 0.0;
  double se_difference = 0.0;  // 0 when either side is degenerate
  double std_difference = 0.0;
  std::size_t n_trial = 0;
  std::size_t n_external = 0;
};

struct FalsificationReport {
  std::vector<FalsificationCell> cells;  // common support only
  double max_abs_std_difference = 0.0;
  double max_abs_difference = 0.0;
  bool violated = false;
  FalsifyOptions options;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Compares control-arm conditional outcome means between the trial and the
// external source on their common covariate support.
FalsificationReport falsification_test(const CompositeDataset& data,
                                       const FalsifyOptions& opts = {});

struct PositivityOptions {
  double floor = 0.01;
  std::size_t min_count = 5;
  std::optional<BinningRule> binning;
};

struct PositivityViolation {
  std::string condition;  // "A3", "A5", "A8", "A8'"
  Cell cell;
  int treatment = -1;  // -1 for source-membership conditions
  double probability = 0.0;
  std::size_t count = 0;
};

struct PositivityReport {
  std::vector<PositivityViolation> violations;
  std::vector<std::string> conditions_checked;
  PositivityOptions options;

  bool clean() const { return violations.empty(); }
  nlohmann::json to_json() const;
  std::string to_text() const;
};

// conditions: subset of {"A3", "A5", "A8", "A8'"}. A3 audits treatment
// assignment within the trial, A5 external membership over trial cells, A8
// external treatment assignment over trial cells, A8' the same given (X, W).
PositivityReport positivity_audit(const CompositeDataset& data,
                                  const std::vector<std::string>& conditions,
                                  const PositivityOptions& opts = {});

}  // namespace extcomp
