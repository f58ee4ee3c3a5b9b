// dgp.hpp -- enumerable synthetic data-generating processes with explicit
// potential-outcome mean tables. Every estimand truth is a finite sum, so the
// module doubles as the exact oracle the estimators are validated against.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "extcomp/dataset.hpp"

namespace extcomp {

struct ScenarioSpec {
  std::string name;
  std::map<int, double> source_probs;  // s -> composite share

  std::vector<ColumnSpec> x_cols;  // discrete covariates
  std::vector<ColumnSpec> w_cols;  // external-only covariates (may be empty)

  // Covariate law per source over X cells.
  std::map<int, std::map<Cell, double>> x_law;
  // W law given X in the external source (s=0), when W is present.
  std::map<Cell, std::map<Cell, double>> w_law;

  std::map<int, std::set<int>> treatment_sets;
  // Treatment assignment law per source: cell -> (a -> prob). For s=0 with W
  // present, the cell is the concatenation x+w; otherwise x.
  std::map<int, std::map<Cell, std::map<int, double>>> treatment_law;

  // Potential-outcome means E[Y^{s,a}|X=x] indexed by the trial-participation
  // level s being intervened on: s_intervened -> ((x, a) -> mean).
  std::map<int, std::map<std::pair<Cell, int>, double>> po_mean_x;
  // Finer (x,w)-level table for the external source, when W affects outcomes;
  // keyed by the concatenated cell x+w. Must marginalize back to po_mean_x
  // under w_law (checked by validate()).
  std::map<int, std::map<std::pair<Cell, int>, double>> po_mean_xw;

  OutcomeKind outcome_kind = OutcomeKind::Binary;
  double noise_sigma = 1.0;          // continuous outcomes only
  std::set<int> covariates_only;     // sources sampled without (a, y)

  bool has_w() const { return !w_cols.empty(); }
  std::set<int> sources() const;
  void validate() const;

  nlohmann::json to_json() const;
  static ScenarioSpec from_json(const nlohmann::json& j);
};

ScenarioSpec load_scenario(const std::string& path);

// Booleans decided by exact table arithmetic (tolerance 1e-12).
struct ConditionFlags {
  bool engagement_absent = false;    // po_mean independent of s_intervened
  bool mean_transport = false;       // A4
  bool diff_transport = false;       // A9
  bool ratio_transport = false;      // A10
  bool no_interaction_diff = false;  // A11
  bool no_interaction_ratio = false; // A11'
  bool uniform_external = false;     // A6 / A6'
  bool external_exchangeable = false;// A7 given X alone
  bool positivity = false;           // A3, A5, A8

  nlohmann::json to_json() const;
};

ConditionFlags check_conditions(const ScenarioSpec& spec);

// Exact causal value for a named estimand (see estimators.hpp catalog).
// POM labels resolve to E[Y^{s=1,a}|S=s_target]; contrast labels to the
// corresponding difference. Throws InvalidSpec for unknown labels.
double true_estimand(const ScenarioSpec& spec, const std::string& label);

using TruthTable = std::map<std::string, double>;
// Truths for every catalog estimand whose data requirements the scenario
// meets (e.g. starred labels only when s=2 exists).
TruthTable truth_table(const ScenarioSpec& spec);

// Finite sample, drawn ancestrally (s, x[,w], a, y); deterministic in seed.
CompositeDataset sample(const ScenarioSpec& spec, std::size_t n,
                        std::uint64_t seed);

// Exact population as a weighted dataset: one row per (s, cell, a) with
// weight equal to its joint probability and y equal to the cell's observed
// outcome mean (potential outcomes evaluated at s_intervened = s).
CompositeDataset population_dataset(const ScenarioSpec& spec);

// Built-in scenarios: dgp-a, dgp-a6, dgp-b, dgp-c, dgp-d, dgp-w.
ScenarioSpec builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

}  // namespace extcomp
