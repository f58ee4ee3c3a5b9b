// nuisance.hpp -- conditional outcome means E[Y|X(,W),S,A] and propensities
// Pr[S=s|X], Pr[A=a|X,S] that every identifying functional plugs into.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "extcomp/dataset.hpp"

namespace extcomp {

enum class Family { Auto, Saturated, Linear, Logistic };

const char* to_string(Family f);

// Which covariate block a model conditions on.
enum class CondSet { X, XW };

// Row subset selector: source membership and/or a single treatment level.
struct RowFilter {
  std::optional<std::set<int>> sources;
  std::optional<int> treatment;

  bool matches(const ObservationRecord& r) const {
    if (sources && !sources->count(r.s)) return false;
    if (treatment && (!r.has_treatment || r.a != *treatment)) return false;
    return true;
  }
  std::string key() const;
};

struct FittedModel {
  Family family = Family::Saturated;
  CondSet cond = CondSet::X;
  bool logistic = false;

  // Saturated family: exact within-cell weighted means.
  std::map<Cell, double> cells;

  // Parametric families: intercept followed by one slope per conditioning
  // column (main effects only).
  std::vector<double> coef;

  int iterations = 0;
  bool converged = true;

  double predict(const ObservationRecord& r) const;
  double predict_cell(const Cell& key) const;  // saturated only

  nlohmann::json to_json() const;

 private:
  Cell conditioning_cell(const ObservationRecord& r) const;
};

struct PropensityTarget {
  enum class Kind { Participation, Treatment } kind = Kind::Participation;
  int level = 1;  // s level or a level
  // For Kind::Treatment: the source rows the model is fitted on. Usually a
  // single source; the pooled-control weighting form conditions on s in {0,1}.
  std::set<int> given_sources;
  CondSet cond = CondSet::X;
};

struct FitOptions {
  // IRLS stopping rule: max |coefficient change| below tol, hard cap on
  // iterations, divergence guard for separated designs.
  double irls_tol = 1e-8;
  int irls_max_iter = 100;
  double separation_bound = 30.0;
  // Saturated is chosen automatically only when every subset cell holds at
  // least this many rows.
  int min_cell_rows = 5;
};

FittedModel fit_outcome(const CompositeDataset& data, CondSet cond,
                        const RowFilter& filter, Family family,
                        const FitOptions& opts = {});

FittedModel fit_propensity(const CompositeDataset& data,
                           const PropensityTarget& target, Family family,
                           const FitOptions& opts = {});

// Fit a model to explicit (covariates, value, weight) rows; used for the
// stage-two regression of predicted values in the nested-W functional.
struct ValueRow {
  Cell covariates;
  double value = 0.0;
  double weight = 1.0;
};
FittedModel fit_values(const std::vector<ValueRow>& rows, Family family,
                       bool binary_values, const FitOptions& opts = {});

// Family resolution for Family::Auto per the configured default rule:
// saturated when all conditioning covariates are categorical and every
// occupied subset cell has >= min_cell_rows rows; otherwise logistic for
// binary outcomes, linear for continuous ones.
Family resolve_family(const CompositeDataset& data, CondSet cond,
                      const RowFilter& filter, bool binary_outcome,
                      const FitOptions& opts = {});

}  // namespace extcomp
