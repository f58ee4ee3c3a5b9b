// dataset.hpp -- composite dataset formed by appending an index trial sample
// (s=1) with external samples (s=0, optionally s=2 for a third target
// population). Immutable after load; safe for concurrent reads.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extcomp/common.hpp"

namespace extcomp {

struct ColumnSpec {
  std::string name;
  bool categorical = true;
};

struct CovariateSchema {
  std::vector<ColumnSpec> x_cols;  // shared covariates, CSV prefix "x_"
  std::vector<ColumnSpec> w_cols;  // external-only covariates, prefix "w_"

  bool all_categorical() const {
    for (const auto& c : x_cols)
      if (!c.categorical) return false;
    return true;
  }
};

struct ObservationRecord {
  Cell x;
  Cell w;                      // empty when the row carries no W block
  int s = 1;
  int a = 0;
  double y = 0.0;
  bool has_treatment = true;   // false only for covariate-only target rows
  bool has_outcome = true;
  double weight = 1.0;         // exact-population datasets carry cell masses

  bool has_w() const { return !w.empty(); }
};

class CompositeDataset {
 public:
  CovariateSchema schema;
  std::vector<ObservationRecord> records;
  std::map<int, std::set<int>> treatment_sets;  // s -> declared A_{S=s}
  OutcomeKind outcome_kind = OutcomeKind::Binary;

  std::size_t n_source(int s) const;
  std::map<int, std::size_t> n_by_source() const;
  std::map<std::pair<int, int>, std::size_t> cell_counts() const;  // (s,a)
  std::set<int> sources() const;
  std::set<int> observed_treatments(int s) const;

  // Re-checks every invariant established by load_csv. Throws on violation.
  void validate() const;
};

struct CsvOptions {
  // Declared treatment sets; when absent they are inferred from the data.
  std::optional<std::map<int, std::set<int>>> treatment_sets;
  // Outcome kind; when absent, binary iff every y is 0 or 1.
  std::optional<OutcomeKind> outcome_kind;
  // Columns flagged continuous (by full CSV name, e.g. "x_age").
  std::set<std::string> continuous_columns;
};

CompositeDataset load_csv(const std::string& path, const CsvOptions& opts = {});
void write_csv(const CompositeDataset& data, const std::string& path);

// Binning for continuous covariates in common_support: per-column ascending
// cut points; a value maps to the count of cut points not exceeding it.
struct BinningRule {
  std::map<std::string, std::vector<double>> edges;
};

// X cell of a record with continuous columns mapped through the binning rule.
// Throws ContinuousWithoutBinning when a continuous column has no edges.
Cell binned_cell(const ObservationRecord& r, const CovariateSchema& schema,
                 const std::optional<BinningRule>& binning);

struct SupportReport {
  std::set<Cell> shared;
  std::set<Cell> unique_to_a;
  std::set<Cell> unique_to_b;
};

SupportReport common_support(const CompositeDataset& data, int source_a,
                             int source_b,
                             const std::optional<BinningRule>& binning = {});

}  // namespace extcomp
