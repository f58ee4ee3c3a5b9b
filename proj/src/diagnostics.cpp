#include "extcomp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace extcomp {

namespace {

struct CellStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double y) {
    sum += y;
    sum_sq += y * y;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double variance() const {
    // Unbiased sample variance; 0 when a cell has a single row.
    if (n < 2) return 0.0;
    double m = mean();
    return (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  }
};

}  // namespace

FalsificationReport falsification_test(const CompositeDataset& data,
                                       const FalsifyOptions& opts) {
  bool trial_has_control = false, external_has_control = false;
  for (const auto& r : data.records) {
    if (!r.has_treatment || r.a != opts.control_treatment) continue;
    if (r.s == 1) trial_has_control = true;
    if (r.s == 0) external_has_control = true;
  }
  if (!trial_has_control || !external_has_control)
    throw Error(ErrorKind::MissingControlArm,
                "control arm a=" + std::to_string(opts.control_treatment) +
                    " must be present in both the trial and the external source");

  std::map<Cell, CellStats> trial, external;
  for (const auto& r : data.records) {
    if (!r.has_treatment || !r.has_outcome || r.a != opts.control_treatment)
      continue;
    Cell key = binned_cell(r, data.schema, opts.binning);
    if (r.s == 1) trial[key].add(r.y);
    if (r.s == 0) external[key].add(r.y);
  }

  FalsificationReport report;
  report.options = opts;
  for (const auto& [cell, t] : trial) {
    auto it = external.find(cell);
    if (it == external.end()) continue;
    const CellStats& e = it->second;
    FalsificationCell row;
    row.x = cell;
    row.mean_trial = t.mean();
    row.mean_external = e.mean();
    row.difference = row.mean_trial - row.mean_external;
    row.se_difference = std::sqrt(t.variance() / static_cast<double>(t.n) +
                                  e.variance() / static_cast<double>(e.n));
    row.std_difference =
        row.se_difference > 0 ? row.difference / row.se_difference : 0.0;
    row.n_trial = t.n;
    row.n_external = e.n;
    report.cells.push_back(row);
  }
  if (report.cells.empty())
    throw Error(ErrorKind::NoCommonSupport,
                "no covariate cell holds control rows in both sources");

  for (const auto& row : report.cells) {
    report.max_abs_std_difference =
        std::max(report.max_abs_std_difference, std::abs(row.std_difference));
    report.max_abs_difference =
        std::max(report.max_abs_difference, std::abs(row.difference));
    if (std::abs(row.std_difference) > opts.std_threshold) report.violated = true;
    if (std::abs(row.difference) > opts.abs_margin &&
        row.n_trial >= opts.margin_min_rows &&
        row.n_external >= opts.margin_min_rows)
      report.violated = true;
  }
  return report;
}

nlohmann::json FalsificationReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : cells) {
    rows.push_back({{"x", cell_to_string(c.x)},
                    {"mean_trial", c.mean_trial},
                    {"mean_external", c.mean_external},
                    {"difference", c.difference},
                    {"se_difference", c.se_difference},
                    {"std_difference", c.std_difference},
                    {"n_trial", c.n_trial},
                    {"n_external", c.n_external}});
  }
  return {{"cells", rows},
          {"max_abs_std_difference", max_abs_std_difference},
          {"max_abs_difference", max_abs_difference},
          {"verdict", violated ? "violated" : "consistent"},
          {"std_threshold", options.std_threshold},
          {"abs_margin", options.abs_margin},
          {"margin_min_rows", options.margin_min_rows},
          {"control_treatment", options.control_treatment}};
}

std::string FalsificationReport::to_text() const {
  std::ostringstream out;
  out << "shared-control restriction check (a=" << options.control_treatment
      << ")\n";
  out << std::left << std::setw(16) << "x" << std::right << std::setw(12)
      << "mean s=1" << std::setw(12) << "mean s=0" << std::setw(12) << "diff"
      << std::setw(12) << "se" << std::setw(10) << "std" << std::setw(9)
      << "n s=1" << std::setw(9) << "n s=0" << "\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& c : cells) {
    out << std::left << std::setw(16) << cell_to_string(c.x) << std::right
        << std::setw(12) << c.mean_trial << std::setw(12) << c.mean_external
        << std::setw(12) << c.difference << std::setw(12) << c.se_difference
        << std::setw(10) << std::setprecision(2) << c.std_difference
        << std::setprecision(4) << std::setw(9) << c.n_trial << std::setw(9)
        << c.n_external << "\n";
  }
  out << "verdict: " << (violated ? "violated" : "consistent")
      << " (max |std diff| " << std::setprecision(2) << max_abs_std_difference
      << ", threshold " << options.std_threshold << "; max |diff| "
      << std::setprecision(4) << max_abs_difference << ", margin "
      << options.abs_margin << ")\n";
  return out.str();
}

namespace {

void audit_treatment(const CompositeDataset& data, int source,
                     const std::string& condition, bool include_w,
                     const std::set<Cell>& required_cells,
                     const PositivityOptions& opts,
                     std::vector<PositivityViolation>& out) {
  auto declared = data.treatment_sets.find(source);
  if (declared == data.treatment_sets.end()) return;

  std::map<Cell, std::map<int, std::size_t>> counts;
  std::map<Cell, std::size_t> totals;
  for (const auto& r : data.records) {
    if (r.s != source) continue;
    Cell key = binned_cell(r, data.schema, opts.binning);
    if (include_w) key.insert(key.end(), r.w.begin(), r.w.end());
    ++totals[key];
    if (r.has_treatment) ++counts[key][r.a];
  }

  for (const auto& [cell, total] : totals) {
    if (!include_w && !required_cells.empty() && !required_cells.count(cell))
      continue;
    for (int a : declared->second) {
      std::size_t n = counts[cell][a];
      double p = static_cast<double>(n) / static_cast<double>(total);
      if (p < opts.floor || n < opts.min_count)
        out.push_back({condition, cell, a, p, n});
    }
  }
}

}  // namespace

PositivityReport positivity_audit(const CompositeDataset& data,
                                  const std::vector<std::string>& conditions,
                                  const PositivityOptions& opts) {
  PositivityReport report;
  report.conditions_checked = conditions;
  report.options = opts;

  // Cells the trial population puts mass on; A5/A8 only need positivity there.
  std::set<Cell> trial_cells;
  std::map<Cell, std::size_t> cell_totals;          // all sources
  std::map<Cell, std::size_t> cell_external;        // s=0
  for (const auto& r : data.records) {
    Cell key = binned_cell(r, data.schema, opts.binning);
    if (r.s == 1) trial_cells.insert(key);
    ++cell_totals[key];
    if (r.s == 0) ++cell_external[key];
  }

  for (const auto& cond : conditions) {
    if (cond == "A3") {
      audit_treatment(data, 1, "A3", false, trial_cells, opts,
                      report.violations);
    } else if (cond == "A5") {
      for (const auto& cell : trial_cells) {
        std::size_t n = cell_external.count(cell) ? cell_external.at(cell) : 0;
        double p = static_cast<double>(n) /
                   static_cast<double>(cell_totals.at(cell));
        if (p < opts.floor || n < opts.min_count)
          report.violations.push_back({"A5", cell, -1, p, n});
      }
    } else if (cond == "A8") {
      audit_treatment(data, 0, "A8", false, trial_cells, opts,
                      report.violations);
    } else if (cond == "A8'") {
      audit_treatment(data, 0, "A8'", true, {}, opts, report.violations);
    } else {
      throw Error(ErrorKind::InvalidSpec,
                  "unknown positivity condition '" + cond + "'");
    }
  }
  return report;
}

nlohmann::json PositivityReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& v : violations) {
    nlohmann::json row = {{"condition", v.condition},
                          {"cell", cell_to_string(v.cell)},
                          {"probability", v.probability},
                          {"count", v.count}};
    if (v.treatment >= 0) row["treatment"] = v.treatment;
    rows.push_back(row);
  }
  return {{"violations", rows},
          {"conditions_checked", conditions_checked},
          {"clean", clean()},
          {"floor", options.floor},
          {"min_count", options.min_count}};
}

std::string PositivityReport::to_text() const {
  std::ostringstream out;
  out << "positivity audit (floor " << options.floor << ", min count "
      << options.min_count << "): ";
  if (clean()) {
    out << "no violations\n";
    return out.str();
  }
  out << violations.size() << " violation(s)\n";
  out << std::left << std::setw(10) << "condition" << std::setw(16) << "cell"
      << std::setw(11) << "treatment" << std::right << std::setw(12) << "prob"
      << std::setw(8) << "count" << "\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& v : violations) {
    out << std::left << std::setw(10) << v.condition << std::setw(16)
        << cell_to_string(v.cell) << std::setw(11)
        << (v.treatment >= 0 ? std::to_string(v.treatment) : "-") << std::right
        << std::setw(12) << v.probability << std::setw(8) << v.count << "\n";
  }
  return out.str();
}

}  // namespace extcomp
