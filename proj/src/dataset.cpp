#include "extcomp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace extcomp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::TreatmentOutsideDeclaredSet: return "TreatmentOutsideDeclaredSet";
    case ErrorKind::EmptySource: return "EmptySource";
    case ErrorKind::ContinuousWithoutBinning: return "ContinuousWithoutBinning";
    case ErrorKind::EmptySubset: return "EmptySubset";
    case ErrorKind::IrlsNonConvergence: return "IrlsNonConvergence";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::UnseenCategoryLevel: return "UnseenCategoryLevel";
    case ErrorKind::EmptyCell: return "EmptyCell";
    case ErrorKind::ExternalNotUniform: return "ExternalNotUniform";
    case ErrorKind::MissingAnchorArm: return "MissingAnchorArm";
    case ErrorKind::DenominatorNearZero: return "DenominatorNearZero";
    case ErrorKind::MissingW: return "MissingW";
    case ErrorKind::PositivityFloorTriggered: return "PositivityFloorTriggered";
    case ErrorKind::NoCommonSupport: return "NoCommonSupport";
    case ErrorKind::MissingControlArm: return "MissingControlArm";
    case ErrorKind::TooManyReplicateFailures: return "TooManyReplicateFailures";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::string cell_to_string(const Cell& cell) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (i) out << ",";
    double v = cell[i];
    if (v == std::floor(v) && std::abs(v) < 1e15)
      out << static_cast<long long>(v);
    else
      out << v;
  }
  out << ")";
  return out.str();
}

std::size_t CompositeDataset::n_source(int s) const {
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.s == s) ++n;
  return n;
}

std::map<int, std::size_t> CompositeDataset::n_by_source() const {
  std::map<int, std::size_t> out;
  for (const auto& r : records) ++out[r.s];
  return out;
}

std::map<std::pair<int, int>, std::size_t> CompositeDataset::cell_counts() const {
  std::map<std::pair<int, int>, std::size_t> out;
  for (const auto& r : records)
    if (r.has_treatment) ++out[{r.s, r.a}];
  return out;
}

std::set<int> CompositeDataset::sources() const {
  std::set<int> out;
  for (const auto& r : records) out.insert(r.s);
  return out;
}

std::set<int> CompositeDataset::observed_treatments(int s) const {
  std::set<int> out;
  for (const auto& r : records)
    if (r.s == s && r.has_treatment) out.insert(r.a);
  return out;
}

void CompositeDataset::validate() const {
  if (n_source(1) == 0)
    throw Error(ErrorKind::EmptySource, "dataset contains no index-trial (s=1) rows");
  for (const auto& r : records) {
    if (r.s != 0 && r.s != 1 && r.s != 2)
      throw Error(ErrorKind::InvalidSpec, "source indicator must be 0, 1 or 2");
    if (r.x.size() != schema.x_cols.size())
      throw Error(ErrorKind::InvalidSpec, "covariate vector length mismatch");
    if (!r.w.empty() && r.w.size() != schema.w_cols.size())
      throw Error(ErrorKind::InvalidSpec, "W block length mismatch");
    if (r.has_treatment) {
      auto it = treatment_sets.find(r.s);
      if (it == treatment_sets.end() || !it->second.count(r.a))
        throw Error(ErrorKind::TreatmentOutsideDeclaredSet,
                    "treatment " + std::to_string(r.a) + " not in declared set for s=" +
                        std::to_string(r.s));
    } else if (r.s != 2) {
      throw Error(ErrorKind::InvalidSpec,
                  "treatment/outcome may be absent only for s=2 rows");
    }
    if (r.has_outcome && !std::isfinite(r.y))
      throw Error(ErrorKind::NonNumericCell, "non-finite outcome");
    if (r.has_outcome && outcome_kind == OutcomeKind::Binary && r.y != 0.0 && r.y != 1.0)
      throw Error(ErrorKind::InvalidSpec, "binary outcome must be 0 or 1");
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, const std::string& col, std::size_t line_no) {
  std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::NonNumericCell,
                "column '" + col + "' line " + std::to_string(line_no) + ": '" + s + "'");
  }
}

}  // namespace

CompositeDataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");

  std::string header_line;
  if (!std::getline(in, header_line))
    throw Error(ErrorKind::Io, "empty file '" + path + "'");
  auto header = split_line(header_line);
  for (auto& h : header) h = trim(h);

  int col_s = -1, col_a = -1, col_y = -1;
  std::vector<std::pair<int, std::string>> x_cols, w_cols;  // (index, name)
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    if (h == "s") col_s = static_cast<int>(i);
    else if (h == "a") col_a = static_cast<int>(i);
    else if (h == "y") col_y = static_cast<int>(i);
    else if (h.rfind("x_", 0) == 0) x_cols.emplace_back(static_cast<int>(i), h);
    else if (h.rfind("w_", 0) == 0) w_cols.emplace_back(static_cast<int>(i), h);
    else
      throw Error(ErrorKind::MissingColumn,
                  "unrecognized column '" + h + "' (expected s, a, y, x_*, w_*)");
  }
  if (col_s < 0) throw Error(ErrorKind::MissingColumn, "required column 's' absent");
  if (col_a < 0) throw Error(ErrorKind::MissingColumn, "required column 'a' absent");
  if (col_y < 0) throw Error(ErrorKind::MissingColumn, "required column 'y' absent");

  CompositeDataset data;
  for (const auto& [idx, name] : x_cols)
    data.schema.x_cols.push_back({name, !opts.continuous_columns.count(name)});
  for (const auto& [idx, name] : w_cols)
    data.schema.w_cols.push_back({name, !opts.continuous_columns.count(name)});

  bool all_binary_y = true;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::NonNumericCell,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    ObservationRecord rec;
    rec.s = static_cast<int>(parse_number(fields[col_s], "s", line_no));
    if (rec.s != 0 && rec.s != 1 && rec.s != 2)
      throw Error(ErrorKind::InvalidSpec,
                  "line " + std::to_string(line_no) + ": s must be 0, 1 or 2");

    const std::string a_raw = trim(fields[col_a]);
    const std::string y_raw = trim(fields[col_y]);
    if (a_raw.empty() || y_raw.empty()) {
      // Covariate-only rows are legal only in a third-source target sample.
      if (rec.s != 2 || a_raw != y_raw)
        throw Error(ErrorKind::NonNumericCell,
                    "line " + std::to_string(line_no) +
                        ": empty a/y permitted only jointly and only for s=2 rows");
      rec.has_treatment = false;
      rec.has_outcome = false;
    } else {
      rec.a = static_cast<int>(parse_number(a_raw, "a", line_no));
      rec.y = parse_number(y_raw, "y", line_no);
      if (rec.y != 0.0 && rec.y != 1.0) all_binary_y = false;
    }

    for (const auto& [idx, name] : x_cols)
      rec.x.push_back(parse_number(fields[idx], name, line_no));
    bool any_w = false, all_w = true;
    for (const auto& [idx, name] : w_cols) {
      if (trim(fields[idx]).empty()) {
        all_w = false;
      } else {
        any_w = true;
        rec.w.push_back(parse_number(fields[idx], name, line_no));
      }
    }
    if (any_w && !all_w)
      throw Error(ErrorKind::NonNumericCell,
                  "line " + std::to_string(line_no) + ": partial W block");
    if (any_w && rec.w.size() != w_cols.size())
      throw Error(ErrorKind::NonNumericCell,
                  "line " + std::to_string(line_no) + ": partial W block");

    data.records.push_back(std::move(rec));
  }

  data.outcome_kind = opts.outcome_kind.value_or(
      all_binary_y ? OutcomeKind::Binary : OutcomeKind::Continuous);

  if (opts.treatment_sets) {
    data.treatment_sets = *opts.treatment_sets;
  } else {
    for (const auto& r : data.records)
      if (r.has_treatment) data.treatment_sets[r.s].insert(r.a);
  }

  data.validate();
  return data;
}

void write_csv(const CompositeDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << "s,a,y";
  for (const auto& c : data.schema.x_cols) out << "," << c.name;
  for (const auto& c : data.schema.w_cols) out << "," << c.name;
  out << "\n";
  out.precision(17);
  for (const auto& r : data.records) {
    out << r.s << ",";
    if (r.has_treatment) out << r.a;
    out << ",";
    if (r.has_outcome) out << r.y;
    for (double v : r.x) out << "," << v;
    if (r.has_w()) {
      for (double v : r.w) out << "," << v;
    } else {
      for (std::size_t i = 0; i < data.schema.w_cols.size(); ++i) out << ",";
    }
    out << "\n";
  }
}

Cell binned_cell(const ObservationRecord& r, const CovariateSchema& schema,
                 const std::optional<BinningRule>& binning) {
  Cell out;
  out.reserve(r.x.size());
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const auto& col = schema.x_cols[i];
    if (col.categorical) {
      out.push_back(r.x[i]);
      continue;
    }
    if (!binning || !binning->edges.count(col.name))
      throw Error(ErrorKind::ContinuousWithoutBinning,
                  "column '" + col.name + "' is continuous and no binning rule was given");
    const auto& edges = binning->edges.at(col.name);
    double bin = 0;
    for (double e : edges)
      if (r.x[i] >= e) ++bin;
    out.push_back(bin);
  }
  return out;
}

SupportReport common_support(const CompositeDataset& data, int source_a,
                             int source_b,
                             const std::optional<BinningRule>& binning) {
  std::set<Cell> cells_a, cells_b;
  for (const auto& r : data.records) {
    if (r.s == source_a) cells_a.insert(binned_cell(r, data.schema, binning));
    if (r.s == source_b) cells_b.insert(binned_cell(r, data.schema, binning));
  }
  SupportReport report;
  for (const auto& c : cells_a) {
    if (cells_b.count(c)) report.shared.insert(c);
    else report.unique_to_a.insert(c);
  }
  for (const auto& c : cells_b)
    if (!cells_a.count(c)) report.unique_to_b.insert(c);
  return report;
}

}  // namespace extcomp
