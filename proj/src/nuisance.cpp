#include "extcomp/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace extcomp {

const char* to_string(Family f) {
  switch (f) {
    case Family::Auto: return "auto";
    case Family::Saturated: return "saturated";
    case Family::Linear: return "linear";
    case Family::Logistic: return "logistic";
  }
  return "unknown";
}

std::string RowFilter::key() const {
  std::ostringstream out;
  out << "s=";
  if (sources) {
    for (int s : *sources) out << s << ";";
  } else {
    out << "*";
  }
  out << "|a=";
  if (treatment) out << *treatment;
  else out << "*";
  return out.str();
}

Cell FittedModel::conditioning_cell(const ObservationRecord& r) const {
  if (cond == CondSet::X) return r.x;
  if (!r.has_w())
    throw Error(ErrorKind::MissingW, "record lacks W block required by model");
  Cell key = r.x;
  key.insert(key.end(), r.w.begin(), r.w.end());
  return key;
}

double FittedModel::predict_cell(const Cell& key) const {
  auto it = cells.find(key);
  if (it == cells.end())
    throw Error(ErrorKind::UnseenCategoryLevel,
                "cell " + cell_to_string(key) + " absent at fit time");
  return it->second;
}

double FittedModel::predict(const ObservationRecord& r) const {
  Cell key = conditioning_cell(r);
  if (family == Family::Saturated) return predict_cell(key);
  double eta = coef.at(0);
  for (std::size_t i = 0; i < key.size(); ++i) eta += coef.at(i + 1) * key[i];
  if (logistic) return 1.0 / (1.0 + std::exp(-eta));
  return eta;
}

nlohmann::json FittedModel::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family);
  j["conditioning"] = cond == CondSet::X ? "X" : "XW";
  if (family == Family::Saturated) {
    nlohmann::json table = nlohmann::json::object();
    for (const auto& [cell, mean] : cells) table[cell_to_string(cell)] = mean;
    j["cell_means"] = table;
  } else {
    j["coefficients"] = coef;
    j["link"] = logistic ? "logit" : "identity";
    j["iterations"] = iterations;
    j["converged"] = converged;
  }
  return j;
}

namespace {

// Solve A x = b in place, Gaussian elimination with partial pivoting. The
// systems here are tiny (handful of main effects), so no library is needed.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    if (std::abs(a[k][k]) < 1e-12)
      throw Error(ErrorKind::SeparationDetected,
                  "singular design matrix (collinear or degenerate covariates)");
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double v = b[k];
    for (std::size_t j = k + 1; j < n; ++j) v -= a[k][j] * x[j];
    x[k] = v / a[k][k];
  }
  return x;
}

struct DesignRow {
  Cell z;        // conditioning covariates
  double y = 0.0;
  double w = 1.0;
};

FittedModel fit_rows(const std::vector<DesignRow>& rows, CondSet cond,
                     Family family, bool binary, const FitOptions& opts) {
  if (rows.empty())
    throw Error(ErrorKind::EmptySubset, "no rows matched the requested subset");

  FittedModel model;
  model.cond = cond;
  model.family = family;

  if (family == Family::Saturated) {
    std::map<Cell, std::pair<double, double>> acc;  // cell -> (sum wy, sum w)
    for (const auto& r : rows) {
      auto& [wy, w] = acc[r.z];
      wy += r.w * r.y;
      w += r.w;
    }
    for (const auto& [cell, sums] : acc) model.cells[cell] = sums.first / sums.second;
    return model;
  }

  const std::size_t p = rows.front().z.size() + 1;
  auto design = [&](const DesignRow& r, std::size_t j) {
    return j == 0 ? 1.0 : r.z[j - 1];
  };

  if (family == Family::Linear) {
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (const auto& r : rows)
      for (std::size_t i = 0; i < p; ++i) {
        double xi = design(r, i) * r.w;
        xty[i] += xi * r.y;
        for (std::size_t j = 0; j < p; ++j) xtx[i][j] += xi * design(r, j);
      }
    model.coef = solve_dense(std::move(xtx), std::move(xty));
    model.iterations = 1;
    return model;
  }

  // Logistic via iteratively reweighted least squares.
  if (!binary)
    throw Error(ErrorKind::InvalidSpec,
                "logistic family requires a binary outcome");
  model.logistic = true;
  std::vector<double> beta(p, 0.0);
  bool converged = false;
  int iter = 0;
  for (; iter < opts.irls_max_iter; ++iter) {
    std::vector<std::vector<double>> h(p, std::vector<double>(p, 0.0));
    std::vector<double> g(p, 0.0);
    for (const auto& r : rows) {
      double eta = beta[0];
      for (std::size_t j = 1; j < p; ++j) eta += beta[j] * r.z[j - 1];
      double mu = 1.0 / (1.0 + std::exp(-eta));
      double v = std::max(mu * (1.0 - mu), 1e-12) * r.w;
      double resid = r.w * (r.y - mu);
      for (std::size_t i = 0; i < p; ++i) {
        g[i] += design(r, i) * resid;
        for (std::size_t j = 0; j < p; ++j) h[i][j] += design(r, i) * v * design(r, j);
      }
    }
    auto step = solve_dense(std::move(h), std::move(g));
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      beta[j] += step[j];
      max_change = std::max(max_change, std::abs(step[j]));
    }
    for (double b : beta)
      if (std::abs(b) > opts.separation_bound)
        throw Error(ErrorKind::SeparationDetected,
                    "logistic coefficients diverging (|beta| > " +
                        std::to_string(opts.separation_bound) + ")");
    if (max_change < opts.irls_tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorKind::IrlsNonConvergence,
                "IRLS did not converge in " + std::to_string(opts.irls_max_iter) +
                    " iterations");
  model.coef = std::move(beta);
  model.iterations = iter;
  model.converged = converged;
  return model;
}

Cell conditioning_of(const ObservationRecord& r, CondSet cond) {
  if (cond == CondSet::X) return r.x;
  if (!r.has_w())
    throw Error(ErrorKind::MissingW, "row lacks W block required for conditioning");
  Cell z = r.x;
  z.insert(z.end(), r.w.begin(), r.w.end());
  return z;
}

}  // namespace

Family resolve_family(const CompositeDataset& data, CondSet cond,
                      const RowFilter& filter, bool binary_outcome,
                      const FitOptions& opts) {
  bool categorical = data.schema.all_categorical();
  if (cond == CondSet::XW)
    for (const auto& c : data.schema.w_cols) categorical = categorical && c.categorical;
  if (categorical) {
    std::map<Cell, std::size_t> counts;
    for (const auto& r : data.records)
      if (filter.matches(r)) ++counts[conditioning_of(r, cond)];
    bool ok = !counts.empty();
    for (const auto& [cell, n] : counts)
      ok = ok && n >= static_cast<std::size_t>(opts.min_cell_rows);
    if (ok) return Family::Saturated;
  }
  return binary_outcome ? Family::Logistic : Family::Linear;
}

FittedModel fit_outcome(const CompositeDataset& data, CondSet cond,
                        const RowFilter& filter, Family family,
                        const FitOptions& opts) {
  bool binary = data.outcome_kind == OutcomeKind::Binary;
  if (family == Family::Auto) family = resolve_family(data, cond, filter, binary, opts);
  std::vector<DesignRow> rows;
  for (const auto& r : data.records)
    if (filter.matches(r) && r.has_outcome)
      rows.push_back({conditioning_of(r, cond), r.y, r.weight});
  return fit_rows(rows, cond, family, binary, opts);
}

FittedModel fit_propensity(const CompositeDataset& data,
                           const PropensityTarget& target, Family family,
                           const FitOptions& opts) {
  std::vector<DesignRow> rows;
  for (const auto& r : data.records) {
    if (target.kind == PropensityTarget::Kind::Treatment) {
      if (!target.given_sources.count(r.s) || !r.has_treatment) continue;
      rows.push_back({conditioning_of(r, target.cond),
                      r.a == target.level ? 1.0 : 0.0, r.weight});
    } else {
      rows.push_back({conditioning_of(r, target.cond),
                      r.s == target.level ? 1.0 : 0.0, r.weight});
    }
  }
  if (family == Family::Auto) {
    // Same rule as outcomes; propensity responses are always binary.
    bool categorical = data.schema.all_categorical();
    if (target.cond == CondSet::XW)
      for (const auto& c : data.schema.w_cols) categorical = categorical && c.categorical;
    std::map<Cell, std::size_t> counts;
    for (const auto& r : rows) ++counts[r.z];
    bool ok = categorical && !rows.empty();
    for (const auto& [cell, n] : counts)
      ok = ok && n >= static_cast<std::size_t>(opts.min_cell_rows);
    family = ok ? Family::Saturated : Family::Logistic;
  }
  return fit_rows(rows, target.cond, family, /*binary=*/true, opts);
}

FittedModel fit_values(const std::vector<ValueRow>& rows, Family family,
                       bool binary_values, const FitOptions& opts) {
  std::vector<DesignRow> drows;
  drows.reserve(rows.size());
  for (const auto& r : rows) drows.push_back({r.covariates, r.value, r.weight});
  if (family == Family::Auto) {
    std::map<Cell, std::size_t> counts;
    for (const auto& r : drows) ++counts[r.z];
    bool ok = !drows.empty();
    for (const auto& [cell, n] : counts)
      ok = ok && n >= static_cast<std::size_t>(opts.min_cell_rows);
    // Predicted values are generally non-binary; fall back to linear.
    family = ok ? Family::Saturated : Family::Linear;
  }
  return fit_rows(drows, CondSet::X, family, binary_values, opts);
}

}  // namespace extcomp
