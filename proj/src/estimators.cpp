#include "extcomp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace extcomp {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Gform: return "pom_gform";
    case Strategy::PooledControl: return "pom_pooled_control";
    case Strategy::ExternalUniform: return "pom_external_uniform";
    case Strategy::DiffAnchor: return "pom_diff_anchor";
    case Strategy::RatioAnchor: return "pom_ratio_anchor";
    case Strategy::NestedW: return "pom_nested_w";
  }
  return "unknown";
}

const char* to_string(EstimatorForm f) {
  return f == EstimatorForm::GFormula ? "gformula" : "ipw";
}

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json j;
  j["estimand_id"] = estimand_id;
  j["proposition"] = proposition;
  j["point"] = point;
  if (interval) {
    j["ci_lo"] = interval->first;
    j["ci_hi"] = interval->second;
    j["ci_level"] = interval_level;
  } else {
    j["ci_lo"] = nullptr;
    j["ci_hi"] = nullptr;
  }
  nlohmann::json n = nlohmann::json::object();
  for (const auto& [s, count] : n_by_source) n[std::to_string(s)] = count;
  j["n_by_source"] = n;
  j["assumptions"] = assumptions;
  j["warnings"] = warnings;
  j["estimator_form"] = estimator_form;
  return j;
}

namespace {

using Assumptions = std::vector<std::string>;

Assumptions merge(const Assumptions& a, const Assumptions& b) {
  Assumptions out = a;
  for (const auto& s : b)
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  return out;
}

Assumptions gform_assumptions(int source, int s_target, Engagement eng) {
  if (s_target == 2) {
    if (source == 1) return {"A1", "A2", "A3", "A4*", "A5*"};
    return {"A1", "A7", "A8", "A4*", "A5*"};
  }
  if (source == 1) {
    if (eng == Engagement::JointIntervention) return {"A1†", "A2†", "A3"};
    return {"A1", "A2", "A3"};
  }
  if (source == s_target) return {"A1", "A7", "A8"};  // own-source adjustment
  return {"A1", "A4", "A5", "A7", "A8"};
}

std::string gform_proposition(int source, int s_target, Engagement eng) {
  if (s_target == 2) return source == 1 ? "20" : "21";
  if (source == 1) return eng == Engagement::JointIntervention ? "15" : "1";
  return "7";
}

std::string default_gform_id(const EstimandSpec& spec) {
  std::ostringstream out;
  out << "gamma_" << spec.source << "_" << spec.treatment;
  if (spec.s_target == 2) out << "_star";
  return out.str();
}

}  // namespace

Estimator::Estimator(const CompositeDataset& data, EstimatorConfig cfg)
    : data_(data), cfg_(cfg) {}

const FittedModel& Estimator::outcome_model(CondSet cond, const RowFilter& filter) {
  std::string key = "out|" + std::string(cond == CondSet::X ? "X" : "XW") + "|" +
                    filter.key() + "|" + to_string(cfg_.outcome_family);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    auto model = std::make_shared<FittedModel>(
        fit_outcome(data_, cond, filter, cfg_.outcome_family, cfg_.fit));
    it = cache_.emplace(key, std::move(model)).first;
  }
  return *it->second;
}

const FittedModel& Estimator::propensity_model(const PropensityTarget& target) {
  std::ostringstream key;
  key << "prop|" << (target.kind == PropensityTarget::Kind::Participation ? "S" : "A")
      << "|" << target.level << "|given=";
  for (int s : target.given_sources) key << s << ";";
  key << "|" << (target.cond == CondSet::X ? "X" : "XW") << "|"
      << to_string(cfg_.propensity_family);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(key.str());
  if (it == cache_.end()) {
    auto model = std::make_shared<FittedModel>(
        fit_propensity(data_, target, cfg_.propensity_family, cfg_.fit));
    it = cache_.emplace(key.str(), std::move(model)).first;
  }
  return *it->second;
}

double Estimator::marginalize(const FittedModel& model, int s_target) const {
  double num = 0, den = 0;
  for (const auto& r : data_.records) {
    if (r.s != s_target) continue;
    num += r.weight * model.predict(r);
    den += r.weight;
  }
  if (den <= 0)
    throw Error(ErrorKind::EmptySource,
                "no rows in target source s=" + std::to_string(s_target));
  return num / den;
}

double Estimator::floored(double p, WeightAudit& audit, double mass) const {
  audit.total_mass += mass;
  if (p < cfg_.propensity_floor) {
    audit.floored_mass += mass;
    return cfg_.propensity_floor;
  }
  return p;
}

void Estimator::finish_audit(const WeightAudit& audit, EstimateReport& report) const {
  if (audit.floored_mass <= 0 || audit.total_mass <= 0) return;
  double frac = audit.floored_mass / audit.total_mass;
  std::ostringstream msg;
  msg << "propensity floor " << cfg_.propensity_floor << " applied to "
      << frac * 100.0 << "% of weighted rows";
  if (frac > cfg_.floor_error_fraction)
    throw Error(ErrorKind::PositivityFloorTriggered, msg.str());
  report.warnings.push_back(msg.str());
}

EstimateReport Estimator::estimate(const EstimandSpec& spec) {
  switch (spec.strategy) {
    case Strategy::Gform: return gform(spec);
    case Strategy::PooledControl: return pooled_control(spec);
    case Strategy::ExternalUniform: return external_uniform(spec);
    case Strategy::DiffAnchor: return diff_anchor(spec);
    case Strategy::RatioAnchor: return ratio_anchor(spec);
    case Strategy::NestedW: return nested_w(spec);
  }
  throw Error(ErrorKind::InvalidSpec, "unknown strategy");
}

EstimateReport Estimator::gform(const EstimandSpec& spec) {
  EstimateReport report;
  report.estimand_id = spec.id.empty() ? default_gform_id(spec) : spec.id;
  report.proposition = gform_proposition(spec.source, spec.s_target, spec.engagement);
  report.assumptions = gform_assumptions(spec.source, spec.s_target, spec.engagement);
  report.estimator_form = to_string(spec.form);
  report.n_by_source = data_.n_by_source();

  bool cell_seen = false;
  for (const auto& r : data_.records)
    if (r.s == spec.source && r.has_treatment && r.a == spec.treatment) {
      cell_seen = true;
      break;
    }
  if (!cell_seen)
    throw Error(ErrorKind::EmptyCell,
                "no rows with s=" + std::to_string(spec.source) +
                    ", a=" + std::to_string(spec.treatment));

  RowFilter filter{std::set<int>{spec.source}, spec.treatment};

  if (spec.form == EstimatorForm::GFormula) {
    report.point = marginalize(outcome_model(CondSet::X, filter), spec.s_target);
    return report;
  }

  // Hajek weighting re-expression.
  const FittedModel& treat = propensity_model(
      {PropensityTarget::Kind::Treatment, spec.treatment, {spec.source}, CondSet::X});
  const FittedModel* part_target = nullptr;
  const FittedModel* part_source = nullptr;
  if (spec.source != spec.s_target) {
    part_target = &propensity_model(
        {PropensityTarget::Kind::Participation, spec.s_target, {}, CondSet::X});
    part_source = &propensity_model(
        {PropensityTarget::Kind::Participation, spec.source, {}, CondSet::X});
  }

  WeightAudit audit;
  double num = 0, den = 0;
  for (const auto& r : data_.records) {
    if (!filter.matches(r) || !r.has_outcome) continue;
    double ratio = 1.0;
    if (part_target)
      ratio = part_target->predict(r) / floored(part_source->predict(r), audit, r.weight);
    double pa = floored(treat.predict(r), audit, r.weight);
    double wt = r.weight * ratio / pa;
    num += wt * r.y;
    den += wt;
  }
  if (den <= 0) throw Error(ErrorKind::EmptyCell, "no weighted rows for " + report.estimand_id);
  report.point = num / den;
  finish_audit(audit, report);
  return report;
}

EstimateReport Estimator::pooled_control(const EstimandSpec& spec) {
  EstimateReport report;
  report.estimand_id = spec.id.empty() ? "beta" : spec.id;
  report.proposition = "3";
  report.assumptions = {"A1", "A2", "A3", "A4", "A6"};
  report.estimator_form = to_string(spec.form);
  report.n_by_source = data_.n_by_source();

  for (const auto& r : data_.records)
    if (r.s == 0 && r.has_treatment && r.a != spec.anchor_treatment)
      throw Error(ErrorKind::ExternalNotUniform,
                  "A6 violated: external row with a=" + std::to_string(r.a));

  RowFilter filter{std::set<int>{0, 1}, spec.anchor_treatment};

  if (spec.form == EstimatorForm::GFormula) {
    report.point = marginalize(outcome_model(CondSet::X, filter), spec.s_target);
    return report;
  }

  const FittedModel& treat = propensity_model(
      {PropensityTarget::Kind::Treatment, spec.anchor_treatment, {0, 1}, CondSet::X});
  const FittedModel& part1 =
      propensity_model({PropensityTarget::Kind::Participation, 1, {}, CondSet::X});
  const FittedModel* part0 = nullptr;
  if (data_.sources().count(2))
    part0 = &propensity_model({PropensityTarget::Kind::Participation, 0, {}, CondSet::X});

  WeightAudit audit;
  double num = 0, den = 0;
  for (const auto& r : data_.records) {
    if (!filter.matches(r) || !r.has_outcome) continue;
    double p1 = part1.predict(r);
    double p01 = part0 ? p1 + part0->predict(r) : 1.0;
    double wt = r.weight * p1 /
                (floored(p01, audit, r.weight) * floored(treat.predict(r), audit, r.weight));
    num += wt * r.y;
    den += wt;
  }
  if (den <= 0) throw Error(ErrorKind::EmptyCell, "no control rows to pool");
  report.point = num / den;
  finish_audit(audit, report);
  return report;
}

EstimateReport Estimator::external_uniform(const EstimandSpec& spec) {
  EstimateReport report;
  report.estimand_id = spec.id.empty() ? "eta" : spec.id;
  report.proposition = "5";
  report.assumptions = {"A1", "A4", "A5", "A6'"};
  report.estimator_form = to_string(spec.form);
  report.n_by_source = data_.n_by_source();

  std::optional<int> uniform_a;
  for (const auto& r : data_.records) {
    if (r.s != 0 || !r.has_treatment) continue;
    if (uniform_a && *uniform_a != r.a)
      throw Error(ErrorKind::ExternalNotUniform,
                  "A6' violated: external rows carry multiple treatments");
    uniform_a = r.a;
  }

  RowFilter filter{std::set<int>{0}, std::nullopt};

  if (spec.form == EstimatorForm::GFormula) {
    report.point = marginalize(outcome_model(CondSet::X, filter), spec.s_target);
    return report;
  }

  const FittedModel& part1 =
      propensity_model({PropensityTarget::Kind::Participation, spec.s_target, {}, CondSet::X});
  const FittedModel& part0 =
      propensity_model({PropensityTarget::Kind::Participation, 0, {}, CondSet::X});
  WeightAudit audit;
  double num = 0, den = 0;
  for (const auto& r : data_.records) {
    if (r.s != 0 || !r.has_outcome) continue;
    double wt = r.weight * part1.predict(r) / floored(part0.predict(r), audit, r.weight);
    num += wt * r.y;
    den += wt;
  }
  if (den <= 0) throw Error(ErrorKind::EmptySubset, "external source is empty");
  report.point = num / den;
  finish_audit(audit, report);
  return report;
}

EstimateReport Estimator::diff_anchor(const EstimandSpec& spec) {
  const int a0 = spec.anchor_treatment;
  if (!data_.observed_treatments(1).count(a0) || !data_.observed_treatments(0).count(a0))
    throw Error(ErrorKind::MissingAnchorArm,
                "anchor treatment a=" + std::to_string(a0) +
                    " must be observed in both sources");

  EstimandSpec leg = spec;
  leg.strategy = Strategy::Gform;
  leg.id.clear();

  leg.source = 0;
  leg.treatment = spec.treatment;
  EstimateReport comparator = gform(leg);
  leg.source = 1;
  leg.treatment = a0;
  EstimateReport trial_anchor = gform(leg);
  leg.source = 0;
  EstimateReport external_anchor = gform(leg);

  EstimateReport report;
  report.estimand_id = spec.id.empty() ? "lambda" : spec.id;
  report.estimator_form = to_string(spec.form);
  report.n_by_source = data_.n_by_source();
  report.point = comparator.point + trial_anchor.point - external_anchor.point;
  report.warnings = merge(merge(comparator.warnings, trial_anchor.warnings),
                          external_anchor.warnings);
  if (spec.engagement == Engagement::JointIntervention) {
    report.proposition = "16";
    report.assumptions = {"A1†", "A2†", "A3", "A5",
                          "A7†", "A8",       "A9†", "A11"};
  } else {
    report.proposition = "9";
    report.assumptions = {"A1", "A2", "A3", "A5", "A7", "A8", "A9"};
  }
  return report;
}

EstimateReport Estimator::ratio_anchor(const EstimandSpec& spec) {
  const int anchor_source = spec.s_target == 1 ? 1 : 2;
  const int ratio_source = spec.s_target == 1 ? 0 : spec.ratio_source;
  const int a0 = spec.anchor_treatment;

  EstimateReport report;
  if (!spec.id.empty()) {
    report.estimand_id = spec.id;
  } else if (spec.s_target == 1) {
    report.estimand_id = "rho";
  } else {
    report.estimand_id = ratio_source == 1 ? "rho_star_1" : "rho_star_2";
  }
  report.estimator_form = to_string(spec.form);
  report.n_by_source = data_.n_by_source();
  if (spec.s_target == 2) {
    report.proposition = ratio_source == 1 ? "24" : "25";
    if (ratio_source == 1)
      report.assumptions = {"A1", "A2", "A3", "A5*", "A7*", "A8*", "A10*"};
    else
      report.assumptions = {"A1", "A7", "A8", "A5*", "A7*", "A8*", "A10*"};
  } else if (spec.engagement == Engagement::JointIntervention) {
    report.proposition = "18";
    report.assumptions = {"A1†", "A2†", "A3", "A5",
                          "A7†", "A8",       "A10†", "A11'"};
  } else {
    report.proposition = "11";
    report.assumptions = {"A1", "A2", "A3", "A5", "A7", "A8", "A10"};
  }

  RowFilter anchor_f{std::set<int>{anchor_source}, a0};
  RowFilter num_f{std::set<int>{ratio_source}, spec.treatment};
  RowFilter den_f{std::set<int>{ratio_source}, a0};
  const FittedModel& anchor_m = outcome_model(CondSet::X, anchor_f);
  const FittedModel& num_m = outcome_model(CondSet::X, num_f);
  const FittedModel& den_m = outcome_model(CondSet::X, den_f);

  auto checked_den = [&](const ObservationRecord& r) {
    double d = den_m.predict(r);
    if (std::abs(d) < cfg_.denominator_eps)
      throw Error(ErrorKind::DenominatorNearZero,
                  "fitted anchor mean ~0 at x=" + cell_to_string(r.x));
    return d;
  };

  if (spec.form == EstimatorForm::GFormula) {
    double num = 0, den = 0;
    for (const auto& r : data_.records) {
      if (r.s != spec.s_target) continue;
      num += r.weight * anchor_m.predict(r) * num_m.predict(r) / checked_den(r);
      den += r.weight;
    }
    if (den <= 0) throw Error(ErrorKind::EmptySource, "no target rows");
    report.point = num / den;
    return report;
  }

  const FittedModel& part_t = propensity_model(
      {PropensityTarget::Kind::Participation, spec.s_target, {}, CondSet::X});
  const FittedModel& part_r = propensity_model(
      {PropensityTarget::Kind::Participation, ratio_source, {}, CondSet::X});
  const FittedModel& treat = propensity_model(
      {PropensityTarget::Kind::Treatment, spec.treatment, {ratio_source}, CondSet::X});

  WeightAudit audit;
  double num = 0, den = 0;
  for (const auto& r : data_.records) {
    if (r.s != ratio_source || !r.has_treatment || r.a != spec.treatment || !r.has_outcome)
      continue;
    double wt = r.weight * part_t.predict(r) /
                (floored(part_r.predict(r), audit, r.weight) *
                 floored(treat.predict(r), audit, r.weight));
    num += wt * r.y * anchor_m.predict(r) / checked_den(r);
    den += wt;
  }
  if (den <= 0) throw Error(ErrorKind::EmptyCell, "no ratio-arm rows");
  report.point = num / den;
  finish_audit(audit, report);
  return report;
}

EstimateReport Estimator::nested_w(const EstimandSpec& spec) {
  EstimateReport report;
  report.estimand_id = spec.id.empty() ? "mu" : spec.id;
  report.proposition = "13";
  report.assumptions = {"A1", "A4", "A5", "A7'", "A8'"};
  report.estimator_form = to_string(spec.form);
  report.n_by_source = data_.n_by_source();

  for (const auto& r : data_.records)
    if (r.s == 0 && !r.has_w())
      throw Error(ErrorKind::MissingW, "external row without W block");

  RowFilter inner_f{std::set<int>{0}, spec.treatment};
  bool cell_seen = false;
  for (const auto& r : data_.records)
    if (inner_f.matches(r)) cell_seen = true;
  if (!cell_seen)
    throw Error(ErrorKind::EmptyCell,
                "no external rows with a=" + std::to_string(spec.treatment));

  const FittedModel& inner = outcome_model(CondSet::XW, inner_f);

  if (spec.form == EstimatorForm::GFormula) {
    // Stage two: regress the inner predictions, evaluated on every external
    // row regardless of treatment, on X within the external source.
    std::vector<ValueRow> stage2;
    for (const auto& r : data_.records)
      if (r.s == 0) stage2.push_back({r.x, inner.predict(r), r.weight});
    Family fam = cfg_.outcome_family;
    FittedModel outer = fit_values(stage2, fam, /*binary_values=*/false, cfg_.fit);
    double num = 0, den = 0;
    for (const auto& r : data_.records) {
      if (r.s != spec.s_target) continue;
      num += r.weight * outer.predict(r);
      den += r.weight;
    }
    if (den <= 0) throw Error(ErrorKind::EmptySource, "no target rows");
    report.point = num / den;
    return report;
  }

  const FittedModel& part_t = propensity_model(
      {PropensityTarget::Kind::Participation, spec.s_target, {}, CondSet::X});
  const FittedModel& part0 =
      propensity_model({PropensityTarget::Kind::Participation, 0, {}, CondSet::X});
  const FittedModel& treat = propensity_model(
      {PropensityTarget::Kind::Treatment, spec.treatment, {0}, CondSet::XW});

  WeightAudit audit;
  double num = 0, den = 0;
  for (const auto& r : data_.records) {
    if (!inner_f.matches(r) || !r.has_outcome) continue;
    double wt = r.weight * part_t.predict(r) /
                (floored(part0.predict(r), audit, r.weight) *
                 floored(treat.predict(r), audit, r.weight));
    num += wt * r.y;
    den += wt;
  }
  if (den <= 0) throw Error(ErrorKind::EmptyCell, "no external comparator rows");
  report.point = num / den;
  finish_audit(audit, report);
  return report;
}

EstimateReport Estimator::contrast(const ContrastSpec& spec) {
  if (spec.left.s_target != spec.right.s_target)
    throw Error(ErrorKind::InvalidSpec, "contrast legs must share s_target");
  if (spec.left.engagement != spec.right.engagement)
    throw Error(ErrorKind::InvalidSpec, "contrast legs must share engagement flag");
  EstimateReport left = estimate(spec.left);
  EstimateReport right = estimate(spec.right);
  EstimateReport report;
  report.estimand_id =
      spec.id.empty() ? left.estimand_id + "-" + right.estimand_id : spec.id;
  report.proposition = left.proposition + "," + right.proposition;
  report.point = left.point - right.point;
  report.n_by_source = data_.n_by_source();
  report.assumptions = merge(left.assumptions, right.assumptions);
  report.warnings = merge(left.warnings, right.warnings);
  report.estimator_form = left.estimator_form;
  return report;
}

namespace {

struct ContrastDef {
  const char* left;
  const char* right;
  const char* prop_absent;
  const char* prop_joint;
};

const std::map<std::string, ContrastDef>& contrast_defs() {
  static const std::map<std::string, ContrastDef> defs = {
      {"kappa", {"gamma_1_1", "beta", "4", "4"}},
      {"zeta", {"gamma_1_1", "eta", "6", "6"}},
      {"psi", {"gamma_1_1", "gamma_0_2", "8", "8"}},
      {"phi", {"gamma_1_1", "lambda", "10", "17"}},
      {"theta", {"gamma_1_1", "rho", "12", "19"}},
      {"xi", {"gamma_1_1", "mu", "14", "14"}},
      {"psi_star", {"gamma_star_1_1", "gamma_star_0_2", "22", "22"}},
      {"nu", {"rho_star_1", "rho_star_2", "26", "26"}},
  };
  return defs;
}

}  // namespace

const std::vector<std::string>& Estimator::catalog() {
  static const std::vector<std::string> names = {
      "gamma_1_1", "gamma_1_0", "gamma_0_2", "gamma_0_0",
      "beta", "eta", "lambda", "rho", "mu",
      "kappa", "zeta", "psi", "phi", "theta", "xi",
      "gamma_star_1_1", "gamma_star_1_0", "gamma_star_0_2", "gamma_star_0_0",
      "psi_star", "phi_star", "rho_star_1", "rho_star_2", "nu",
  };
  return names;
}

bool Estimator::is_contrast(const std::string& name) {
  return contrast_defs().count(name) || name == "phi_star";
}

EstimateReport Estimator::estimate_named(const std::string& name,
                                         EstimatorForm form, Engagement engagement) {
  auto pom = [&](Strategy strategy, int source, int treatment, int s_target,
                 int ratio_source = 0) {
    EstimandSpec spec;
    spec.strategy = strategy;
    spec.source = source;
    spec.treatment = treatment;
    spec.s_target = s_target;
    spec.ratio_source = ratio_source;
    spec.engagement = engagement;
    spec.form = form;
    spec.id = name;
    return spec;
  };

  if (name == "gamma_1_1") return estimate(pom(Strategy::Gform, 1, 1, 1));
  if (name == "gamma_1_0") return estimate(pom(Strategy::Gform, 1, 0, 1));
  if (name == "gamma_0_2") return estimate(pom(Strategy::Gform, 0, 2, 1));
  if (name == "gamma_0_0") return estimate(pom(Strategy::Gform, 0, 0, 1));
  if (name == "gamma_star_1_1") return estimate(pom(Strategy::Gform, 1, 1, 2));
  if (name == "gamma_star_1_0") return estimate(pom(Strategy::Gform, 1, 0, 2));
  if (name == "gamma_star_0_2") return estimate(pom(Strategy::Gform, 0, 2, 2));
  if (name == "gamma_star_0_0") return estimate(pom(Strategy::Gform, 0, 0, 2));
  if (name == "beta") return estimate(pom(Strategy::PooledControl, 0, 0, 1));
  if (name == "eta") return estimate(pom(Strategy::ExternalUniform, 0, 2, 1));
  if (name == "lambda") return estimate(pom(Strategy::DiffAnchor, 0, 2, 1));
  if (name == "rho") return estimate(pom(Strategy::RatioAnchor, 0, 2, 1));
  if (name == "mu") return estimate(pom(Strategy::NestedW, 0, 2, 1));
  if (name == "rho_star_1") return estimate(pom(Strategy::RatioAnchor, 1, 1, 2, 1));
  if (name == "rho_star_2") return estimate(pom(Strategy::RatioAnchor, 0, 2, 2, 0));

  if (name == "phi_star") {
    // Difference-in-differences of four outcome means, each marginalized to
    // the third source; no restriction links the two control legs.
    EstimateReport g11 = estimate_named("gamma_star_1_1", form, engagement);
    EstimateReport g10 = estimate_named("gamma_star_1_0", form, engagement);
    EstimateReport g02 = estimate_named("gamma_star_0_2", form, engagement);
    EstimateReport g00 = estimate_named("gamma_star_0_0", form, engagement);
    EstimateReport report;
    report.estimand_id = name;
    report.proposition = "23";
    report.point = (g11.point - g10.point) - (g02.point - g00.point);
    report.n_by_source = data_.n_by_source();
    report.assumptions = {"A1", "A2", "A3", "A5*", "A7", "A8", "A9*"};
    report.warnings = merge(merge(g11.warnings, g10.warnings),
                            merge(g02.warnings, g00.warnings));
    report.estimator_form = to_string(form);
    return report;
  }

  auto it = contrast_defs().find(name);
  if (it != contrast_defs().end()) {
    EstimateReport left = estimate_named(it->second.left, form, engagement);
    EstimateReport right = estimate_named(it->second.right, form, engagement);
    EstimateReport report;
    report.estimand_id = name;
    report.proposition = engagement == Engagement::JointIntervention
                             ? it->second.prop_joint
                             : it->second.prop_absent;
    report.point = left.point - right.point;
    report.n_by_source = data_.n_by_source();
    report.assumptions = merge(left.assumptions, right.assumptions);
    report.warnings = merge(left.warnings, right.warnings);
    report.estimator_form = to_string(form);
    return report;
  }

  throw Error(ErrorKind::InvalidSpec, "unknown estimand '" + name + "'");
}

}  // namespace extcomp
