// estimators.hpp -- plug-in estimators for every identifying functional:
// outcome-model (g-formula) forms and their Hajek-weighted re-expressions,
// plus difference-scale contrasts between potential-outcome means.
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "extcomp/dataset.hpp"
#include "extcomp/nuisance.hpp"

namespace extcomp {

enum class Strategy {
  Gform,            // gamma_{s,a} marginalized to a target source
  PooledControl,    // beta: controls pooled across sources
  ExternalUniform,  // eta: uniformly treated external source
  DiffAnchor,       // lambda: gamma_{0,2} + (gamma_{1,0} - gamma_{0,0})
  RatioAnchor,      // rho and its starred variants
  NestedW,          // mu: two-stage adjustment for external-only W
};

enum class EstimatorForm { GFormula, Ipw };
enum class Engagement { Absent, JointIntervention };

const char* to_string(Strategy s);
const char* to_string(EstimatorForm f);

struct EstimandSpec {
  Strategy strategy = Strategy::Gform;
  int source = 1;       // s of the conditional mean being marginalized
  int treatment = 1;    // a of interest (the comparator arm for anchors)
  int s_target = 1;     // population the estimand refers to (1 or 2)
  int anchor_treatment = 0;
  // RatioAnchor with s_target=2: which source supplies the ratio arms
  // (1 -> rho*_1 with the trial's a=1 arm, 0 -> rho*_2 with the external a=2).
  int ratio_source = 0;
  Engagement engagement = Engagement::Absent;
  EstimatorForm form = EstimatorForm::GFormula;
  std::string id;  // report label; defaults to a canonical name
};

struct ContrastSpec {
  EstimandSpec left;
  EstimandSpec right;
  std::string id;
};

struct EstimateReport {
  std::string estimand_id;
  std::string proposition;
  double point = 0.0;
  std::optional<std::pair<double, double>> interval;
  double interval_level = 0.95;
  std::map<int, std::size_t> n_by_source;
  std::vector<std::string> assumptions;
  std::vector<std::string> warnings;
  std::string estimator_form = "gformula";

  nlohmann::json to_json() const;
};

struct EstimatorConfig {
  Family outcome_family = Family::Auto;
  Family propensity_family = Family::Auto;
  FitOptions fit;
  // Floor for propensities used as weighting denominators; floored rows are
  // reported, and the run fails once they exceed the given fraction.
  double propensity_floor = 1e-6;
  double floor_error_fraction = 0.01;
  // Fitted ratio denominators below this magnitude are an error (A10 requires
  // nonzero means), never silently clipped.
  double denominator_eps = 1e-8;
};

// Computes estimands over one dataset. Nuisance fits are memoized behind a
// mutex, so concurrent estimate() calls are safe.
class Estimator {
 public:
  explicit Estimator(const CompositeDataset& data, EstimatorConfig cfg = {});

  EstimateReport estimate(const EstimandSpec& spec);
  EstimateReport contrast(const ContrastSpec& spec);

  // Canonical catalog: gamma_1_1, gamma_1_0, gamma_0_2, gamma_0_0, beta, eta,
  // lambda, rho, mu, kappa, zeta, psi, phi, theta, xi, gamma_star_1_1,
  // gamma_star_1_0, gamma_star_0_2, gamma_star_0_0, psi_star, phi_star,
  // rho_star_1, rho_star_2, nu.
  EstimateReport estimate_named(const std::string& name,
                                EstimatorForm form = EstimatorForm::GFormula,
                                Engagement engagement = Engagement::Absent);
  static const std::vector<std::string>& catalog();
  static bool is_contrast(const std::string& name);

  const CompositeDataset& data() const { return data_; }
  const EstimatorConfig& config() const { return cfg_; }

 private:
  const FittedModel& outcome_model(CondSet cond, const RowFilter& filter);
  const FittedModel& propensity_model(const PropensityTarget& target);

  EstimateReport gform(const EstimandSpec& spec);
  EstimateReport pooled_control(const EstimandSpec& spec);
  EstimateReport external_uniform(const EstimandSpec& spec);
  EstimateReport diff_anchor(const EstimandSpec& spec);
  EstimateReport ratio_anchor(const EstimandSpec& spec);
  EstimateReport nested_w(const EstimandSpec& spec);

  double marginalize(const FittedModel& model, int s_target) const;

  // Hajek-weighted mean of `value(row)` over rows matched by `filter`, with
  // weights `weight(row)`; tracks the floored-denominator mass.
  struct WeightAudit {
    double floored_mass = 0.0;
    double total_mass = 0.0;
  };
  double floored(double p, WeightAudit& audit, double mass) const;
  void finish_audit(const WeightAudit& audit, EstimateReport& report) const;

  const CompositeDataset& data_;
  EstimatorConfig cfg_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const FittedModel>> cache_;
};

}  // namespace extcomp
