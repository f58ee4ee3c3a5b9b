// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Tolerances and runtime budgets are pinned here on purpose.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "extcomp/dgp.hpp"
#include "extcomp/diagnostics.hpp"
#include "extcomp/estimators.hpp"
#include "extcomp/inference.hpp"
#include "extcomp/rng.hpp"

namespace fs = std::filesystem;
using namespace extcomp;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 20260823ULL;

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EstimatorConfig saturated_config() {
  EstimatorConfig cfg;
  cfg.outcome_family = Family::Saturated;
  cfg.propensity_family = Family::Saturated;
  return cfg;
}

std::vector<std::string> applicable(const std::string& scenario) {
  if (scenario == "dgp-a" || scenario == "dgp-c")
    return {"gamma_1_1", "gamma_1_0", "gamma_0_2", "gamma_0_0",
            "lambda",    "rho",       "psi",       "phi",      "theta"};
  if (scenario == "dgp-a6") return {"gamma_1_1", "gamma_1_0", "beta", "kappa"};
  if (scenario == "dgp-b") return {"gamma_1_1", "gamma_0_2", "eta", "psi", "zeta"};
  if (scenario == "dgp-d")
    return {"gamma_1_1", "gamma_0_2", "psi",
            "gamma_star_1_1", "gamma_star_1_0", "gamma_star_0_2",
            "psi_star", "phi_star", "rho_star_1", "rho_star_2", "nu"};
  if (scenario == "dgp-w") return {"gamma_1_1", "mu", "xi"};
  return {};
}

// Labels whose identifying conditions fail by construction under dgp-c; the
// anchoring criterion below checks their bias explicitly instead.
bool biased_by_design(const std::string& scenario, const std::string& label) {
  if (scenario == "dgp-c")
    return label == "gamma_0_2" || label == "gamma_0_0" || label == "psi" ||
           label == "rho" || label == "theta";
  return false;
}

struct Line {
  bool pass;
  std::string detail;
};

void emit(int number, const std::string& title, const Line& line) {
  std::cout << (line.pass ? "[PASS]" : "[FAIL]") << " criterion " << number
            << " (" << title << "): " << line.detail << "\n"
            << std::flush;
}

Line oracle_identity() {
  auto start = Clock::now();
  // Each named estimand exercises one identification result; populations are
  // exact, so the plug-in must match the oracle to numerical noise.
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"dgp-a", "gamma_1_1"},  {"dgp-a6", "beta"},      {"dgp-b", "eta"},
      {"dgp-a", "gamma_0_2"},  {"dgp-a", "lambda"},     {"dgp-a", "rho"},
      {"dgp-w", "mu"},         {"dgp-d", "gamma_star_1_1"},
      {"dgp-d", "gamma_star_0_2"}, {"dgp-d", "psi_star"}, {"dgp-d", "phi_star"},
      {"dgp-d", "rho_star_1"}, {"dgp-d", "rho_star_2"}, {"dgp-d", "nu"}};
  double worst = 0;
  for (const auto& [scenario, label] : cases) {
    ScenarioSpec spec = builtin_scenario(scenario);
    CompositeDataset pop = population_dataset(spec);
    Estimator est(pop, saturated_config());
    double err =
        std::abs(est.estimate_named(label).point - true_estimand(spec, label));
    worst = std::max(worst, err);
  }
  double secs = elapsed_s(start);
  std::ostringstream d;
  d << cases.size() << " identities, max |error| = " << worst << ", "
    << secs << " s";
  return {worst <= 1e-10 && secs < 1.0, d.str()};
}

Line finite_sample() {
  auto start = Clock::now();
  double worst = 0;
  std::string worst_at;
  for (const auto& scenario : builtin_scenario_names()) {
    ScenarioSpec spec = builtin_scenario(scenario);
    CompositeDataset data = sample(spec, 100000, CounterRng::derive(kSeed, 2));
    Estimator est(data);
    for (const auto& label : applicable(scenario)) {
      if (biased_by_design(scenario, label)) continue;
      double err =
          std::abs(est.estimate_named(label).point - true_estimand(spec, label));
      if (err > worst) {
        worst = err;
        worst_at = scenario + "/" + label;
      }
    }
  }
  double secs = elapsed_s(start);
  std::ostringstream d;
  d << "n=100000, max |error| = " << worst << " at " << worst_at << ", "
    << secs << " s";
  return {worst <= 0.02 && secs < 30.0, d.str()};
}

Line anchoring_contrast() {
  ScenarioSpec spec = builtin_scenario("dgp-c");
  CompositeDataset pop = population_dataset(spec);
  Estimator est(pop, saturated_config());
  double psi_bias =
      est.estimate_named("psi").point - true_estimand(spec, "psi");
  double phi_bias =
      est.estimate_named("phi").point - true_estimand(spec, "phi");
  // The external-arm mean is shifted by -0.05, so the unanchored contrast
  // carries a |0.05| bias which difference-anchoring removes exactly.
  bool pass = std::abs(std::abs(psi_bias) - 0.05) <= 1e-10 &&
              std::abs(phi_bias) <= 1e-10;
  std::ostringstream d;
  d << "population psi bias = " << psi_bias << ", phi bias = " << phi_bias;
  return {pass, d.str()};
}

Line form_equivalence() {
  double worst = 0;
  for (const auto& scenario : builtin_scenario_names()) {
    ScenarioSpec spec = builtin_scenario(scenario);
    for (bool finite : {false, true}) {
      CompositeDataset data =
          finite ? sample(spec, 20000, CounterRng::derive(kSeed, 4))
                 : population_dataset(spec);
      Estimator est(data, saturated_config());
      for (const auto& label : applicable(scenario)) {
        double g = est.estimate_named(label, EstimatorForm::GFormula).point;
        double w = est.estimate_named(label, EstimatorForm::Ipw).point;
        worst = std::max(worst, std::abs(g - w));
      }
    }
  }
  std::ostringstream d;
  d << "all strategies, populations and samples, max |gform - ipw| = " << worst;
  return {worst <= 1e-10, d.str()};
}

Line falsification_power() {
  auto start = Clock::now();
  constexpr std::size_t reps = 200;
  std::size_t consistent_a = 0, violated_c = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    CompositeDataset a =
        sample(builtin_scenario("dgp-a"), 100000, CounterRng::derive(kSeed, r));
    if (!falsification_test(a).violated) ++consistent_a;
    CompositeDataset c =
        sample(builtin_scenario("dgp-c"), 100000, CounterRng::derive(kSeed, r));
    if (falsification_test(c).violated) ++violated_c;
  }
  double secs = elapsed_s(start);
  std::ostringstream d;
  d << "200 replicates at n=100000: consistent on dgp-a " << consistent_a
    << "/200, violated on dgp-c " << violated_c << "/200, " << secs << " s";
  return {consistent_a >= 198 && violated_c >= 198 && secs < 300.0, d.str()};
}

Line bootstrap_coverage() {
  auto start = Clock::now();
  constexpr std::size_t outer = 300;
  constexpr std::size_t b = 1000;
  constexpr std::size_t n = 2000;
  ScenarioSpec spec = builtin_scenario("dgp-a");
  const double truth_g11 = true_estimand(spec, "gamma_1_1");
  const double truth_psi = true_estimand(spec, "psi");
  std::atomic<std::size_t> next{0}, covered_g11{0}, covered_psi{0};

  auto worker = [&]() {
    EstimatorConfig cfg = saturated_config();
    for (std::size_t r = next.fetch_add(1); r < outer; r = next.fetch_add(1)) {
      CompositeDataset data = sample(spec, n, CounterRng::derive(kSeed, 100 + r));
      std::uint64_t boot_seed = CounterRng::derive(kSeed ^ 0xB001ULL, r);
      std::vector<double> g11, psi;
      g11.reserve(b);
      psi.reserve(b);
      for (std::size_t i = 0; i < b; ++i) {
        CompositeDataset res = resample_within_source(data, boot_seed, i);
        Estimator est(res, cfg);
        // One estimator per resample so the trial-arm fit is shared between
        // the POM and the contrast.
        g11.push_back(est.estimate_named("gamma_1_1").point);
        psi.push_back(est.estimate_named("psi").point);
      }
      std::sort(g11.begin(), g11.end());
      std::sort(psi.begin(), psi.end());
      if (sorted_quantile(g11, 0.025) <= truth_g11 &&
          truth_g11 <= sorted_quantile(g11, 0.975))
        ++covered_g11;
      if (sorted_quantile(psi, 0.025) <= truth_psi &&
          truth_psi <= sorted_quantile(psi, 0.975))
        ++covered_psi;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  double cov_g11 = static_cast<double>(covered_g11) / outer;
  double cov_psi = static_cast<double>(covered_psi) / outer;
  double secs = elapsed_s(start);
  std::ostringstream d;
  d << "300 x B=1000 at n=2000: coverage gamma_1_1 = " << cov_g11
    << ", psi = " << cov_psi << ", " << secs << " s";
  bool pass = cov_g11 >= 0.93 && cov_g11 <= 0.97 && cov_psi >= 0.93 &&
              cov_psi <= 0.97 && secs < 900.0;
  return {pass, d.str()};
}

Line engagement_neutrality() {
  CompositeDataset data =
      sample(builtin_scenario("dgp-a"), 20000, CounterRng::derive(kSeed, 7));
  Estimator est(data);
  bool pass = true;
  std::ostringstream d;
  for (const std::string label : {"lambda", "phi", "rho", "theta"}) {
    EstimateReport absent =
        est.estimate_named(label, EstimatorForm::GFormula, Engagement::Absent);
    EstimateReport joint = est.estimate_named(label, EstimatorForm::GFormula,
                                              Engagement::JointIntervention);
    // Bit-identical numbers; only the stated conditions and result move.
    pass = pass && absent.point == joint.point &&
           absent.assumptions != joint.assumptions &&
           absent.proposition != joint.proposition;
    d << label << " " << (absent.point == joint.point ? "==" : "!=") << " ";
  }
  d << "points bit-identical, assumption lists differ";
  return {pass, d.str()};
}

Line reproducibility() {
  fs::path dir = fs::temp_directory_path() / "extcomp_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path cfg_path = dir / "run.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"scenario":"dgp-a","n":2000,"estimands":["gamma_1_1","psi"],)"
        << R"("bootstrap":{"replicates":100}})";
  }
  auto run = [&](const std::string& out) {
    std::string cmd = std::string(CLI_BIN_PATH) + " estimate --config " +
                      cfg_path.string() + " --out " + (dir / out).string() +
                      " --seed 7 > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  auto slurp = [&](const std::string& out) {
    std::ifstream in(dir / out / "report.jsonl", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  if (run("r1") != 0 || run("r2") != 0)
    return {false, "CLI run failed"};
  std::string a = slurp("r1"), b = slurp("r2");
  std::ostringstream d;
  d << "two runs, report.jsonl " << a.size() << " bytes, "
    << (a == b ? "identical" : "DIFFER");
  return {a == b && !a.empty(), d.str()};
}

}  // namespace

int main() {
  int failures = 0;
  auto check = [&](int number, const std::string& title, Line line) {
    emit(number, title, line);
    if (!line.pass) ++failures;
  };
  check(1, "oracle identity suite", oracle_identity());
  check(2, "finite-sample consistency", finite_sample());
  check(3, "anchoring-correction contrast", anchoring_contrast());
  check(4, "g-formula/weighting equivalence", form_equivalence());
  check(5, "falsification operating characteristics", falsification_power());
  check(6, "bootstrap coverage", bootstrap_coverage());
  check(7, "engagement-flag neutrality", engagement_neutrality());
  check(8, "byte-identical reruns", reproducibility());
  std::cout << (failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " ("
            << (8 - failures) << "/8)\n";
  return failures;
}
