// extcomp: batch front door for estimation, simulation, falsification,
// coverage studies, and dataset diagnostics. One JSON config per run; a few
// scalar flags may override config fields so manifests stay reproducible.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "extcomp/dgp.hpp"
#include "extcomp/diagnostics.hpp"
#include "extcomp/estimators.hpp"
#include "extcomp/inference.hpp"
#include "extcomp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace extcomp;

namespace {

constexpr const char* kVersion = "1.0.0";

struct RunConfig {
  json raw = json::object();
  std::string data_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t bootstrap_b = 0;  // 0 disables interval computation
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec,
                "config '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

EstimatorForm parse_form(const std::string& s) {
  if (s == "gformula") return EstimatorForm::GFormula;
  if (s == "ipw") return EstimatorForm::Ipw;
  throw Error(ErrorKind::InvalidSpec, "unknown estimator_form '" + s + "'");
}

Engagement parse_engagement(const std::string& s) {
  if (s == "absent") return Engagement::Absent;
  if (s == "joint_intervention") return Engagement::JointIntervention;
  throw Error(ErrorKind::InvalidSpec,
              "unknown engagement_interpretation '" + s + "'");
}

Strategy parse_strategy(const std::string& s) {
  if (s == "pom_gform") return Strategy::Gform;
  if (s == "pom_pooled_control") return Strategy::PooledControl;
  if (s == "pom_external_uniform") return Strategy::ExternalUniform;
  if (s == "pom_diff_anchor") return Strategy::DiffAnchor;
  if (s == "pom_ratio_anchor") return Strategy::RatioAnchor;
  if (s == "pom_nested_w") return Strategy::NestedW;
  throw Error(ErrorKind::InvalidSpec, "unknown strategy '" + s + "'");
}

EstimandSpec parse_estimand_spec(const json& j, EstimatorForm form,
                                 Engagement eng) {
  EstimandSpec spec;
  spec.strategy = parse_strategy(j.at("strategy").get<std::string>());
  spec.source = j.value("source", 1);
  spec.treatment = j.value("treatment", 1);
  spec.s_target = j.value("s_target", 1);
  spec.anchor_treatment = j.value("anchor_treatment", 0);
  spec.ratio_source = j.value("ratio_source", 0);
  spec.engagement =
      j.contains("engagement") ? parse_engagement(j["engagement"]) : eng;
  spec.form = j.contains("form") ? parse_form(j["form"]) : form;
  spec.id = j.value("id", std::string());
  return spec;
}

// One requested estimand: a catalog name, a strategy object, or a contrast of
// two strategy objects.
struct EstimandRequest {
  std::string label;
  EstimateFn fn;
};

EstimandRequest parse_request(const json& entry, const EstimatorConfig& cfg,
                              EstimatorForm form, Engagement eng) {
  if (entry.is_string()) {
    std::string name = entry.get<std::string>();
    return {name, [name, cfg, form, eng](const CompositeDataset& d) {
              Estimator est(d, cfg);
              return est.estimate_named(name, form, eng);
            }};
  }
  if (!entry.is_object())
    throw Error(ErrorKind::InvalidSpec,
                "estimand entries must be catalog names or objects");
  if (entry.contains("left")) {
    ContrastSpec cspec;
    cspec.left = parse_estimand_spec(entry.at("left"), form, eng);
    cspec.right = parse_estimand_spec(entry.at("right"), form, eng);
    cspec.id = entry.value("id", std::string());
    std::string label = cspec.id.empty() ? "contrast" : cspec.id;
    return {label, [cspec, cfg](const CompositeDataset& d) {
              Estimator est(d, cfg);
              return est.contrast(cspec);
            }};
  }
  EstimandSpec spec = parse_estimand_spec(entry, form, eng);
  std::string label = spec.id.empty() ? to_string(spec.strategy) : spec.id;
  return {label, [spec, cfg](const CompositeDataset& d) {
            Estimator est(d, cfg);
            return est.estimate(spec);
          }};
}

ScenarioSpec resolve_scenario(const json& raw) {
  const json& s = raw.at("scenario");
  if (s.is_string()) {
    std::string name = s.get<std::string>();
    if (fs::exists(name)) return load_scenario(name);
    return builtin_scenario(name);
  }
  if (s.is_object() && s.contains("file"))
    return load_scenario(s["file"].get<std::string>());
  throw Error(ErrorKind::InvalidSpec,
              "scenario must be a built-in name or {\"file\": path}");
}

CsvOptions csv_options(const json& raw) {
  CsvOptions opts;
  if (!raw.contains("csv")) return opts;
  const json& c = raw["csv"];
  if (c.contains("outcome_kind"))
    opts.outcome_kind = c["outcome_kind"] == "continuous" ? OutcomeKind::Continuous
                                                          : OutcomeKind::Binary;
  if (c.contains("treatment_sets")) {
    std::map<int, std::set<int>> sets;
    for (auto& [k, v] : c["treatment_sets"].items())
      sets[std::stoi(k)] = v.get<std::set<int>>();
    opts.treatment_sets = sets;
  }
  if (c.contains("continuous_columns"))
    opts.continuous_columns = c["continuous_columns"].get<std::set<std::string>>();
  return opts;
}

CompositeDataset resolve_dataset(const RunConfig& cfg) {
  if (!cfg.data_path.empty()) {
    if (!fs::exists(cfg.data_path))
      throw Error(ErrorKind::Io, "input file '" + cfg.data_path + "' does not exist");
    return load_csv(cfg.data_path, csv_options(cfg.raw));
  }
  if (cfg.raw.contains("scenario")) {
    ScenarioSpec spec = resolve_scenario(cfg.raw);
    std::size_t n = cfg.raw.value("n", 10000);
    return sample(spec, n, cfg.seed);
  }
  throw Error(ErrorKind::InvalidSpec, "no --data path and no scenario in config");
}

EstimatorConfig estimator_config(const json& raw) {
  EstimatorConfig cfg;
  if (!raw.contains("estimator")) return cfg;
  const json& e = raw["estimator"];
  auto family = [](const std::string& s) {
    if (s == "auto") return Family::Auto;
    if (s == "saturated") return Family::Saturated;
    if (s == "linear") return Family::Linear;
    if (s == "logistic") return Family::Logistic;
    throw Error(ErrorKind::InvalidSpec, "unknown family '" + s + "'");
  };
  if (e.contains("outcome_family")) cfg.outcome_family = family(e["outcome_family"]);
  if (e.contains("propensity_family"))
    cfg.propensity_family = family(e["propensity_family"]);
  cfg.propensity_floor = e.value("propensity_floor", cfg.propensity_floor);
  cfg.floor_error_fraction =
      e.value("floor_error_fraction", cfg.floor_error_fraction);
  cfg.fit.irls_tol = e.value("irls_tol", cfg.fit.irls_tol);
  cfg.fit.irls_max_iter = e.value("irls_max_iter", cfg.fit.irls_max_iter);
  cfg.fit.min_cell_rows = e.value("min_cell_rows", cfg.fit.min_cell_rows);
  return cfg;
}

BootstrapSpec bootstrap_spec(const RunConfig& cfg) {
  BootstrapSpec spec;
  spec.replicates = cfg.bootstrap_b;
  spec.seed = CounterRng::derive(cfg.seed, 0x626F6F74ULL);  // independent stream
  spec.threads = cfg.threads;
  if (cfg.raw.contains("bootstrap")) {
    const json& b = cfg.raw["bootstrap"];
    spec.level = b.value("level", spec.level);
    spec.max_failure_fraction =
        b.value("max_failure_fraction", spec.max_failure_fraction);
    if (b.value("method", "percentile") == std::string("normal"))
      spec.method = BootstrapSpec::Interval::Normal;
  }
  return spec;
}

FalsifyOptions falsify_options(const json& raw) {
  FalsifyOptions opts;
  if (!raw.contains("falsify")) return opts;
  const json& f = raw["falsify"];
  opts.control_treatment = f.value("control_treatment", opts.control_treatment);
  opts.std_threshold = f.value("std_threshold", opts.std_threshold);
  opts.abs_margin = f.value("abs_margin", opts.abs_margin);
  opts.margin_min_rows = f.value("margin_min_rows", opts.margin_min_rows);
  return opts;
}

void write_manifest(const RunConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["config"] = cfg.raw;
  m["data"] = cfg.data_path;
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  m["bootstrap_replicates"] = cfg.bootstrap_b;
  m["version"] = kVersion;
  std::ofstream out(fs::path(cfg.out_dir) / "manifest.json");
  out << m.dump(2) << "\n";
}

void write_text(const RunConfig& cfg, const std::string& text) {
  std::ofstream out(fs::path(cfg.out_dir) / "summary.txt");
  out << text;
}

bool wants_shared_control_check(const EstimateReport& r) {
  for (const auto& a : r.assumptions)
    if (a == "A4" || a == "A6" || a == "A6'") return true;
  return false;
}

int cmd_estimate(const RunConfig& cfg) {
  CompositeDataset data = resolve_dataset(cfg);
  if (!cfg.raw.contains("estimands") || cfg.raw["estimands"].empty())
    throw Error(ErrorKind::InvalidSpec, "estimate requires a non-empty estimand list");

  EstimatorConfig ecfg = estimator_config(cfg.raw);
  EstimatorForm form = parse_form(cfg.raw.value("estimator_form", "gformula"));
  Engagement eng =
      parse_engagement(cfg.raw.value("engagement_interpretation", "absent"));

  // Lazily run the shared-control check once; attach it to every estimand
  // whose identification leans on A4 or A6.
  std::optional<json> falsification;
  bool falsification_failed = false;
  auto shared_control_json = [&]() -> std::optional<json> {
    if (!falsification && !falsification_failed) {
      try {
        falsification = falsification_test(data, falsify_options(cfg.raw)).to_json();
      } catch (const Error&) {
        falsification_failed = true;
      }
    }
    return falsification;
  };

  std::ofstream report_out(fs::path(cfg.out_dir) / "report.jsonl");
  std::ostringstream summary;
  summary << std::left << std::setw(16) << "estimand" << std::right
          << std::setw(12) << "point" << std::setw(22) << "interval"
          << std::setw(10) << "form" << std::setw(6) << "prop" << "\n";

  bool any_failed = false;
  for (const json& entry : cfg.raw["estimands"]) {
    EstimandRequest req = parse_request(entry, ecfg, form, eng);
    json line;
    try {
      EstimateReport report;
      if (cfg.bootstrap_b >= 2) {
        report = bootstrap(data, req.fn, bootstrap_spec(cfg)).report;
      } else {
        report = req.fn(data);
      }
      line = report.to_json();
      if (wants_shared_control_check(report)) {
        if (auto f = shared_control_json()) line["falsification"] = *f;
        else line["warnings"].push_back("shared-control check not computable");
      }
      std::ostringstream ci;
      if (report.interval)
        ci << "[" << std::setprecision(4) << std::fixed << report.interval->first
           << ", " << report.interval->second << "]";
      else
        ci << "-";
      summary << std::left << std::setw(16) << report.estimand_id << std::right
              << std::setw(12) << std::fixed << std::setprecision(6)
              << report.point << std::setw(22) << ci.str() << std::setw(10)
              << report.estimator_form << std::setw(6) << report.proposition
              << "\n";
    } catch (const Error& e) {
      any_failed = true;
      line = {{"estimand_id", req.label},
              {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
      summary << std::left << std::setw(16) << req.label << "  FAILED: "
              << e.what() << "\n";
    }
    report_out << line.dump() << "\n";
  }

  write_text(cfg, summary.str());
  write_manifest(cfg, "estimate");
  std::cout << summary.str();
  return any_failed ? 2 : 0;
}

int cmd_simulate(const RunConfig& cfg) {
  ScenarioSpec spec = resolve_scenario(cfg.raw);
  std::size_t n = cfg.raw.value("n", 10000);
  CompositeDataset data = sample(spec, n, cfg.seed);
  fs::path csv = fs::path(cfg.out_dir) / "sample.csv";
  write_csv(data, csv.string());

  ConditionFlags flags = check_conditions(spec);
  TruthTable truths = truth_table(spec);

  std::ofstream report_out(fs::path(cfg.out_dir) / "report.jsonl");
  report_out << json{{"scenario", spec.name},
                     {"n", n},
                     {"csv", csv.string()},
                     {"condition_flags", flags.to_json()},
                     {"truth_table", truths}}
                    .dump()
             << "\n";

  std::ostringstream summary;
  summary << "scenario " << spec.name << ", n=" << n << " -> " << csv.string()
          << "\ncondition flags: " << flags.to_json().dump()
          << "\ntruths:\n";
  for (const auto& [label, value] : truths)
    summary << "  " << std::left << std::setw(16) << label << std::fixed
            << std::setprecision(6) << value << "\n";
  write_text(cfg, summary.str());
  write_manifest(cfg, "simulate");
  std::cout << summary.str();
  return 0;
}

int cmd_falsify(const RunConfig& cfg) {
  CompositeDataset data = resolve_dataset(cfg);
  FalsificationReport report = falsification_test(data, falsify_options(cfg.raw));
  std::ofstream report_out(fs::path(cfg.out_dir) / "report.jsonl");
  report_out << report.to_json().dump() << "\n";
  write_text(cfg, report.to_text());
  write_manifest(cfg, "falsify");
  std::cout << report.to_text();
  return report.violated ? 3 : 0;
}

int cmd_diagnose(const RunConfig& cfg) {
  CompositeDataset data = resolve_dataset(cfg);
  std::vector<std::string> conditions = {"A3", "A5", "A8"};
  if (cfg.raw.contains("positivity_conditions"))
    conditions = cfg.raw["positivity_conditions"].get<std::vector<std::string>>();
  PositivityReport positivity = positivity_audit(data, conditions);

  std::ostringstream summary;
  std::ofstream report_out(fs::path(cfg.out_dir) / "report.jsonl");
  report_out << positivity.to_json().dump() << "\n";
  summary << positivity.to_text();

  if (data.sources().count(0)) {
    SupportReport support = common_support(data, 1, 0);
    json support_j = {{"shared", support.shared.size()},
                      {"trial_only", support.unique_to_a.size()},
                      {"external_only", support.unique_to_b.size()}};
    report_out << json{{"common_support", support_j}}.dump() << "\n";
    summary << "common support s=1 vs s=0: " << support.shared.size()
            << " shared cell(s), " << support.unique_to_a.size()
            << " trial-only, " << support.unique_to_b.size()
            << " external-only\n";
    try {
      FalsificationReport fals = falsification_test(data, falsify_options(cfg.raw));
      report_out << fals.to_json().dump() << "\n";
      summary << fals.to_text();
    } catch (const Error& e) {
      summary << "shared-control check skipped: " << e.what() << "\n";
    }
  }

  write_text(cfg, summary.str());
  write_manifest(cfg, "diagnose");
  std::cout << summary.str();
  return 0;
}

int cmd_coverage(const RunConfig& cfg) {
  ScenarioSpec spec = resolve_scenario(cfg.raw);
  if (!cfg.raw.contains("estimands") || cfg.raw["estimands"].empty())
    throw Error(ErrorKind::InvalidSpec, "coverage requires a non-empty estimand list");
  std::vector<std::string> names;
  for (const json& e : cfg.raw["estimands"]) {
    if (!e.is_string())
      throw Error(ErrorKind::InvalidSpec,
                  "coverage estimands must be catalog names (truth lookup)");
    names.push_back(e.get<std::string>());
  }

  std::size_t n = cfg.raw.value("n", 2000);
  std::size_t outer = cfg.raw.value("replicates", 300);
  std::size_t b = cfg.bootstrap_b >= 2 ? cfg.bootstrap_b : 1000;
  EstimatorConfig ecfg = estimator_config(cfg.raw);
  EstimatorForm form = parse_form(cfg.raw.value("estimator_form", "gformula"));
  Engagement eng =
      parse_engagement(cfg.raw.value("engagement_interpretation", "absent"));

  struct Acc {
    double truth = 0, sum_err = 0, sum_sq = 0;
    std::size_t covered = 0, done = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& name : names) acc[name].truth = true_estimand(spec, name);

  for (std::size_t r = 0; r < outer; ++r) {
    CompositeDataset data = sample(spec, n, CounterRng::derive(cfg.seed, r));
    for (const auto& name : names) {
      EstimateFn fn = [&name, &ecfg, form, eng](const CompositeDataset& d) {
        Estimator est(d, ecfg);
        return est.estimate_named(name, form, eng);
      };
      BootstrapSpec bspec = bootstrap_spec(cfg);
      bspec.replicates = b;
      bspec.seed = CounterRng::derive(cfg.seed ^ 0x5DEECE66DULL, r);
      EstimateReport rep = bootstrap(data, fn, bspec).report;
      Acc& a = acc[name];
      double err = rep.point - a.truth;
      a.sum_err += err;
      a.sum_sq += err * err;
      if (rep.interval && rep.interval->first <= a.truth &&
          a.truth <= rep.interval->second)
        ++a.covered;
      ++a.done;
    }
  }

  std::ofstream report_out(fs::path(cfg.out_dir) / "report.jsonl");
  std::ostringstream summary;
  summary << "coverage study: " << spec.name << ", n=" << n << ", R=" << outer
          << ", B=" << b << "\n";
  summary << std::left << std::setw(16) << "estimand" << std::right
          << std::setw(12) << "truth" << std::setw(12) << "bias"
          << std::setw(12) << "rmse" << std::setw(12) << "coverage" << "\n";
  for (const auto& [name, a] : acc) {
    double bias = a.sum_err / static_cast<double>(a.done);
    double rmse = std::sqrt(a.sum_sq / static_cast<double>(a.done));
    double coverage = static_cast<double>(a.covered) / static_cast<double>(a.done);
    report_out << json{{"estimand_id", name}, {"truth", a.truth},
                       {"bias", bias},        {"rmse", rmse},
                       {"coverage", coverage}, {"replicates", a.done},
                       {"n", n},              {"bootstrap", b}}
                      .dump()
               << "\n";
    summary << std::left << std::setw(16) << name << std::right << std::fixed
            << std::setprecision(6) << std::setw(12) << a.truth
            << std::setw(12) << bias << std::setw(12) << rmse << std::setw(12)
            << std::setprecision(3) << coverage << "\n";
  }
  write_text(cfg, summary.str());
  write_manifest(cfg, "coverage");
  std::cout << summary.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"composite trial + external data estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t bootstrap_b = 0;
  bool seed_set = false, threads_set = false, boot_set = false;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--data", data_path, "input dataset CSV");
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads");
  auto* boot_opt = app.add_option("--bootstrap", bootstrap_b,
                                  "bootstrap replicates (0 disables)");

  auto* estimate = app.add_subcommand("estimate", "run the estimand list");
  auto* simulate = app.add_subcommand("simulate", "sample a scenario to CSV");
  auto* falsify = app.add_subcommand("falsify", "shared-control restriction check");
  auto* coverage = app.add_subcommand("coverage", "Monte Carlo bias/coverage study");
  auto* diagnose = app.add_subcommand("diagnose", "positivity and support audits");

  // Global flags may appear after the subcommand name.
  for (auto* sub : {estimate, simulate, falsify, coverage, diagnose})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
    seed_set = seed_opt->count() > 0;
    threads_set = threads_opt->count() > 0;
    boot_set = boot_opt->count() > 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.raw = load_json(config_path);
    cfg.data_path = !data_path.empty() ? data_path : cfg.raw.value("data", "");
    cfg.out_dir = !out_dir.empty() ? out_dir : cfg.raw.value("out", ".");
    cfg.seed = seed_set ? seed : cfg.raw.value("seed", 0ULL);
    cfg.threads = threads_set ? threads : cfg.raw.value("threads", 1);
    cfg.bootstrap_b =
        boot_set ? bootstrap_b
                 : (cfg.raw.contains("bootstrap")
                        ? cfg.raw["bootstrap"].value("replicates", std::size_t{0})
                        : std::size_t{0});
    fs::create_directories(cfg.out_dir);

    if (*estimate) return cmd_estimate(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*falsify) return cmd_falsify(cfg);
    if (*coverage) return cmd_coverage(cfg);
    if (*diagnose) return cmd_diagnose(cfg);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Io:
      case ErrorKind::InvalidSpec:
      case ErrorKind::MissingColumn:
      case ErrorKind::NonNumericCell:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
