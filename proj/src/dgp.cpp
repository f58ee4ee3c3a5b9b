#include "extcomp/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "extcomp/rng.hpp"

namespace extcomp {

namespace {

constexpr double kTableTol = 1e-12;

std::string cell_key(const Cell& c) {
  std::ostringstream out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out << ";";
    out << c[i];
  }
  return out.str();
}

Cell parse_cell(const std::string& s) {
  Cell out;
  std::istringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';'))
    if (!part.empty()) out.push_back(std::stod(part));
  return out;
}

std::string po_key(const Cell& c, int a) {
  return cell_key(c) + "|" + std::to_string(a);
}

std::pair<Cell, int> parse_po_key(const std::string& s) {
  auto bar = s.rfind('|');
  return {parse_cell(s.substr(0, bar)), std::stoi(s.substr(bar + 1))};
}

Cell concat(const Cell& x, const Cell& w) {
  Cell out = x;
  out.insert(out.end(), w.begin(), w.end());
  return out;
}

void check_sums_to_one(double total, const std::string& what) {
  if (std::abs(total - 1.0) > kTableTol)
    throw Error(ErrorKind::InvalidSpec, what + " sums to " + std::to_string(total));
}

}  // namespace

std::set<int> ScenarioSpec::sources() const {
  std::set<int> out;
  for (const auto& [s, p] : source_probs)
    if (p > 0) out.insert(s);
  return out;
}

void ScenarioSpec::validate() const {
  double share = 0;
  for (const auto& [s, p] : source_probs) {
    if (p < 0) throw Error(ErrorKind::InvalidSpec, "negative source share");
    share += p;
  }
  check_sums_to_one(share, "source_probs");
  if (!source_probs.count(1) || source_probs.at(1) <= 0)
    throw Error(ErrorKind::InvalidSpec, "scenario must include an index trial (s=1)");

  for (int s : sources()) {
    if (!x_law.count(s))
      throw Error(ErrorKind::InvalidSpec, "missing covariate law for s=" + std::to_string(s));
    double t = 0;
    for (const auto& [cell, p] : x_law.at(s)) {
      if (cell.size() != x_cols.size())
        throw Error(ErrorKind::InvalidSpec, "covariate cell arity mismatch");
      t += p;
    }
    check_sums_to_one(t, "x_law[s=" + std::to_string(s) + "]");

    if (covariates_only.count(s)) continue;
    if (!treatment_law.count(s))
      throw Error(ErrorKind::InvalidSpec, "missing treatment law for s=" + std::to_string(s));
    for (const auto& [cell, table] : treatment_law.at(s)) {
      double ta = 0;
      for (const auto& [a, p] : table) {
        if (!treatment_sets.count(s) || !treatment_sets.at(s).count(a))
          throw Error(ErrorKind::TreatmentOutsideDeclaredSet,
                      "treatment law for s=" + std::to_string(s) +
                          " assigns mass to undeclared treatment " + std::to_string(a));
        ta += p;
      }
      check_sums_to_one(ta, "treatment_law[s=" + std::to_string(s) + "]");
    }
  }

  if (has_w()) {
    for (const auto& [x, table] : w_law) {
      double t = 0;
      for (const auto& [w, p] : table) t += p;
      check_sums_to_one(t, "w_law[x=" + cell_key(x) + "]");
    }
  }

  for (const auto& [s_int, table] : po_mean_x)
    for (const auto& [key, m] : table)
      if (outcome_kind == OutcomeKind::Binary && (m < 0.0 || m > 1.0))
        throw Error(ErrorKind::InvalidSpec, "binary po_mean outside [0,1]");

  // When the external source carries an (x,w)-level table it must agree with
  // the X-level table after marginalizing W.
  if (!po_mean_xw.empty()) {
    for (const auto& [s_int, table_xw] : po_mean_xw) {
      if (!po_mean_x.count(s_int)) continue;
      const auto& table_x = po_mean_x.at(s_int);
      for (const auto& [x, wtab] : w_law) {
        std::map<int, double> marginal;
        std::map<int, double> mass;
        for (const auto& [w, pw] : wtab) {
          Cell xw = concat(x, w);
          for (const auto& [key, m] : table_xw) {
            if (key.first != xw) continue;
            marginal[key.second] += pw * m;
            mass[key.second] += pw;
          }
        }
        for (const auto& [a, m] : marginal) {
          if (std::abs(mass.at(a) - 1.0) > kTableTol) continue;  // partial table
          auto it = table_x.find({x, a});
          if (it != table_x.end() && std::abs(it->second - m) > 1e-9)
            throw Error(ErrorKind::InvalidSpec,
                        "po_mean_xw does not marginalize to po_mean_x at x=" +
                            cell_key(x) + ", a=" + std::to_string(a));
        }
      }
    }
  }
}

nlohmann::json ScenarioSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  for (const auto& [s, p] : source_probs) j["source_probs"][std::to_string(s)] = p;
  j["x_cols"] = nlohmann::json::array();
  for (const auto& c : x_cols) j["x_cols"].push_back({{"name", c.name}, {"categorical", c.categorical}});
  j["w_cols"] = nlohmann::json::array();
  for (const auto& c : w_cols) j["w_cols"].push_back({{"name", c.name}, {"categorical", c.categorical}});
  for (const auto& [s, table] : x_law)
    for (const auto& [cell, p] : table)
      j["x_law"][std::to_string(s)][cell_key(cell)] = p;
  for (const auto& [x, table] : w_law)
    for (const auto& [w, p] : table)
      j["w_law"][cell_key(x)][cell_key(w)] = p;
  for (const auto& [s, set] : treatment_sets)
    j["treatment_sets"][std::to_string(s)] = set;
  for (const auto& [s, laws] : treatment_law)
    for (const auto& [cell, table] : laws)
      for (const auto& [a, p] : table)
        j["treatment_law"][std::to_string(s)][cell_key(cell)][std::to_string(a)] = p;
  for (const auto& [s_int, table] : po_mean_x)
    for (const auto& [key, m] : table)
      j["po_mean_x"][std::to_string(s_int)][po_key(key.first, key.second)] = m;
  for (const auto& [s_int, table] : po_mean_xw)
    for (const auto& [key, m] : table)
      j["po_mean_xw"][std::to_string(s_int)][po_key(key.first, key.second)] = m;
  j["outcome_kind"] = outcome_kind == OutcomeKind::Binary ? "binary" : "continuous";
  j["noise_sigma"] = noise_sigma;
  j["covariates_only"] = covariates_only;
  return j;
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json& j) {
  ScenarioSpec spec;
  spec.name = j.value("name", "");
  for (const auto& [k, v] : j.at("source_probs").items())
    spec.source_probs[std::stoi(k)] = v.get<double>();
  for (const auto& c : j.at("x_cols"))
    spec.x_cols.push_back({c.at("name").get<std::string>(), c.value("categorical", true)});
  if (j.contains("w_cols"))
    for (const auto& c : j.at("w_cols"))
      spec.w_cols.push_back({c.at("name").get<std::string>(), c.value("categorical", true)});
  for (const auto& [s, table] : j.at("x_law").items())
    for (const auto& [cell, p] : table.items())
      spec.x_law[std::stoi(s)][parse_cell(cell)] = p.get<double>();
  if (j.contains("w_law"))
    for (const auto& [x, table] : j.at("w_law").items())
      for (const auto& [w, p] : table.items())
        spec.w_law[parse_cell(x)][parse_cell(w)] = p.get<double>();
  for (const auto& [s, arr] : j.at("treatment_sets").items())
    for (const auto& a : arr) spec.treatment_sets[std::stoi(s)].insert(a.get<int>());
  if (j.contains("treatment_law"))
    for (const auto& [s, laws] : j.at("treatment_law").items())
      for (const auto& [cell, table] : laws.items())
        for (const auto& [a, p] : table.items())
          spec.treatment_law[std::stoi(s)][parse_cell(cell)][std::stoi(a)] = p.get<double>();
  for (const auto& [s_int, table] : j.at("po_mean_x").items())
    for (const auto& [key, m] : table.items()) {
      auto [cell, a] = parse_po_key(key);
      spec.po_mean_x[std::stoi(s_int)][{cell, a}] = m.get<double>();
    }
  if (j.contains("po_mean_xw"))
    for (const auto& [s_int, table] : j.at("po_mean_xw").items())
      for (const auto& [key, m] : table.items()) {
        auto [cell, a] = parse_po_key(key);
        spec.po_mean_xw[std::stoi(s_int)][{cell, a}] = m.get<double>();
      }
  spec.outcome_kind = j.value("outcome_kind", std::string("binary")) == "binary"
                          ? OutcomeKind::Binary
                          : OutcomeKind::Continuous;
  spec.noise_sigma = j.value("noise_sigma", 1.0);
  if (j.contains("covariates_only"))
    for (const auto& s : j.at("covariates_only")) spec.covariates_only.insert(s.get<int>());
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open scenario '" + path + "'");
  nlohmann::json j;
  in >> j;
  return ScenarioSpec::from_json(j);
}

nlohmann::json ConditionFlags::to_json() const {
  return {
      {"engagement_absent", engagement_absent},
      {"mean_transport", mean_transport},
      {"diff_transport", diff_transport},
      {"ratio_transport", ratio_transport},
      {"no_interaction_diff", no_interaction_diff},
      {"no_interaction_ratio", no_interaction_ratio},
      {"uniform_external", uniform_external},
      {"external_exchangeable", external_exchangeable},
      {"positivity", positivity},
  };
}

namespace {

bool close(double a, double b) { return std::abs(a - b) <= kTableTol; }

// Entries shared by both s_intervened tables: (x, a) -> (m under s=1, m under s=0).
std::vector<std::pair<double, double>> shared_entries(const ScenarioSpec& spec,
                                                      std::vector<std::pair<Cell, int>>* keys = nullptr) {
  std::vector<std::pair<double, double>> out;
  if (!spec.po_mean_x.count(1) || !spec.po_mean_x.count(0)) return out;
  const auto& t1 = spec.po_mean_x.at(1);
  const auto& t0 = spec.po_mean_x.at(0);
  for (const auto& [key, m1] : t1) {
    auto it = t0.find(key);
    if (it == t0.end()) continue;
    out.push_back({m1, it->second});
    if (keys) keys->push_back(key);
  }
  return out;
}

}  // namespace

ConditionFlags check_conditions(const ScenarioSpec& spec) {
  spec.validate();
  ConditionFlags flags;

  // Engagement absence: the po_mean table does not depend on s_intervened.
  flags.engagement_absent = true;
  const auto first = spec.po_mean_x.begin();
  for (const auto& [s_int, table] : spec.po_mean_x)
    for (const auto& [key, m] : table) {
      auto it = first->second.find(key);
      if (it == first->second.end() || !close(m, it->second))
        flags.engagement_absent = false;
    }

  // A4: equality of potential-outcome means across s_intervened, restricted
  // to the treatments adopted in the external source.
  flags.mean_transport = spec.po_mean_x.count(0) && spec.po_mean_x.count(1);
  if (flags.mean_transport && spec.treatment_sets.count(0)) {
    for (int a : spec.treatment_sets.at(0))
      for (const auto& [x, px] : spec.x_law.at(1)) {
        auto k = std::make_pair(x, a);
        const auto& t1 = spec.po_mean_x.at(1);
        const auto& t0 = spec.po_mean_x.at(0);
        if (!t1.count(k) || !t0.count(k) || !close(t1.at(k), t0.at(k)))
          flags.mean_transport = false;
      }
  }

  // A9/A10 and A11/A11': pairwise differences (ratios) of the shared table
  // entries within each covariate cell agree across s_intervened.
  std::vector<std::pair<Cell, int>> keys;
  auto shared = shared_entries(spec, &keys);
  flags.diff_transport = !shared.empty();
  flags.ratio_transport = !shared.empty();
  for (std::size_t i = 0; i < shared.size(); ++i)
    for (std::size_t j = i + 1; j < shared.size(); ++j) {
      if (keys[i].first != keys[j].first) continue;  // same covariate cell only
      auto [m1i, m0i] = shared[i];
      auto [m1j, m0j] = shared[j];
      if (!close(m1i - m1j, m0i - m0j)) flags.diff_transport = false;
      if (std::abs(m1j) > kTableTol && std::abs(m0j) > kTableTol) {
        if (!close(m1i / m1j, m0i / m0j)) flags.ratio_transport = false;
      } else {
        flags.ratio_transport = false;
      }
    }
  // In this table parametrization the no-causal-interaction conditions reduce
  // to the same finite equality checks as effect-measure transport.
  flags.no_interaction_diff = flags.diff_transport;
  flags.no_interaction_ratio = flags.ratio_transport;

  // A6/A6': one treatment takes all the mass at every external covariate cell,
  // and it is the same treatment everywhere.
  if (spec.treatment_law.count(0)) {
    flags.uniform_external = true;
    std::optional<int> uniform_a;
    for (const auto& [cell, table] : spec.treatment_law.at(0))
      for (const auto& [a, p] : table) {
        if (p <= kTableTol) continue;
        if (!close(p, 1.0)) flags.uniform_external = false;
        if (uniform_a && *uniform_a != a) flags.uniform_external = false;
        uniform_a = a;
      }
  }

  // A7 given X alone: E[Y^a|x, S=0] equals the observed conditional mean
  // E[Y|x, S=0, A=a] once W is marginalized out.
  flags.external_exchangeable = true;
  if (spec.has_w() && spec.po_mean_xw.count(0) && spec.treatment_law.count(0)) {
    const auto& table = spec.po_mean_xw.at(0);
    for (const auto& [x, wtab] : spec.w_law) {
      for (int a : spec.treatment_sets.at(0)) {
        double po = 0, obs_num = 0, obs_den = 0;
        bool complete = true;
        for (const auto& [w, pw] : wtab) {
          Cell xw = concat(x, w);
          auto mit = table.find({xw, a});
          auto lit = spec.treatment_law.at(0).find(xw);
          if (mit == table.end() || lit == spec.treatment_law.at(0).end()) {
            complete = false;
            break;
          }
          double pa = lit->second.count(a) ? lit->second.at(a) : 0.0;
          po += pw * mit->second;
          obs_num += pw * pa * mit->second;
          obs_den += pw * pa;
        }
        if (complete && obs_den > kTableTol && !close(po, obs_num / obs_den))
          flags.external_exchangeable = false;
      }
    }
  }

  // Positivity: A3 over declared trial treatments, A5 common support, A8 over
  // declared external treatments.
  flags.positivity = true;
  for (const auto& [x, px] : spec.x_law.at(1)) {
    if (px <= 0) continue;
    if (spec.treatment_sets.count(1))
      for (int a : spec.treatment_sets.at(1)) {
        const auto& law = spec.treatment_law.at(1);
        auto it = law.find(x);
        if (it == law.end() || !it->second.count(a) || it->second.at(a) <= kTableTol)
          flags.positivity = false;  // A3
      }
    if (spec.x_law.count(0)) {
      auto it = spec.x_law.at(0).find(x);
      if (it == spec.x_law.at(0).end() || it->second <= kTableTol)
        flags.positivity = false;  // A5
    }
  }
  if (spec.treatment_law.count(0) && spec.treatment_sets.count(0)) {
    for (const auto& [cell, table] : spec.treatment_law.at(0))
      for (int a : spec.treatment_sets.at(0))
        if (!table.count(a) || table.at(a) <= kTableTol)
          flags.positivity = false;  // A8
  }
  return flags;
}

namespace {

// E[Y^{s=1,a} | S = s_target] by exact enumeration.
double pom_truth(const ScenarioSpec& spec, int a, int s_target) {
  if (!spec.x_law.count(s_target))
    throw Error(ErrorKind::InvalidSpec,
                "scenario has no source s=" + std::to_string(s_target));
  const auto& table = spec.po_mean_x.at(1);
  double out = 0;
  for (const auto& [x, px] : spec.x_law.at(s_target)) {
    auto it = table.find({x, a});
    if (it == table.end())
      throw Error(ErrorKind::InvalidSpec,
                  "po_mean lacks entry for x=" + cell_key(x) + ", a=" + std::to_string(a));
    out += px * it->second;
  }
  return out;
}

struct LabelTarget {
  int kind;       // 0: POM, 1: contrast
  int a = 1, a2 = 0;
  int s_target = 1;
};

const std::map<std::string, LabelTarget>& label_targets() {
  static const std::map<std::string, LabelTarget> table = {
      {"gamma_1_1", {0, 1, 0, 1}},      {"gamma_1_0", {0, 0, 0, 1}},
      {"gamma_0_0", {0, 0, 0, 1}},      {"beta", {0, 0, 0, 1}},
      {"gamma_0_2", {0, 2, 0, 1}},      {"eta", {0, 2, 0, 1}},
      {"lambda", {0, 2, 0, 1}},         {"rho", {0, 2, 0, 1}},
      {"mu", {0, 2, 0, 1}},             {"kappa", {1, 1, 0, 1}},
      {"zeta", {1, 1, 2, 1}},           {"psi", {1, 1, 2, 1}},
      {"phi", {1, 1, 2, 1}},            {"theta", {1, 1, 2, 1}},
      {"xi", {1, 1, 2, 1}},             {"gamma_star_1_1", {0, 1, 0, 2}},
      {"gamma_star_0_2", {0, 2, 0, 2}}, {"rho_star_1", {0, 1, 0, 2}},
      {"gamma_star_1_0", {0, 0, 0, 2}}, {"gamma_star_0_0", {0, 0, 0, 2}},
      {"rho_star_2", {0, 2, 0, 2}},     {"psi_star", {1, 1, 2, 2}},
      {"phi_star", {1, 1, 2, 2}},       {"nu", {1, 1, 2, 2}},
  };
  return table;
}

}  // namespace

double true_estimand(const ScenarioSpec& spec, const std::string& label) {
  auto it = label_targets().find(label);
  if (it == label_targets().end())
    throw Error(ErrorKind::InvalidSpec, "unknown estimand label '" + label + "'");
  const LabelTarget& t = it->second;
  if (t.kind == 0) return pom_truth(spec, t.a, t.s_target);
  return pom_truth(spec, t.a, t.s_target) - pom_truth(spec, t.a2, t.s_target);
}

TruthTable truth_table(const ScenarioSpec& spec) {
  TruthTable out;
  for (const auto& [label, target] : label_targets()) {
    try {
      out[label] = true_estimand(spec, label);
    } catch (const Error&) {
      // label not supported by this scenario's tables
    }
  }
  return out;
}

CompositeDataset sample(const ScenarioSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "sample size must be >= 1");
  spec.validate();
  CounterRng rng(seed);

  CompositeDataset data;
  data.schema.x_cols = spec.x_cols;
  data.schema.w_cols = spec.w_cols;
  data.treatment_sets = spec.treatment_sets;
  data.outcome_kind = spec.outcome_kind;

  // Flatten probability tables into cumulative form for sampling.
  std::vector<int> src;
  std::vector<double> src_cum;
  double acc = 0;
  for (const auto& [s, p] : spec.source_probs) {
    src.push_back(s);
    acc += p;
    src_cum.push_back(acc);
  }

  data.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ObservationRecord rec;
    rec.s = src[rng.categorical(src_cum)];

    const auto& xtab = spec.x_law.at(rec.s);
    double u = rng.next_double(), cx = 0;
    for (const auto& [x, p] : xtab) {
      cx += p;
      rec.x = x;
      if (u < cx) break;
    }

    bool use_w = rec.s == 0 && spec.has_w();
    if (use_w) {
      const auto& wtab = spec.w_law.at(rec.x);
      double uw = rng.next_double(), cw = 0;
      for (const auto& [w, p] : wtab) {
        cw += p;
        rec.w = w;
        if (uw < cw) break;
      }
    }

    if (spec.covariates_only.count(rec.s)) {
      rec.has_treatment = false;
      rec.has_outcome = false;
      data.records.push_back(std::move(rec));
      continue;
    }

    Cell law_cell = use_w ? concat(rec.x, rec.w) : rec.x;
    const auto& atab = spec.treatment_law.at(rec.s).at(law_cell);
    double ua = rng.next_double(), ca = 0;
    for (const auto& [a, p] : atab) {
      ca += p;
      rec.a = a;
      if (ua < ca) break;
    }

    double mean;
    if (use_w && spec.po_mean_xw.count(rec.s)) {
      mean = spec.po_mean_xw.at(rec.s).at({law_cell, rec.a});
    } else {
      mean = spec.po_mean_x.at(rec.s).at({rec.x, rec.a});
    }
    if (spec.outcome_kind == OutcomeKind::Binary)
      rec.y = rng.bernoulli(mean) ? 1.0 : 0.0;
    else
      rec.y = mean + spec.noise_sigma * rng.normal();
    data.records.push_back(std::move(rec));
  }

  data.validate();
  return data;
}

CompositeDataset population_dataset(const ScenarioSpec& spec) {
  spec.validate();
  CompositeDataset data;
  data.schema.x_cols = spec.x_cols;
  data.schema.w_cols = spec.w_cols;
  data.treatment_sets = spec.treatment_sets;
  data.outcome_kind = spec.outcome_kind;

  for (const auto& [s, share] : spec.source_probs) {
    if (share <= 0) continue;
    for (const auto& [x, px] : spec.x_law.at(s)) {
      if (px <= 0) continue;
      if (spec.covariates_only.count(s)) {
        ObservationRecord rec;
        rec.s = s;
        rec.x = x;
        rec.has_treatment = false;
        rec.has_outcome = false;
        rec.weight = share * px;
        data.records.push_back(std::move(rec));
        continue;
      }
      bool use_w = s == 0 && spec.has_w();
      std::vector<std::pair<Cell, double>> w_cells;  // (w, prob); empty W otherwise
      if (use_w)
        for (const auto& [w, pw] : spec.w_law.at(x)) w_cells.push_back({w, pw});
      else
        w_cells.push_back({{}, 1.0});

      for (const auto& [w, pw] : w_cells) {
        if (pw <= 0) continue;
        Cell law_cell = use_w ? concat(x, w) : x;
        for (const auto& [a, pa] : spec.treatment_law.at(s).at(law_cell)) {
          if (pa <= 0) continue;
          ObservationRecord rec;
          rec.s = s;
          rec.x = x;
          rec.w = w;
          rec.a = a;
          if (use_w && spec.po_mean_xw.count(s))
            rec.y = spec.po_mean_xw.at(s).at({law_cell, a});
          else
            rec.y = spec.po_mean_x.at(s).at({x, a});
          rec.weight = share * px * pw * pa;
          data.records.push_back(std::move(rec));
        }
      }
    }
  }
  // Cell masses are not 0/1 outcomes; mark continuous so validation passes.
  data.outcome_kind = OutcomeKind::Continuous;
  data.validate();
  return data;
}

namespace {

ScenarioSpec base_dgp_a() {
  ScenarioSpec spec;
  spec.name = "dgp-a";
  spec.source_probs = {{0, 0.5}, {1, 0.5}};
  spec.x_cols = {{"x_1", true}};
  spec.x_law[1] = {{{0}, 0.7}, {{1}, 0.3}};
  spec.x_law[0] = {{{0}, 0.4}, {{1}, 0.6}};
  spec.treatment_sets = {{1, {0, 1}}, {0, {0, 2}}};
  spec.treatment_law[1] = {{{0}, {{0, 0.5}, {1, 0.5}}}, {{1}, {{0, 0.5}, {1, 0.5}}}};
  spec.treatment_law[0] = {{{0}, {{0, 0.6}, {2, 0.4}}}, {{1}, {{0, 0.3}, {2, 0.7}}}};
  std::map<std::pair<Cell, int>, double> m = {
      {{{0}, 1}, 0.7}, {{{1}, 1}, 0.5}, {{{0}, 0}, 0.4},
      {{{1}, 0}, 0.2}, {{{0}, 2}, 0.6}, {{{1}, 2}, 0.35},
  };
  spec.po_mean_x[0] = m;
  spec.po_mean_x[1] = m;
  return spec;
}

}  // namespace

ScenarioSpec builtin_scenario(const std::string& name) {
  if (name == "dgp-a") {
    auto spec = base_dgp_a();
    spec.validate();
    return spec;
  }
  if (name == "dgp-a6") {
    auto spec = base_dgp_a();
    spec.name = "dgp-a6";
    spec.treatment_sets[0] = {0};
    spec.treatment_law[0] = {{{0}, {{0, 1.0}}}, {{1}, {{0, 1.0}}}};
    spec.validate();
    return spec;
  }
  if (name == "dgp-b") {
    auto spec = base_dgp_a();
    spec.name = "dgp-b";
    spec.treatment_sets[0] = {2};
    spec.treatment_law[0] = {{{0}, {{2, 1.0}}}, {{1}, {{2, 1.0}}}};
    spec.validate();
    return spec;
  }
  if (name == "dgp-c") {
    auto spec = base_dgp_a();
    spec.name = "dgp-c";
    for (auto& [key, m] : spec.po_mean_x[0]) m -= 0.05;
    spec.validate();
    return spec;
  }
  if (name == "dgp-d") {
    auto spec = base_dgp_a();
    spec.name = "dgp-d";
    spec.source_probs = {{0, 0.4}, {1, 0.4}, {2, 0.2}};
    spec.x_law[2] = {{{0}, 0.5}, {{1}, 0.5}};
    spec.treatment_sets[2] = {0};
    spec.treatment_law[2] = {{{0}, {{0, 1.0}}}, {{1}, {{0, 1.0}}}};
    spec.po_mean_x[2] = spec.po_mean_x[1];
    spec.validate();
    return spec;
  }
  if (name == "dgp-w") {
    auto spec = base_dgp_a();
    spec.name = "dgp-w";
    spec.w_cols = {{"w_1", true}};
    spec.w_law = {{{0}, {{{0}, 0.5}, {{1}, 0.5}}}, {{1}, {{{0}, 0.5}, {{1}, 0.5}}}};
    // Assignment and outcomes both depend on W inside the external source;
    // the (x,w) tables marginalize back to the dgp-a X-level values.
    spec.treatment_law[0] = {
        {{0, 0}, {{0, 0.7}, {2, 0.3}}},
        {{0, 1}, {{0, 0.5}, {2, 0.5}}},
        {{1, 0}, {{0, 0.4}, {2, 0.6}}},
        {{1, 1}, {{0, 0.2}, {2, 0.8}}},
    };
    std::map<std::pair<Cell, int>, double> mw = {
        {{{0, 0}, 2}, 0.5}, {{{0, 1}, 2}, 0.7}, {{{1, 0}, 2}, 0.25}, {{{1, 1}, 2}, 0.45},
        {{{0, 0}, 0}, 0.3}, {{{0, 1}, 0}, 0.5}, {{{1, 0}, 0}, 0.1},  {{{1, 1}, 0}, 0.3},
    };
    spec.po_mean_xw[0] = mw;
    spec.po_mean_xw[1] = mw;
    spec.validate();
    return spec;
  }
  throw Error(ErrorKind::InvalidSpec, "unknown built-in scenario '" + name + "'");
}

std::vector<std::string> builtin_scenario_names() {
  return {"dgp-a", "dgp-a6", "dgp-b", "dgp-c", "dgp-d", "dgp-w"};
}

}  // namespace extcomp
