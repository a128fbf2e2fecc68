#pragma once

// Deterministic experiment sweeps: distortion against collaboration radius on a random geometric
// graph, collaboration-gain grids over (power, network size), and finite-cost topology design
// against the cost scale. Output is CSV plus a JSON sidecar carrying the full sweep spec.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "collab/cumulative.hpp"
#include "collab/designer.hpp"
#include "collab/individual.hpp"
#include "collab/metrics.hpp"
#include "collab/model.hpp"
#include "collab/parallel.hpp"
#include "collab/scenario_io.hpp"

namespace collab {

inline constexpr const char* kSweepSchema = "sweep-v1";
inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

struct SweepRow {
  std::string sweep_var;
  double value = 0.0;
  std::string constraint_type;
  double P_total = 0.0;
  double kappa_M = 0.0;
  double J = 0.0;
  double D = 0.0;
  double D_normalized = 0.0;
  double CG = kNotApplicable;
  Index n_links = 0;  // links beyond the self-links
  double runtime_ms = 0.0;
  Index M = 0;
  double cg_closed_form = kNotApplicable;
  int constraints_active = -1;  // 1 or 0 where defined, -1 otherwise
  Vector per_node_power;
};

struct SweepTable {
  std::string kind;
  Json spec;
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  unsigned threads = 0;         // 0: worker_count()
  bool record_runtime = false;  // wall time per row; off keeps output byte-identical across runs
};

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "sweep_var", "value", "constraint_type", "P_total", "kappa_M",          "J",           "D",
      "D_normalized", "CG", "n_links",       "runtime_ms", "M",       "cg_closed_form", "constraints_active",
      "per_node_power"};
  return cols;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void require_grid(const std::vector<double>& grid, const std::string& name) {
  require(!grid.empty(), ErrorCode::InvalidArgument, name + ": grid must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(std::isfinite(grid[i]), ErrorCode::InvalidArgument, name + ": grid entries must be finite");
    if (i > 0)
      require(grid[i] > grid[i - 1], ErrorCode::InvalidArgument, name + ": grid must be strictly increasing");
  }
}

inline std::vector<double> read_grid(const JsonReader& r) {
  const Vector v = r.vector(-1);
  return {v.data(), v.data() + v.size()};
}

// The stored weights must reproduce the reported J.
inline void revalidate(const OperatorSet& ops, const SolveResult& r, double xi2, const std::string& where) {
  if (r.w.size() == 0) return;
  const double j = ops.fisher_information(r.w, xi2);
  require(std::abs(j - r.J) <= 1e-8 * std::max(1.0, std::abs(r.J)), ErrorCode::NumericalFailure,
          where + ": weights give J = " + fmt_double(j) + " but the solver reported " + fmt_double(r.J));
}

inline double total_power_from_normalized(const HomogeneousSpec& spec, double P_g) {
  return P_g * spec.xi2 / (spec.g0 * spec.g0);
}

template <class Fn>
void timed(SweepRow& row, bool record, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  if (record)
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline std::string method_name(IndividualMethod m) {
  switch (m) {
    case IndividualMethod::Sdr: return "sdr";
    case IndividualMethod::Dual: return "dual";
    case IndividualMethod::Auto: return "auto";
  }
  return "auto";
}

inline IndividualMethod method_from_name(const JsonReader& r) {
  const std::string s = r.string();
  if (s == "sdr") return IndividualMethod::Sdr;
  if (s == "dual") return IndividualMethod::Dual;
  if (s == "auto") return IndividualMethod::Auto;
  r.error("expected sdr, dual or auto");
}

inline bool budgets_spent(const Vector& used, const Vector& budgets) {
  for (Index m = 0; m < budgets.size(); ++m)
    if (used(m) < budgets(m) * (1.0 - 1e-6)) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------- radius sweep

struct RggSweepSpec {
  HomogeneousSpec spec;
  std::vector<double> radii;
  std::vector<double> power_levels;  // normalized total power P g0^2 / xi2
  std::vector<double> kappa_M_levels;
  std::uint64_t seed = kDefaultSeed;
  IndividualMethod method = IndividualMethod::Auto;
};

// 0 followed by count - 1 log-spaced radii from r_min up to sqrt(2).
inline std::vector<double> default_radii(int count = 15, double r_min = 0.05) {
  require(count >= 2, ErrorCode::InvalidArgument, "radius grid needs at least two points");
  std::vector<double> r{0.0};
  const int n = count - 1;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
    r.push_back(i == n - 1 ? kUnitSquareDiameter : r_min * std::pow(kUnitSquareDiameter / r_min, f));
  }
  return r;
}

inline HomogeneousSpec rgg_sweep_network(double eta2) {
  HomogeneousSpec s;
  s.N = 20;
  s.sigma2 = 1.0;
  s.rho = 0.0;
  s.g0 = s.h0 = 1.0;
  s.alpha_g = s.alpha_h = 0.9;
  s.eta2 = eta2;
  s.xi2 = 1.0;
  return s;
}

// Normalized power at which the gain peaks for kappa_M = 0.75.
inline double rgg_reference_power(const HomogeneousSpec& s) {
  return 1.0 / (0.75 * static_cast<double>(s.N)) / (s.alpha_g * std::sqrt(s.alpha_x()));
}

inline RggSweepSpec default_rgg_sweep(double eta2 = 0.1) {
  RggSweepSpec sw;
  sw.spec = rgg_sweep_network(eta2);
  sw.radii = default_radii();
  const double p = rgg_reference_power(sw.spec);
  sw.power_levels = {p / 4.0, p, 4.0 * p};
  sw.kappa_M_levels = {0.5, 0.75, 1.0};
  return sw;
}

inline Json to_json(const RggSweepSpec& s) {
  return Json{{"network", to_json(s.spec)},     {"radii", s.radii},           {"power_levels", s.power_levels},
              {"kappa_M_levels", s.kappa_M_levels}, {"seed", s.seed}, {"method", detail::method_name(s.method)}};
}

inline RggSweepSpec rgg_sweep_from_json(const Json& j) {
  const detail::JsonReader r(j, "spec");
  r.expect_object({"network", "radii", "power_levels", "kappa_M_levels", "seed", "method"});
  RggSweepSpec s;
  s.spec = homogeneous_from_json(r.at("network"));
  s.radii = detail::read_grid(r.at("radii"));
  s.power_levels = detail::read_grid(r.at("power_levels"));
  s.kappa_M_levels = detail::read_grid(r.at("kappa_M_levels"));
  if (r.has("seed")) s.seed = r.at("seed").unsigned_integer();
  if (r.has("method")) s.method = detail::method_from_name(r.at("method"));
  return s;
}

// One row per (P, kappa_M, r), in that nesting order. CG is the share of the range recovered at radius r.
inline SweepTable run_rgg_sweep(const RggSweepSpec& sw, const SweepOptions& opt = {}) {
  validate(sw.spec);
  detail::require_grid(sw.radii, "radii");
  detail::require_grid(sw.power_levels, "power_levels");
  detail::require_grid(sw.kappa_M_levels, "kappa_M_levels");
  for (double p : sw.power_levels) require(p > 0.0, ErrorCode::InvalidArgument, "power_levels must be positive");
  const Index N = sw.spec.N;
  const NetworkScenario s = expand(sw.spec);
  const double eta2 = s.eta2;
  const double D0 = distortion_from_J(homogeneous_infinite_power_limit(sw.spec), eta2);

  struct Job {
    double P, km, r;
  };
  std::vector<Job> jobs;
  for (double p : sw.power_levels)
    for (double km : sw.kappa_M_levels)
      for (double r : sw.radii) jobs.push_back({p, km, r});

  SweepTable table{"rgg", to_json(sw), std::vector<SweepRow>(jobs.size())};
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const Job& job = jobs[i];
        SweepRow& row = table.rows[i];
        detail::timed(row, opt.record_runtime, [&] {
          const double P = detail::total_power_from_normalized(sw.spec, job.P);
          const Vector budgets = budgets_for_skewness(N, kappa_from_normalized(N, job.km), P);
          const RggLayout layout = make_rgg(N, job.r, sw.seed);
          const OperatorSet ops = assemble(s, rgg_topology(layout, N));
          const SolveResult res = solve_individual(ops, budgets, s.xi2, sw.method);
          detail::revalidate(ops, res, s.xi2, "rgg row " + std::to_string(i));
          const double D_dist = distortion_from_J(homogeneous_indiv_distributed_J(sw.spec, budgets), eta2);
          row.sweep_var = "r";
          row.value = job.r;
          row.constraint_type = "individual";
          row.P_total = P;
          row.kappa_M = job.km;
          row.J = res.J;
          row.D = res.D;
          row.D_normalized = normalized_distortion(res.D, D0, eta2);
          row.CG = (D_dist - res.D) / (eta2 - D0);
          row.n_links = ops.L - N;
          row.M = N;
          row.constraints_active = detail::budgets_spent(res.per_node_power, budgets) ? 1 : 0;
          row.per_node_power = res.per_node_power;
        });
      },
      opt.threads == 0 ? worker_count() : opt.threads);
  return table;
}

// ---------------------------------------------------------------- gain grid

enum class KappaMode { FixedKappa, FixedKappaM, Cumulative };

inline std::string kappa_mode_name(KappaMode m) {
  switch (m) {
    case KappaMode::FixedKappa: return "kappa";
    case KappaMode::FixedKappaM: return "kappa_M";
    case KappaMode::Cumulative: return "cumulative";
  }
  return "kappa";
}

struct GainGridSpec {
  HomogeneousSpec spec;             // N is replaced by each entry of M_grid
  std::vector<double> power_grid;   // normalized total power
  std::vector<double> M_grid;       // network sizes (integers)
  KappaMode mode = KappaMode::FixedKappa;
  double kappa_value = 1.0;         // kappa or kappa_M; unused for cumulative
};

inline HomogeneousSpec gain_grid_network() {
  HomogeneousSpec s;
  s.N = 2;
  s.eta2 = 0.5;
  s.sigma2 = 1.0;
  s.rho = 0.1;
  s.g0 = s.h0 = 1.0;
  s.alpha_h = s.alpha_g = 0.9;
  s.xi2 = 1.0;
  return s;
}

inline GainGridSpec default_gain_grid(KappaMode mode = KappaMode::FixedKappa, double kappa_value = 1.0) {
  GainGridSpec g;
  g.spec = gain_grid_network();
  for (int i = 0; i <= 20; ++i) g.power_grid.push_back(std::pow(10.0, -2.0 + 0.25 * i));
  g.M_grid = {2, 5, 10, 20, 50, 100, 200};
  g.mode = mode;
  g.kappa_value = kappa_value;
  return g;
}

inline Json to_json(const GainGridSpec& g) {
  return Json{{"network", to_json(g.spec)},         {"power_grid", g.power_grid}, {"M_grid", g.M_grid},
              {"mode", kappa_mode_name(g.mode)}, {"kappa_value", g.kappa_value}};
}

inline GainGridSpec gain_grid_from_json(const Json& j) {
  const detail::JsonReader r(j, "spec");
  r.expect_object({"network", "power_grid", "M_grid", "mode", "kappa_value"});
  GainGridSpec g;
  g.spec = homogeneous_from_json(r.at("network"));
  g.power_grid = detail::read_grid(r.at("power_grid"));
  g.M_grid = detail::read_grid(r.at("M_grid"));
  const std::string mode = r.at("mode").string();
  if (mode == "kappa") g.mode = KappaMode::FixedKappa;
  else if (mode == "kappa_M") g.mode = KappaMode::FixedKappaM;
  else if (mode == "cumulative") g.mode = KappaMode::Cumulative;
  else r.at("mode").error("expected kappa, kappa_M or cumulative");
  if (r.has("kappa_value")) g.kappa_value = r.at("kappa_value").number();
  return g;
}

// One row per (M, P); J, D and D_normalized describe the connected network. Evaluated without
// forming matrices, so large M stays cheap.
inline SweepTable run_gain_grid(const GainGridSpec& g, const SweepOptions& opt = {}) {
  detail::require_grid(g.power_grid, "power_grid");
  detail::require_grid(g.M_grid, "M_grid");
  for (double m : g.M_grid)
    require(m >= 1.0 && m == std::floor(m), ErrorCode::InvalidArgument, "M_grid entries must be positive integers");
  for (double p : g.power_grid) require(p > 0.0, ErrorCode::InvalidArgument, "power_grid must be positive");
  if (g.mode == KappaMode::FixedKappaM)
    require(g.kappa_value >= 0.0 && g.kappa_value <= 1.0, ErrorCode::InvalidArgument, "kappa_M must lie in [0, 1]");
  if (g.mode == KappaMode::FixedKappa)
    require(g.kappa_value >= 1.0 && g.kappa_value <= g.M_grid.front(), ErrorCode::InvalidArgument,
            "kappa must lie in [1, smallest M]");

  struct Job {
    Index M;
    double P;
  };
  std::vector<Job> jobs;
  for (double m : g.M_grid)
    for (double p : g.power_grid) jobs.push_back({static_cast<Index>(m), p});

  SweepTable table{"gain-grid", to_json(g), std::vector<SweepRow>(jobs.size())};
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const Job& job = jobs[i];
        SweepRow& row = table.rows[i];
        detail::timed(row, opt.record_runtime, [&] {
          HomogeneousSpec spec = g.spec;
          spec.N = job.M;
          spec.K = 1;
          validate(spec);
          const double P = detail::total_power_from_normalized(spec, job.P);
          row.sweep_var = "P";
          row.value = job.P;
          row.P_total = P;
          row.M = job.M;
          row.n_links = job.M * (job.M - 1);
          GainReport rep;
          if (g.mode == KappaMode::Cumulative) {
            rep = homogeneous_gain(spec, PowerConstraint::cumulative(P));
            row.constraint_type = "cumulative";
            row.cg_closed_form = cg_formula(spec, P, static_cast<double>(job.M));
            row.constraints_active = 1;
          } else {
            const double kappa = g.mode == KappaMode::FixedKappa ? g.kappa_value
                                                                 : kappa_from_normalized(job.M, g.kappa_value);
            const Vector budgets = budgets_for_skewness(job.M, kappa, P);
            rep = homogeneous_gain(spec, PowerConstraint::individual({budgets.data(), budgets.data() + job.M}));
            const ClosedFormGain cf = cg_closed_form(spec, budgets);
            row.constraint_type = "individual";
            row.cg_closed_form = cf.CG;
            row.constraints_active = cf.active ? 1 : 0;
          }
          row.kappa_M = rep.kappa_M;
          row.D = rep.D_conn;
          row.J = J_from_distortion(rep.D_conn, rep.eta2);
          row.D_normalized = normalized_distortion(rep.D_conn, rep.D0, rep.eta2);
          row.CG = rep.CG;
        });
      },
      opt.threads == 0 ? worker_count() : opt.threads);
  return table;
}

// ---------------------------------------------------------------- cost sweep

struct CostSweepSpec {
  HomogeneousSpec spec;
  std::vector<double> c0_grid;
  std::vector<double> power_levels;    // normalized total power
  std::vector<double> kappa_M_levels;  // individual-constraint curves only
  bool individual = true;
  bool cumulative = true;
  std::uint64_t seed = kDefaultSeed;
  double delta = 1e-4;
  IndividualMethod method = IndividualMethod::Dual;
};

inline HomogeneousSpec cost_sweep_network() {
  HomogeneousSpec s = rgg_sweep_network(0.5);
  s.N = 10;
  return s;
}

inline CostSweepSpec default_cost_sweep() {
  CostSweepSpec c;
  c.spec = cost_sweep_network();
  for (int i = 0; i <= 16; ++i) c.c0_grid.push_back(std::pow(10.0, -4.0 + 0.5 * i));
  c.power_levels = {1.0, 3.0};
  c.kappa_M_levels = {0.5, 0.75};
  return c;
}

inline Json to_json(const CostSweepSpec& c) {
  return Json{{"network", to_json(c.spec)},
              {"c0_grid", c.c0_grid},
              {"power_levels", c.power_levels},
              {"kappa_M_levels", c.kappa_M_levels},
              {"individual", c.individual},
              {"cumulative", c.cumulative},
              {"seed", c.seed},
              {"delta", c.delta},
              {"method", detail::method_name(c.method)}};
}

inline CostSweepSpec cost_sweep_from_json(const Json& j) {
  const detail::JsonReader r(j, "spec");
  r.expect_object({"network", "c0_grid", "power_levels", "kappa_M_levels", "individual", "cumulative", "seed",
                   "delta", "method"});
  CostSweepSpec c;
  c.spec = homogeneous_from_json(r.at("network"));
  c.c0_grid = detail::read_grid(r.at("c0_grid"));
  c.power_levels = detail::read_grid(r.at("power_levels"));
  if (r.has("kappa_M_levels")) c.kappa_M_levels = detail::read_grid(r.at("kappa_M_levels"));
  for (const char* key : {"individual", "cumulative"}) {
    if (!r.has(key)) continue;
    if (!r.at(key).raw().is_boolean()) r.at(key).error("expected true or false");
    (std::string(key) == "individual" ? c.individual : c.cumulative) = r.at(key).raw().get<bool>();
  }
  if (r.has("seed")) c.seed = r.at("seed").unsigned_integer();
  if (r.has("delta")) c.delta = r.at("delta").number();
  if (r.has("method")) c.method = detail::method_from_name(r.at("method"));
  return c;
}

// Node positions are drawn once from the seed; links cost c0 d^2. Individual rows come first,
// nested (P, kappa_M, c0), then cumulative rows nested (P, c0). n_links counts the links the
// designer committed.
inline SweepTable run_cost_sweep(const CostSweepSpec& c, const SweepOptions& opt = {}) {
  validate(c.spec);
  detail::require_grid(c.c0_grid, "c0_grid");
  detail::require_grid(c.power_levels, "power_levels");
  if (c.individual) detail::require_grid(c.kappa_M_levels, "kappa_M_levels");
  for (double v : c.c0_grid) require(v >= 0.0, ErrorCode::InvalidArgument, "c0_grid must be nonnegative");
  for (double p : c.power_levels) require(p > 0.0, ErrorCode::InvalidArgument, "power_levels must be positive");
  require(c.individual || c.cumulative, ErrorCode::InvalidArgument, "enable individual or cumulative rows");
  const Index N = c.spec.N;
  const NetworkScenario s = expand(c.spec);
  const RggLayout layout = make_rgg(N, kUnitSquareDiameter, c.seed);

  struct Job {
    bool cumulative;
    double P, km, c0;
  };
  std::vector<Job> jobs;
  if (c.individual)
    for (double p : c.power_levels)
      for (double km : c.kappa_M_levels)
        for (double c0 : c.c0_grid) jobs.push_back({false, p, km, c0});
  if (c.cumulative)
    for (double p : c.power_levels)
      for (double c0 : c.c0_grid) jobs.push_back({true, p, 1.0, c0});

  DesignOptions dopt;
  dopt.delta = c.delta;
  dopt.method = c.method;
  dopt.threads = 1;

  SweepTable table{"cost", to_json(c), std::vector<SweepRow>(jobs.size())};
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const Job& job = jobs[i];
        SweepRow& row = table.rows[i];
        detail::timed(row, opt.record_runtime, [&] {
          const double P = detail::total_power_from_normalized(c.spec, job.P);
          const Matrix cost = quadratic_cost(layout, job.c0);
          const DesignTrace tr =
              job.cumulative ? design_cumulative(s, cost, P, dopt)
                             : design_individual(s, cost, budgets_for_skewness(N, kappa_from_normalized(N, job.km), P),
                                                 dopt);
          detail::revalidate(assemble(s, tr.final_topology), tr.final_result, s.xi2,
                             "cost row " + std::to_string(i));
          row.sweep_var = "c0";
          row.value = job.c0;
          row.constraint_type = job.cumulative ? "cumulative" : "individual";
          row.P_total = P;
          row.kappa_M = job.km;
          row.J = tr.J_final();
          row.D = tr.D_final();
          row.D_normalized = normalized_distortion(row.D, tr.D0, tr.eta2);
          row.n_links = static_cast<Index>(tr.steps.size());
          row.M = N;
          row.per_node_power = tr.final_result.per_node_power;
        });
      },
      opt.threads == 0 ? worker_count() : opt.threads);
  return table;
}

// ---------------------------------------------------------------- output

inline void write_csv(std::ostream& out, const SweepTable& t) {
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : t.rows) {
    std::string powers;
    for (Index m = 0; m < r.per_node_power.size(); ++m)
      powers += (m ? ";" : "") + detail::fmt_double(r.per_node_power(m));
    out << r.sweep_var << "," << detail::fmt_double(r.value) << "," << r.constraint_type << ","
        << detail::fmt_double(r.P_total) << "," << detail::fmt_double(r.kappa_M) << "," << detail::fmt_double(r.J)
        << "," << detail::fmt_double(r.D) << "," << detail::fmt_double(r.D_normalized) << ","
        << detail::fmt_double(r.CG) << "," << r.n_links << "," << detail::fmt_double(r.runtime_ms) << "," << r.M
        << "," << detail::fmt_double(r.cg_closed_form) << ","
        << (r.constraints_active < 0 ? std::string() : std::to_string(r.constraints_active)) << "," << powers
        << "\n";
  }
}

inline Json sweep_sidecar(const SweepTable& t) {
  return Json{{"schema", kSweepSchema},
              {"kind", t.kind},
              {"columns", sweep_columns()},
              {"row_count", t.rows.size()},
              {"spec", t.spec}};
}

// Writes <path> and <path>.json.
inline void write_sweep(const SweepTable& t, const std::string& csv_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  require(csv.good(), ErrorCode::InvalidArgument, csv_path + ": cannot open for writing");
  write_csv(csv, t);
  std::ofstream side(csv_path + ".json", std::ios::binary);
  require(side.good(), ErrorCode::InvalidArgument, csv_path + ".json: cannot open for writing");
  side << sweep_sidecar(t).dump(2) << "\n";
}

}  // namespace collab
