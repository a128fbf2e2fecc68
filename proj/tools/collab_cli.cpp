// Command-line front end: binds scenario files to the solvers, the designer and the sweeps.
// Exit codes: 0 success, 1 validation error or bad usage, 2 solver failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "collab/collab.hpp"

namespace {

using namespace collab;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

struct Flags {
  std::string scenario;
  std::string constraint;
  std::optional<double> power;
  std::string budgets;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method = "auto";
  std::string kind = "homogeneous";
  bool validate_only = false;
  bool timing = false;
  std::vector<std::string> overrides;
};

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void invalid(const std::string& what) { throw ValidationFailure(what); }

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f.good()) invalid(out + ": cannot open for writing");
  f << text;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      invalid(flag + ": '" + item + "' is not a number");
    }
  }
  if (v.empty()) invalid(flag + ": empty list");
  return v;
}

IndividualMethod parse_method(const std::string& m) {
  if (m == "auto") return IndividualMethod::Auto;
  if (m == "sdr") return IndividualMethod::Sdr;
  if (m == "dual") return IndividualMethod::Dual;
  invalid("--method: expected auto, sdr or dual");
}

Json load_document(const Flags& fl) {
  if (fl.scenario.empty()) invalid("--scenario is required");
  Json doc = read_json_file(fl.scenario);
  for (const auto& o : fl.overrides) apply_override(doc, o);
  if (fl.seed) apply_override(doc, "rgg.seed=" + std::to_string(*fl.seed));
  return doc;
}

// Flags win over the scenario's own constraint; `forced` pins the kind for the solve verbs.
PowerConstraint resolve_constraint(const ScenarioFile& f, const Flags& fl, std::optional<PowerConstraint::Kind> forced,
                                   Index expected_budgets) {
  std::optional<PowerConstraint::Kind> kind = forced;
  if (!fl.constraint.empty()) {
    const auto k = fl.constraint == "cumulative"   ? PowerConstraint::Kind::Cumulative
                   : fl.constraint == "individual" ? PowerConstraint::Kind::Individual
                                                   : (invalid("--constraint: expected cumulative or individual"),
                                                      PowerConstraint::Kind::Cumulative);
    if (kind && *kind != k) invalid("--constraint conflicts with the verb");
    kind = k;
  }
  if (!kind) {
    if (fl.power) kind = PowerConstraint::Kind::Cumulative;
    else if (!fl.budgets.empty()) kind = PowerConstraint::Kind::Individual;
    else if (f.constraint) kind = f.constraint->kind;
    else invalid("no power constraint: pass --power or --budgets, or add constraint to the scenario");
  }
  if (*kind == PowerConstraint::Kind::Cumulative) {
    if (!fl.budgets.empty()) invalid("--budgets: not used by a cumulative constraint");
    if (fl.power) return PowerConstraint::cumulative(*fl.power);
    if (f.constraint && f.constraint->is_cumulative()) return *f.constraint;
    invalid("cumulative constraint needs --power or constraint.power in the scenario");
  }
  if (fl.power) invalid("--power: not used by an individual constraint");
  PowerConstraint c;
  if (!fl.budgets.empty()) c = PowerConstraint::individual(parse_list(fl.budgets, "--budgets"));
  else if (f.constraint && !f.constraint->is_cumulative()) c = *f.constraint;
  else invalid("individual constraint needs --budgets or constraint.budgets in the scenario");
  if (static_cast<Index>(c.budgets.size()) != expected_budgets)
    invalid("budgets: expected " + std::to_string(expected_budgets) + " entries, got " +
            std::to_string(c.budgets.size()));
  return c;
}

Json result_json(const SolveResult& r) {
  Json W = Json::array();
  for (Index i = 0; i < r.W.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < r.W.cols(); ++j) row.push_back(r.W(i, j));
    W.push_back(row);
  }
  return Json{{"J", r.J},
              {"D", r.D},
              {"total_power", r.total_power},
              {"per_node_power", std::vector<double>(r.per_node_power.data(),
                                                     r.per_node_power.data() + r.per_node_power.size())},
              {"W", W},
              {"method", r.method},
              {"diagnostics",
               {{"iterations", r.diag.iterations}, {"rank_ratio", r.diag.rank_ratio}, {"gap", r.diag.gap}}}};
}

int finish(const Json& j, const Flags& fl) {
  emit(j.dump(2) + "\n", fl.out);
  return kExitOk;
}

int validated(const ScenarioFile& f) {
  f.resolve_topology();
  if (f.cost) f.cost_matrix();
  std::cout << "valid\n";
  return kExitOk;
}

int run_solve(const Flags& fl, PowerConstraint::Kind kind) {
  const ScenarioFile f = scenario_from_json(load_document(fl));
  const CollaborationTopology topo = f.resolve_topology();
  const PowerConstraint c = resolve_constraint(f, fl, kind, f.M());
  if (fl.validate_only) return validated(f);
  const NetworkScenario s = f.scenario();
  const OperatorSet ops = assemble(s, topo);
  const SolveResult r =
      c.is_cumulative()
          ? solve_cumulative(ops, c.total, s.xi2)
          : solve_individual(ops, Eigen::Map<const Vector>(c.budgets.data(), s.M), s.xi2, parse_method(fl.method));
  Json j = result_json(r);
  j["constraint"] = to_json(c);
  j["topology"] = topology_kind_name(f.topology.kind);
  return finish(j, fl);
}

int run_design(const Flags& fl) {
  const ScenarioFile f = scenario_from_json(load_document(fl));
  if (!f.cost) invalid("cost: design needs link costs in the scenario");
  const PowerConstraint c = resolve_constraint(f, fl, std::nullopt, f.N());
  DesignOptions opt;
  if (fl.delta) opt.delta = *fl.delta;
  opt.method = fl.method == "auto" ? IndividualMethod::Dual : parse_method(fl.method);
  const Matrix cost = f.cost_matrix();
  if (fl.validate_only) return validated(f);
  const NetworkScenario s = f.scenario();
  const DesignTrace tr = c.is_cumulative()
                             ? design_cumulative(s, cost, c.total, opt)
                             : design_individual(s, cost, Eigen::Map<const Vector>(c.budgets.data(), s.N), opt);
  Json steps = Json::array();
  for (const auto& st : tr.steps)
    steps.push_back({{"m", st.m}, {"n", st.n}, {"cost", st.cost}, {"J", st.J}, {"D", st.D}});
  Json adj = Json::array();
  for (Index i = 0; i < tr.final_topology.M(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < tr.final_topology.N(); ++j) row.push_back(tr.final_topology.adjacency()(i, j));
    adj.push_back(row);
  }
  return finish(Json{{"J_initial", tr.J_initial},
                     {"D_initial", tr.D_initial},
                     {"J_final", tr.J_final()},
                     {"D_final", tr.D_final()},
                     {"D0", tr.D0},
                     {"eta2", tr.eta2},
                     {"termination", termination_name(tr.termination)},
                     {"evaluations", tr.evaluations},
                     {"failures", tr.failures},
                     {"steps", steps},
                     {"adjacency", adj},
                     {"final", result_json(tr.final_result)}},
                fl);
}

int run_gain(const Flags& fl) {
  const ScenarioFile f = scenario_from_json(load_document(fl));
  const PowerConstraint c = resolve_constraint(f, fl, std::nullopt, f.M());
  if (fl.validate_only) return validated(f);
  const GainReport r = collaboration_gain(f.scenario(), c, parse_method(fl.method));
  Json j{{"CG", r.CG},           {"D_dist", r.D_dist}, {"D_conn", r.D_conn}, {"D0", r.D0},
         {"eta2", r.eta2},       {"kappa", r.kappa},   {"kappa_M", r.kappa_M}, {"tags", r.regime_tags}};
  if (f.homogeneous && !c.is_cumulative()) {
    const ClosedFormGain cf =
        cg_closed_form(*f.homogeneous, Eigen::Map<const Vector>(c.budgets.data(), f.homogeneous->N));
    j["cg_closed_form"] = cf.CG;
    j["constraints_active"] = cf.active;
  } else if (f.homogeneous) {
    j["cg_closed_form"] = cg_formula(*f.homogeneous, c.total, static_cast<double>(f.homogeneous->N));
  }
  return finish(j, fl);
}

// Sweep spec: the built-in default, replaced by a sidecar's spec or patched with a scenario's
// homogeneous network, then key=value overrides.
Json sweep_document(const Flags& fl, Json spec, const char* kind) {
  if (!fl.scenario.empty()) {
    const Json doc = read_json_file(fl.scenario);
    if (doc.is_object() && doc.value("schema", "") == kSweepSchema) {
      if (doc.value("kind", "") != kind) invalid(fl.scenario + ": sidecar is for a " + doc.value("kind", "") + " sweep");
      spec = doc.at("spec");
    } else {
      const ScenarioFile f = scenario_from_json(doc);
      if (!f.homogeneous) invalid(fl.scenario + ": sweeps need a homogeneous network");
      spec["network"] = to_json(*f.homogeneous);
      if (f.rgg && spec.contains("seed")) spec["seed"] = f.rgg->seed;
    }
  }
  for (const auto& o : fl.overrides) apply_override(spec, o);
  if (fl.seed) {
    if (!spec.contains("seed")) invalid("--seed: this sweep has no random layout");
    spec["seed"] = *fl.seed;
  }
  if (fl.delta) {
    if (!spec.contains("delta")) invalid("--delta: only used by the cost sweep");
    spec["delta"] = *fl.delta;
  }
  return spec;
}

int finish_sweep(const SweepTable& t, const Flags& fl) {
  if (fl.out.empty()) {
    write_csv(std::cout, t);
  } else {
    write_sweep(t, fl.out);
    std::cerr << "wrote " << t.rows.size() << " rows to " << fl.out << " and " << fl.out << ".json\n";
  }
  return kExitOk;
}

int run_sweep(const Flags& fl, const std::string& verb) {
  const SweepOptions opt{0, fl.timing};
  if (verb == "sweep-rgg") {
    const RggSweepSpec sw = rgg_sweep_from_json(sweep_document(fl, to_json(default_rgg_sweep()), "rgg"));
    if (fl.validate_only) return (std::cout << "valid\n", kExitOk);
    return finish_sweep(run_rgg_sweep(sw, opt), fl);
  }
  if (verb == "sweep-cost") {
    const CostSweepSpec sw = cost_sweep_from_json(sweep_document(fl, to_json(default_cost_sweep()), "cost"));
    if (fl.validate_only) return (std::cout << "valid\n", kExitOk);
    return finish_sweep(run_cost_sweep(sw, opt), fl);
  }
  const GainGridSpec sw = gain_grid_from_json(sweep_document(fl, to_json(default_gain_grid()), "gain-grid"));
  if (fl.validate_only) return (std::cout << "valid\n", kExitOk);
  return finish_sweep(run_gain_grid(sw, opt), fl);
}

// Template scenario; parsing it back and re-serializing reproduces it exactly.
int run_init(const Flags& fl) {
  ScenarioFile f;
  if (fl.kind == "homogeneous") {
    HomogeneousSpec spec;
    spec.N = 4;
    spec.eta2 = 0.5;
    spec.rho = 0.1;
    spec.alpha_h = spec.alpha_g = 0.9;
    f.homogeneous = spec;
    f.topology.kind = TopologyKind::Rgg;
    f.rgg = RggParams{0.5, fl.seed.value_or(kDefaultSeed)};
    f.cost = CostChoice{0.1, std::nullopt};
    f.constraint = PowerConstraint::cumulative(1.0);
  } else if (fl.kind == "network") {
    NetworkScenario s;
    s.N = 2;
    s.M = 2;
    s.eta2 = 1.0;
    s.xi2 = 1.0;
    s.h = Vector::Ones(2);
    Matrix sigma(2, 2);
    sigma << 1.0, 0.2, 0.2, 1.0;
    s.Sigma = SymMatrix(sigma);
    s.Sigma_h = SymMatrix::diagonal(Vector::Constant(2, 0.1));
    s.g = Vector::Ones(2);
    s.Sigma_g = SymMatrix::diagonal(Vector::Constant(2, 0.1));
    f.network = s;
    f.topology.kind = TopologyKind::Connected;
    f.constraint = PowerConstraint::individual({1.0, 1.0});
  } else {
    invalid("--kind: expected homogeneous or network");
  }
  Json doc = to_json(f);
  for (const auto& o : fl.overrides) apply_override(doc, o);
  scenario_from_json(doc);
  emit(doc.dump(2) + "\n", fl.out);
  return kExitOk;
}

int dispatch(const std::string& verb, const Flags& fl) {
  if (verb == "init") return run_init(fl);
  if (verb == "solve-cumulative") return run_solve(fl, PowerConstraint::Kind::Cumulative);
  if (verb == "solve-individual") return run_solve(fl, PowerConstraint::Kind::Individual);
  if (verb == "design") return run_design(fl);
  if (verb == "gain") return run_gain(fl);
  return run_sweep(fl, verb);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative distributed estimation: solvers, topology design and sweeps", "collab"};
  app.require_subcommand(1, 1);
  Flags fl;
  const std::vector<std::pair<std::string, std::string>> verbs{
      {"solve-cumulative", "Optimal weights under a total power budget"},
      {"solve-individual", "Optimal weights under per-node power budgets"},
      {"design", "Greedy link selection with finite link costs"},
      {"gain", "Collaboration gain: distributed vs fully connected"},
      {"sweep-rgg", "Distortion against collaboration radius on a random geometric graph"},
      {"sweep-cost", "Designed-topology distortion against the link-cost scale"},
      {"gain-grid", "Collaboration gain over (power, network size)"},
      {"init", "Write a template scenario file"}};
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", fl.scenario, "Scenario file (JSON, schema v1) or sweep sidecar");
    sub->add_option("--constraint", fl.constraint, "cumulative or individual")
        ->check(CLI::IsMember({"cumulative", "individual"}));
    sub->add_option("--power", fl.power, "Total power budget");
    sub->add_option("--budgets", fl.budgets, "Comma-separated per-node budgets");
    sub->add_option("--delta", fl.delta, "Minimum normalized improvement per added link");
    sub->add_option("--seed", fl.seed, "Seed for random layouts");
    sub->add_option("--out", fl.out, "Output path (stdout if omitted)");
    sub->add_option("--method", fl.method, "Individual-constraint solver: auto, sdr or dual")
        ->check(CLI::IsMember({"auto", "sdr", "dual"}));
    sub->add_option("--kind", fl.kind, "init: homogeneous or network");
    sub->add_flag("--validate-only", fl.validate_only, "Check the inputs and exit without solving");
    sub->add_flag("--timing", fl.timing, "Record wall time per sweep row");
    sub->add_option("overrides", fl.overrides, "key=value overrides (dotted paths)");
  }

  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    std::cerr << "error: unknown verb '" << argv[1] << "'\n\n" << app.help();
    return kExitValidation;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return dispatch(verb, fl);
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? kExitValidation : kExitSolver;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
