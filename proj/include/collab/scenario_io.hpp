#pragma once

// Scenario files: JSON documents with schema "v1" holding either a general network or a homogeneous
// spec, plus an optional topology, RGG layout, link costs and power constraint. Matrices are
// row-major arrays of rows; an unavailable link is written as null.

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "collab/model.hpp"

namespace collab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kScenarioSchema = "v1";

enum class TopologyKind { Distributed, Connected, Cycle, Rgg, Adjacency };

inline std::string topology_kind_name(TopologyKind k) {
  switch (k) {
    case TopologyKind::Distributed: return "distributed";
    case TopologyKind::Connected: return "connected";
    case TopologyKind::Cycle: return "cycle";
    case TopologyKind::Rgg: return "rgg";
    case TopologyKind::Adjacency: return "adjacency";
  }
  return "unknown";
}

struct TopologyChoice {
  TopologyKind kind = TopologyKind::Distributed;
  Index K = 1;                  // cycle only
  Eigen::MatrixXi adjacency;    // adjacency only, M x N
};

struct RggParams {
  double radius = 0.0;
  std::uint64_t seed = kDefaultSeed;
};

struct CostChoice {
  std::optional<double> c0;       // quadratic in the RGG distances
  std::optional<Matrix> matrix;   // explicit M x N
};

struct ScenarioFile {
  std::optional<HomogeneousSpec> homogeneous;
  std::optional<NetworkScenario> network;
  TopologyChoice topology;
  std::optional<RggParams> rgg;
  std::optional<CostChoice> cost;
  std::optional<PowerConstraint> constraint;

  NetworkScenario scenario() const { return homogeneous ? expand(*homogeneous) : *network; }
  Index N() const { return homogeneous ? homogeneous->N : network->N; }
  Index M() const { return homogeneous ? homogeneous->N : network->M; }

  RggLayout layout() const {
    require(rgg.has_value(), ErrorCode::InvalidArgument, "rgg: layout required");
    return make_rgg(N(), rgg->radius, rgg->seed);
  }

  Matrix cost_matrix() const {
    if (!cost) return Matrix::Zero(M(), N());
    if (cost->matrix) return *cost->matrix;
    return quadratic_cost(layout(), *cost->c0).topRows(M());
  }

  CollaborationTopology resolve_topology() const {
    switch (topology.kind) {
      case TopologyKind::Distributed: return distributed_topology(M(), N());
      case TopologyKind::Connected: return connected_topology(M(), N());
      case TopologyKind::Cycle:
        require(M() == N(), ErrorCode::InvalidArgument, "topology.K: cycle topology needs M = N");
        return make_cycle_topology(M(), topology.K);
      case TopologyKind::Rgg: return rgg_topology(layout(), M());
      case TopologyKind::Adjacency: return CollaborationTopology(topology.adjacency);
    }
    fail(ErrorCode::InvalidArgument, "topology.kind: unknown");
  }
};

namespace detail {

// Strict reader: every access records its path so errors name the offending field.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const Json& raw() const { return j_; }

  [[noreturn]] void error(const std::string& what) const { fail(ErrorCode::InvalidArgument, path_ + ": " + what); }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) error("expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items())
      if (!keys.count(k)) JsonReader(v, child_path(k)).error("unknown key");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  JsonReader at(const char* key) const {
    if (!j_.contains(key)) JsonReader(Json(), child_path(key)).error("missing");
    return JsonReader(j_.at(key), child_path(key));
  }

  JsonReader at(std::size_t i) const { return JsonReader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!j_.is_number()) error("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) error("expected a finite number");
    return v;
  }

  // null stands for an unavailable (infinite-cost) entry.
  double number_or_inf() const { return j_.is_null() ? kInfiniteCost : number(); }

  Index integer() const {
    if (!j_.is_number_integer()) error("expected an integer");
    return j_.get<Index>();
  }

  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned()) error("expected a nonnegative integer");
    return j_.get<std::uint64_t>();
  }

  std::string string() const {
    if (!j_.is_string()) error("expected a string");
    return j_.get<std::string>();
  }

  std::size_t array_size() const {
    if (!j_.is_array()) error("expected an array");
    return j_.size();
  }

  Vector vector(Index expected) const {
    const std::size_t n = array_size();
    if (expected >= 0 && static_cast<Index>(n) != expected)
      error("expected " + std::to_string(expected) + " entries, got " + std::to_string(n));
    Vector v(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Index>(i)) = at(i).number();
    return v;
  }

  Matrix matrix(Index rows, Index cols, bool allow_null = false) const {
    if (array_size() != static_cast<std::size_t>(rows))
      error("expected " + std::to_string(rows) + " rows, got " + std::to_string(j_.size()));
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      const JsonReader row = at(static_cast<std::size_t>(i));
      if (row.array_size() != static_cast<std::size_t>(cols))
        row.error("expected " + std::to_string(cols) + " columns, got " + std::to_string(row.raw().size()));
      for (Index c = 0; c < cols; ++c) {
        const JsonReader e = row.at(static_cast<std::size_t>(c));
        m(i, c) = allow_null ? e.number_or_inf() : e.number();
      }
    }
    return m;
  }

  SymMatrix sym_matrix(Index order) const {
    const Matrix m = matrix(order, order);
    try {
      return SymMatrix(m);
    } catch (const Error& e) {
      error(e.what());
    }
  }

 private:
  std::string child_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const Json& j_;
  std::string path_;
};

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(std::isfinite(m(i, j)) ? Json(m(i, j)) : Json(nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

// Wraps a model-level validation failure with the path of the object that failed.
template <class Fn>
void validate_at(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace detail

inline Json to_json(const HomogeneousSpec& s) {
  return Json{{"N", s.N},           {"h0", s.h0},   {"g0", s.g0},     {"alpha_h", s.alpha_h},
              {"alpha_g", s.alpha_g}, {"sigma2", s.sigma2}, {"rho", s.rho}, {"eta2", s.eta2},
              {"xi2", s.xi2},         {"K", s.K}};
}

inline Json to_json(const NetworkScenario& s) {
  return Json{{"N", s.N},
              {"M", s.M},
              {"eta2", s.eta2},
              {"xi2", s.xi2},
              {"h", detail::vector_json(s.h)},
              {"Sigma", detail::matrix_json(s.Sigma.mat())},
              {"Sigma_h", detail::matrix_json(s.Sigma_h.mat())},
              {"g", detail::vector_json(s.g)},
              {"Sigma_g", detail::matrix_json(s.Sigma_g.mat())}};
}

inline Json to_json(const PowerConstraint& c) {
  if (c.is_cumulative()) return Json{{"type", "cumulative"}, {"power", c.total}};
  return Json{{"type", "individual"}, {"budgets", c.budgets}};
}

inline HomogeneousSpec homogeneous_from_json(const detail::JsonReader& r) {
  r.expect_object({"N", "h0", "g0", "alpha_h", "alpha_g", "sigma2", "rho", "eta2", "xi2", "K"});
  HomogeneousSpec s;
  s.N = r.at("N").integer();
  if (r.has("h0")) s.h0 = r.at("h0").number();
  if (r.has("g0")) s.g0 = r.at("g0").number();
  if (r.has("alpha_h")) s.alpha_h = r.at("alpha_h").number();
  if (r.has("alpha_g")) s.alpha_g = r.at("alpha_g").number();
  if (r.has("sigma2")) s.sigma2 = r.at("sigma2").number();
  if (r.has("rho")) s.rho = r.at("rho").number();
  if (r.has("eta2")) s.eta2 = r.at("eta2").number();
  if (r.has("xi2")) s.xi2 = r.at("xi2").number();
  if (r.has("K")) s.K = r.at("K").integer();
  detail::validate_at(r.path(), [&] { validate(s); });
  return s;
}

inline NetworkScenario network_from_json(const detail::JsonReader& r) {
  r.expect_object({"N", "M", "eta2", "xi2", "h", "Sigma", "Sigma_h", "g", "Sigma_g"});
  NetworkScenario s;
  s.N = r.at("N").integer();
  s.M = r.has("M") ? r.at("M").integer() : s.N;
  if (s.N < 1) r.at("N").error("must be at least 1");
  if (s.M < 1 || s.M > s.N) r.at("M").error("must lie in [1, N]");
  s.eta2 = r.at("eta2").number();
  s.xi2 = r.has("xi2") ? r.at("xi2").number() : 1.0;
  s.h = r.at("h").vector(s.N);
  s.Sigma = r.at("Sigma").sym_matrix(s.N);
  s.Sigma_h = r.has("Sigma_h") ? r.at("Sigma_h").sym_matrix(s.N) : SymMatrix::zero(s.N);
  s.g = r.at("g").vector(s.M);
  s.Sigma_g = r.has("Sigma_g") ? r.at("Sigma_g").sym_matrix(s.M) : SymMatrix::zero(s.M);
  detail::validate_at(r.path(), [&] { validate(s); });
  return s;
}

// Individual budgets may list the transmitting nodes (M entries) or every sensor (N entries).
inline PowerConstraint constraint_from_json(const detail::JsonReader& r, Index M, Index N) {
  r.expect_object({"type", "power", "budgets"});
  const std::string type = r.at("type").string();
  PowerConstraint c;
  if (type == "cumulative") {
    if (r.has("budgets")) r.at("budgets").error("not used by a cumulative constraint");
    const double p = r.at("power").number();
    detail::validate_at(r.path() + ".power", [&] { c = PowerConstraint::cumulative(p); });
  } else if (type == "individual") {
    if (r.has("power")) r.at("power").error("not used by an individual constraint");
    const Vector b = r.at("budgets").vector(-1);
    if (b.size() != M && b.size() != N)
      r.at("budgets").error("expected " + std::to_string(M) + " or " + std::to_string(N) + " entries");
    detail::validate_at(r.path() + ".budgets",
                        [&] { c = PowerConstraint::individual({b.data(), b.data() + b.size()}); });
  } else {
    r.at("type").error("expected \"cumulative\" or \"individual\"");
  }
  return c;
}

inline ScenarioFile scenario_from_json(const Json& j) {
  const detail::JsonReader r(j, "");
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "scenario: expected an object");
  r.expect_object({"schema", "homogeneous", "network", "topology", "rgg", "cost", "constraint"});
  if (r.at("schema").string() != kScenarioSchema) r.at("schema").error("unsupported schema version");

  ScenarioFile f;
  if (r.has("homogeneous") == r.has("network"))
    fail(ErrorCode::InvalidArgument, "scenario: exactly one of homogeneous or network is required");
  if (r.has("homogeneous")) f.homogeneous = homogeneous_from_json(r.at("homogeneous"));
  else f.network = network_from_json(r.at("network"));

  if (r.has("rgg")) {
    const auto g = r.at("rgg");
    g.expect_object({"radius", "seed"});
    RggParams p;
    if (g.has("radius")) p.radius = g.at("radius").number();
    if (g.has("seed")) p.seed = g.at("seed").unsigned_integer();
    detail::validate_at(g.path(), [&] { make_rgg(f.N(), p.radius, p.seed); });
    f.rgg = p;
  }

  if (r.has("topology")) {
    const auto t = r.at("topology");
    t.expect_object({"kind", "K", "adjacency"});
    const std::string kind = t.at("kind").string();
    if (kind == "distributed") f.topology.kind = TopologyKind::Distributed;
    else if (kind == "connected") f.topology.kind = TopologyKind::Connected;
    else if (kind == "cycle") f.topology.kind = TopologyKind::Cycle;
    else if (kind == "rgg") f.topology.kind = TopologyKind::Rgg;
    else if (kind == "adjacency") f.topology.kind = TopologyKind::Adjacency;
    else t.at("kind").error("expected distributed, connected, cycle, rgg or adjacency");
    if (t.has("K") != (f.topology.kind == TopologyKind::Cycle))
      t.at("K").error(f.topology.kind == TopologyKind::Cycle ? "required for a cycle topology" : "only used by cycle");
    if (t.has("adjacency") != (f.topology.kind == TopologyKind::Adjacency))
      t.at("adjacency").error(f.topology.kind == TopologyKind::Adjacency ? "required" : "only used by adjacency");
    if (f.topology.kind == TopologyKind::Cycle) f.topology.K = t.at("K").integer();
    if (f.topology.kind == TopologyKind::Adjacency) {
      const Matrix a = t.at("adjacency").matrix(f.M(), f.N());
      f.topology.adjacency = a.cast<int>();
      if (f.topology.adjacency.cast<double>() != a) t.at("adjacency").error("entries must be 0 or 1");
    }
    if (f.topology.kind == TopologyKind::Rgg && !f.rgg) t.at("kind").error("rgg topology needs an rgg layout");
    detail::validate_at(t.path(), [&] { f.resolve_topology(); });
  }

  if (r.has("cost")) {
    const auto c = r.at("cost");
    c.expect_object({"c0", "matrix"});
    if (c.has("c0") == c.has("matrix")) c.error("exactly one of c0 or matrix is required");
    CostChoice choice;
    if (c.has("c0")) {
      if (!f.rgg) c.at("c0").error("quadratic cost needs an rgg layout");
      choice.c0 = c.at("c0").number();
      if (*choice.c0 < 0.0) c.at("c0").error("must be nonnegative");
    } else {
      choice.matrix = c.at("matrix").matrix(f.M(), f.N(), true);
      for (Index i = 0; i < choice.matrix->size(); ++i)
        if (choice.matrix->data()[i] < 0.0) c.at("matrix").error("entries must be nonnegative");
    }
    f.cost = choice;
  }

  if (r.has("constraint")) f.constraint = constraint_from_json(r.at("constraint"), f.M(), f.N());
  return f;
}

inline Json to_json(const ScenarioFile& f) {
  Json j;
  j["schema"] = kScenarioSchema;
  if (f.homogeneous) j["homogeneous"] = to_json(*f.homogeneous);
  if (f.network) j["network"] = to_json(*f.network);
  Json t{{"kind", topology_kind_name(f.topology.kind)}};
  if (f.topology.kind == TopologyKind::Cycle) t["K"] = f.topology.K;
  if (f.topology.kind == TopologyKind::Adjacency)
    t["adjacency"] = detail::matrix_json(f.topology.adjacency.cast<double>());
  j["topology"] = t;
  if (f.rgg) j["rgg"] = Json{{"radius", f.rgg->radius}, {"seed", f.rgg->seed}};
  if (f.cost) {
    if (f.cost->c0) j["cost"] = Json{{"c0", *f.cost->c0}};
    else j["cost"] = Json{{"matrix", detail::matrix_json(*f.cost->matrix)}};
  }
  if (f.constraint) j["constraint"] = to_json(*f.constraint);
  return j;
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::InvalidArgument, source + ": malformed JSON: " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::InvalidArgument, path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

inline ScenarioFile load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

// Applies key=value with a dotted key path; the value is read as JSON when it parses, else as a string.
// Validation of the resulting document rejects keys the schema does not know.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::InvalidArgument,
          "override '" + assignment + "': expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!part.empty(), ErrorCode::InvalidArgument, "override '" + assignment + "': empty key segment");
    require(node->is_object() || node->is_null(), ErrorCode::InvalidArgument,
            "override '" + assignment + "': " + key.substr(0, dot) + " is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace collab
