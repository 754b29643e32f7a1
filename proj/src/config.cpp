#include <cmath>
#include <set>

#include <json.hpp>

#include "gapcert/error.hpp"
#include "gapcert/expr.hpp"
#include "gapcert/verdict.hpp"

namespace gapcert {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  config_error("config field '" + path + "': " + what);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (!ok.count(k)) field_error(path.empty() ? k : path + "." + k, "unknown key");
  }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) field_error(path, "expected a finite number");
  return d;
}

double get_positive(const json& v, const std::string& path) {
  const double d = get_number(v, path);
  if (!(d > 0.0)) field_error(path, "expected a positive number");
  return d;
}

long long get_integer(const json& v, const std::string& path, long long min_value) {
  if (!v.is_number_integer()) field_error(path, "expected an integer");
  const long long i = v.get<long long>();
  if (i < min_value) field_error(path, "expected an integer >= " + std::to_string(min_value));
  return i;
}

Vec get_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) field_error(path, "expected a non-empty array of numbers");
  Vec out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix get_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) field_error(path, "expected an array of rows");
  const std::size_t rows = v.size();
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const Vec row = get_vector(v[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) m = Matrix(rows, row.size());
    if (row.size() != m.cols()) field_error(path, "rows have different lengths");
    for (std::size_t j = 0; j < row.size(); ++j) m(i, j) = row[j];
  }
  return m;
}

std::vector<double> get_axis(const json& v, const std::string& path) {
  if (v.is_array()) return get_vector(v, path);
  if (!v.is_object()) field_error(path, "expected an array or {\"from\", \"to\", \"steps\"}");
  allow_keys(v, path, {"from", "to", "steps"});
  if (!v.contains("from") || !v.contains("to") || !v.contains("steps"))
    field_error(path, "range needs from, to and steps");
  const double a = get_number(v["from"], path + ".from");
  const double b = get_number(v["to"], path + ".to");
  const long long n = get_integer(v["steps"], path + ".steps", 1);
  std::vector<double> out;
  if (n == 1) return {a};
  for (long long i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / (n - 1));
  return out;
}

// Line and column (1-based) of a byte offset.
std::pair<int, int> locate(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Config parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = locate(text, at);
    config_error("config is not valid JSON (line " + std::to_string(line) + ", column " +
                 std::to_string(col) + ")");
  }
  if (!doc.is_object()) config_error("config must be a JSON object");
  allow_keys(doc, "", {"model", "params", "expressions", "A", "probe", "domain", "change", "gap",
                       "invariance", "equilibria", "cycle", "scan", "seed", "analytic"});

  Config c;
  if (!doc.contains("model") || !doc["model"].is_string())
    field_error("model", "required string (satellite, cell, hopf or custom)");
  c.model = doc["model"].get<std::string>();
  static const std::set<std::string> models = {"satellite", "cell", "hopf", "custom"};
  if (!models.count(c.model)) field_error("model", "unknown model '" + c.model + "'");

  // Family parameters and their defaults.
  std::map<std::string, double> defaults;
  if (c.model == "satellite") defaults = {{"mu1", 0.05}, {"mu2", 0.05}, {"mu3", 2.1}};
  if (c.model == "cell") defaults = {{"k", 3.0}, {"q", 0.1}, {"T", 10.0}, {"L", 1e6}};
  if (c.model == "hopf") defaults = {{"omega", 1.0}, {"lambda_z", 1.0}};
  c.params = defaults;
  if (doc.contains("params")) {
    const json& p = doc["params"];
    if (!p.is_object()) field_error("params", "expected an object");
    for (const auto& [k, v] : p.items()) {
      if (!defaults.count(k)) field_error("params." + k, "unknown parameter for model " + c.model);
      c.params[k] = get_number(v, "params." + k);
    }
  }

  if (c.model == "custom") {
    if (!doc.contains("expressions") || !doc["expressions"].is_array() || doc["expressions"].empty())
      field_error("expressions", "custom model needs an array of expression strings");
    for (std::size_t i = 0; i < doc["expressions"].size(); ++i) {
      const json& e = doc["expressions"][i];
      if (!e.is_string()) field_error("expressions[" + std::to_string(i) + "]", "expected a string");
      c.expressions.push_back(e.get<std::string>());
    }
    if (!doc.contains("A")) field_error("A", "custom model needs the symmetric matrix A");
    c.a = get_matrix(doc["A"], "A");
    if (doc.contains("probe")) c.probe = get_vector(doc["probe"], "probe");
  } else {
    for (const char* k : {"expressions", "A", "probe"})
      if (doc.contains(k)) field_error(k, "only valid for the custom model");
  }

  if (doc.contains("domain")) {
    const json& d = doc["domain"];
    if (d.is_string()) {
      if (d.get<std::string>() != "auto") field_error("domain", "expected \"auto\" or an object");
    } else if (d.is_object()) {
      allow_keys(d, "domain", {"lower", "upper"});
      if (!d.contains("lower") || !d.contains("upper"))
        field_error("domain", "needs both lower and upper");
      const Vec lo = get_vector(d["lower"], "domain.lower");
      const Vec hi = get_vector(d["upper"], "domain.upper");
      try {
        c.domain = BoxDomain(lo, hi);
      } catch (const Error& e) {
        field_error("domain", e.what());
      }
    } else {
      field_error("domain", "expected \"auto\" or an object");
    }
  }
  if (c.model == "custom" && !c.domain) field_error("domain", "custom model needs an explicit box");

  if (doc.contains("change")) {
    const json& ch = doc["change"];
    if (ch.is_string()) {
      c.change = ch.get<std::string>();
      if (c.change != "auto" && c.change != "none")
        field_error("change", "expected \"auto\", \"none\" or a matrix");
    } else {
      c.change = "matrix";
      c.change_matrix = get_matrix(ch, "change");
    }
  }

  if (doc.contains("gap")) {
    const json& g = doc["gap"];
    if (!g.is_object()) field_error("gap", "expected an object");
    allow_keys(g, "gap", {"m", "grid", "refine", "cone", "cone_pairs", "cone_horizon"});
    if (g.contains("m")) c.gap_m = static_cast<std::size_t>(get_integer(g["m"], "gap.m", 1));
    if (g.contains("grid")) c.lipschitz.grid = static_cast<int>(get_integer(g["grid"], "gap.grid", 8));
    if (g.contains("refine"))
      c.lipschitz.refine_levels = static_cast<int>(get_integer(g["refine"], "gap.refine", 0));
    if (g.contains("cone")) {
      if (!g["cone"].is_boolean()) field_error("gap.cone", "expected a boolean");
      c.cone = g["cone"].get<bool>();
    }
    if (g.contains("cone_pairs"))
      c.cone_pairs = static_cast<int>(get_integer(g["cone_pairs"], "gap.cone_pairs", 1));
    if (g.contains("cone_horizon")) c.cone_horizon = get_positive(g["cone_horizon"], "gap.cone_horizon");
  }

  if (doc.contains("invariance")) {
    const json& v = doc["invariance"];
    if (!v.is_object()) field_error("invariance", "expected an object");
    allow_keys(v, "invariance", {"samples", "trapping_starts", "trapping_horizon"});
    if (v.contains("samples"))
      c.invariance_samples = static_cast<int>(get_integer(v["samples"], "invariance.samples", 100));
    if (v.contains("trapping_starts"))
      c.trapping_starts =
          static_cast<int>(get_integer(v["trapping_starts"], "invariance.trapping_starts", 10));
    if (v.contains("trapping_horizon"))
      c.trapping_horizon = get_positive(v["trapping_horizon"], "invariance.trapping_horizon");
  }

  if (doc.contains("equilibria")) {
    const json& v = doc["equilibria"];
    if (!v.is_object()) field_error("equilibria", "expected an object");
    allow_keys(v, "equilibria", {"starts"});
    if (v.contains("starts"))
      c.equilibrium_starts = static_cast<int>(get_integer(v["starts"], "equilibria.starts", 27));
  }

  if (doc.contains("cycle")) {
    const json& v = doc["cycle"];
    if (!v.is_object()) field_error("cycle", "expected an object");
    allow_keys(v, "cycle",
               {"tol_rel", "tol_abs", "transient_factor", "transient_cap", "max_loops",
                "shooting_switch", "convergence", "max_newton", "max_return_time", "orbit_samples",
                "tracking_horizon", "tracking_probes"});
    auto tol = [&](const char* key, double& dst) {
      if (!v.contains(key)) return;
      dst = get_number(v[key], std::string("cycle.") + key);
      if (dst < 1e-12 || dst > 1e-3) field_error(std::string("cycle.") + key, "must lie in [1e-12, 1e-3]");
    };
    tol("tol_rel", c.cycle.tol_rel);
    tol("tol_abs", c.cycle.tol_abs);
    auto pos = [&](const char* key, double& dst) {
      if (v.contains(key)) dst = get_positive(v[key], std::string("cycle.") + key);
    };
    pos("transient_factor", c.cycle.transient_factor);
    pos("transient_cap", c.cycle.transient_cap);
    pos("shooting_switch", c.cycle.shooting_switch);
    pos("convergence", c.cycle.convergence);
    pos("max_return_time", c.cycle.max_return_time);
    pos("tracking_horizon", c.tracking_horizon);
    if (v.contains("max_loops"))
      c.cycle.max_loops = static_cast<int>(get_integer(v["max_loops"], "cycle.max_loops", 1));
    if (v.contains("max_newton"))
      c.cycle.max_newton = static_cast<int>(get_integer(v["max_newton"], "cycle.max_newton", 1));
    if (v.contains("orbit_samples"))
      c.cycle.orbit_samples =
          static_cast<int>(get_integer(v["orbit_samples"], "cycle.orbit_samples", 8));
    if (v.contains("tracking_probes"))
      c.tracking_probes =
          static_cast<int>(get_integer(v["tracking_probes"], "cycle.tracking_probes", 0));
  }

  if (doc.contains("scan")) {
    const json& v = doc["scan"];
    if (!v.is_object()) field_error("scan", "expected an object");
    if (c.model == "satellite") allow_keys(v, "scan", {"mu1", "mu2", "mu3"});
    else if (c.model == "cell") allow_keys(v, "scan", {"k", "q"});
    else field_error("scan", "region scans exist for the satellite and cell models only");
    for (const auto& [k, a] : v.items()) c.scan[k] = get_axis(a, "scan." + k);
  }

  if (doc.contains("seed"))
    c.seed = static_cast<unsigned long long>(get_integer(doc["seed"], "seed", 0));
  if (doc.contains("analytic")) {
    if (!doc["analytic"].is_boolean()) field_error("analytic", "expected a boolean");
    c.analytic = doc["analytic"].get<bool>();
  }
  return c;
}

namespace {

std::optional<LinearChange> configured_change(const Config& cfg, std::size_t n) {
  if (!cfg.change_matrix) return std::nullopt;
  if (cfg.change_matrix->rows() != n || cfg.change_matrix->cols() != n)
    field_error("change", "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  try {
    return LinearChange(*cfg.change_matrix);
  } catch (const Error& e) {
    field_error("change", e.what());
  }
}

BoxDomain configured_domain(const Config& cfg, std::size_t n, BoxDomain fallback) {
  if (!cfg.domain) return fallback;
  if (cfg.domain->dim() != n) field_error("domain", "dimension does not match the system");
  return *cfg.domain;
}

}  // namespace

namespace {

BuiltSystem assemble(const Config& cfg) {
  auto param = [&](const char* k) { return cfg.params.at(k); };
  if (cfg.model == "satellite") {
    const double m1 = param("mu1"), m2 = param("mu2"), m3 = param("mu3");
    AdmissibleFunction g = default_satellite_control(m1, m2, m3);
    OdeSystem sys = satellite_system(m1, m2, m3, g);
    BoxDomain dom = configured_domain(cfg, 3, satellite_domain(m1, m2, m3, g.bound));
    std::optional<LinearChange> ch = configured_change(cfg, 3);
    return BuiltSystem{std::move(sys), std::move(dom), ch, true, std::nullopt, std::move(g)};
  }
  if (cfg.model == "cell") {
    const CellParams p{param("k"), param("q"), param("T"), param("L")};
    OdeSystem sys = cell_system(p);
    BoxDomain dom = configured_domain(cfg, 3, cell_domain(p));
    std::optional<LinearChange> ch = configured_change(cfg, 3);
    if (cfg.change == "auto") ch = cell_change();
    return BuiltSystem{std::move(sys), std::move(dom), ch, true, p, std::nullopt};
  }
  if (cfg.model == "hopf") {
    OdeSystem sys = hopf_oracle(param("omega"), param("lambda_z"));
    BoxDomain dom = configured_domain(cfg, 3, BoxDomain({-2.0, -2.0, -1.0}, {2.0, 2.0, 1.0}));
    std::optional<LinearChange> ch = configured_change(cfg, 3);
    return BuiltSystem{std::move(sys), std::move(dom), ch, true, std::nullopt, std::nullopt};
  }
  const std::size_t n = cfg.expressions.size();
  if (cfg.a->rows() != n || cfg.a->cols() != n)
    field_error("A", "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  if (relative_asymmetry(*cfg.a) > 1e-12) field_error("A", "must be symmetric");
  if (cfg.probe && cfg.probe->size() != n)
    field_error("probe", "expected " + std::to_string(n) + " coordinates");
  std::optional<OdeSystem> parsed;
  try {
    parsed.emplace(parse_system(cfg.expressions, *cfg.a, cfg.probe));
  } catch (const expr::ParseError& e) {
    field_error("expressions[" + std::to_string(e.line() - 1) + "]",
                "column " + std::to_string(e.column()) + ": " + e.message());
  } catch (const Error& e) {
    field_error(cfg.probe ? "probe" : "expressions", e.what());
  }
  OdeSystem sys = std::move(*parsed);
  BoxDomain dom = configured_domain(cfg, n, *cfg.domain);
  std::optional<LinearChange> ch = configured_change(cfg, n);
  return BuiltSystem{std::move(sys), std::move(dom), ch, false, std::nullopt, std::nullopt};
}

}  // namespace

BuiltSystem build_system(const Config& cfg) {
  if (cfg.model == "custom") return assemble(cfg);
  // Family contracts (k > q, kT > 1, positive mu, ...) are parameter errors.
  try {
    return assemble(cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    field_error("params", e.what());
  }
}

}  // namespace gapcert
