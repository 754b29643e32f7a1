#include "gapcert/report_json.hpp"

#include <cmath>
#include <sstream>

#include "gapcert/error.hpp"

namespace gapcert {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- scalars

json enc(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  return d;
}
json enc(bool b) { return b; }
json enc(int i) { return i; }
json enc(long i) { return i; }
json enc(std::size_t i) { return i; }
json enc(const std::string& s) { return s; }

void dec(const json& j, double& d) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") d = std::nan("");
    else if (s == "inf") d = std::numeric_limits<double>::infinity();
    else if (s == "-inf") d = -std::numeric_limits<double>::infinity();
    else config_error("report: expected a number, got \"" + s + "\"");
    return;
  }
  d = j.get<double>();
}
void dec(const json& j, bool& b) { b = j.get<bool>(); }
void dec(const json& j, int& i) { i = j.get<int>(); }
void dec(const json& j, long& i) { i = j.get<long>(); }
void dec(const json& j, std::size_t& i) { i = j.get<std::size_t>(); }
void dec(const json& j, std::string& s) { s = j.get<std::string>(); }

json enc(const Complex& z) { return json::array({enc(z.real()), enc(z.imag())}); }
void dec(const json& j, Complex& z) {
  double re = 0.0, im = 0.0;
  dec(j.at(0), re);
  dec(j.at(1), im);
  z = Complex(re, im);
}

json enc(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) r.push_back(enc(m(i, k)));
    rows.push_back(r);
  }
  return rows;
}
void dec(const json& j, Matrix& m) {
  if (j.empty()) {
    m = Matrix();
    return;
  }
  m = Matrix(j.size(), j.at(0).size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) dec(j.at(i).at(k), m(i, k));
}

// ------------------------------------------------------------------ enums

template <class E>
struct EnumNames;

template <>
struct EnumNames<StabilityVerdict> {
  static constexpr std::pair<StabilityVerdict, const char*> table[] = {
      {StabilityVerdict::Stable, "stable"},
      {StabilityVerdict::Marginal, "marginal"},
      {StabilityVerdict::Unstable, "unstable"}};
};
template <>
struct EnumNames<InvarianceVerdict> {
  static constexpr std::pair<InvarianceVerdict, const char*> table[] = {
      {InvarianceVerdict::Strict, "strict"},
      {InvarianceVerdict::WeakResolved, "weak-with-edge-resolution"},
      {InvarianceVerdict::Fail, "fail"}};
};
template <>
struct EnumNames<HypothesisStatus> {
  static constexpr std::pair<HypothesisStatus, const char*> table[] = {
      {HypothesisStatus::Pass, "pass"},
      {HypothesisStatus::Fail, "fail"},
      {HypothesisStatus::Unknown, "unknown"}};
};
template <>
struct EnumNames<Overall> {
  static constexpr std::pair<Overall, const char*> table[] = {
      {Overall::Certified, "certified"},
      {Overall::Refuted, "refuted"},
      {Overall::Inconclusive, "inconclusive"}};
};

template <class E>
  requires std::is_enum_v<E>
json enc(E e) {
  for (const auto& [v, name] : EnumNames<E>::table)
    if (v == e) return name;
  return "unknown";
}

template <class E>
  requires std::is_enum_v<E>
void dec(const json& j, E& e) {
  const std::string s = j.get<std::string>();
  for (const auto& [v, name] : EnumNames<E>::table)
    if (s == name) {
      e = v;
      return;
    }
  config_error("report: unknown enumerator \"" + s + "\"");
}

// ------------------------------------------------------------ structures

struct Encoder {
  json j = json::object();
  template <class T>
  void operator()(const char* name, const T& v);
};

struct Decoder {
  const json& j;
  template <class T>
  void operator()(const char* name, T& v);
};

// Field lists. `S` is T or const T.

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, RouthHurwitz>
void describe(V& v, S& s) {
  v("a1", s.a1);
  v("a2", s.a2);
  v("a3", s.a3);
  v("unstable", s.unstable);
  v("stable", s.stable);
  v("margin", s.margin);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, Equilibrium>
void describe(V& v, S& s) {
  v("x_s", s.x);
  v("residual", s.residual);
  v("jacobian", s.jac);
  v("spectrum", s.spectrum);
  v("det", s.det);
  v("unstable", s.unstable);
  v("positive_real_parts", s.positive_real);
  v("routh_hurwitz", s.rh);
  v("unique_in_domain", s.unique_in_domain);
  v("basin_count", s.basin_count);
  v("starts", s.starts);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, FaceReport>
void describe(V& v, S& s) {
  v("axis", s.axis);
  v("upper", s.upper);
  v("max_outward", s.max_outward);
  v("samples", s.samples);
  v("tangent", s.tangent);
  v("resolved", s.resolved);
  v("weak", s.weak);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, InvarianceReport>
void describe(V& v, S& s) {
  v("verdict", s.verdict);
  v("faces", s.faces);
  v("witness", s.witness);
  v("reason", s.reason);
  v("samples", s.samples);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, TrappingReport>
void describe(V& v, S& s) {
  v("fraction", s.fraction);
  v("starts", s.starts);
  v("trapped", s.trapped);
  v("escape_start", s.escape_start);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, SatelliteInstability>
void describe(V& v, S& s) {
  v("lhs", s.lhs);
  v("rhs", s.rhs);
  v("unstable", s.unstable);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, CellQuantities>
void describe(V& v, S& s) {
  v("b", s.b);
  v("c", s.c);
  v("d", s.d);
  v("b_minus_kq", s.b_minus_kq);
  v("c_times_b_minus_kq", s.c_times_b_minus_kq);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, LipschitzEstimate>
void describe(V& v, S& s) {
  v("K", s.k);
  v("K_bound", s.k_bound);
  v("norm_1_max", s.norm_1_max);
  v("norm_inf_max", s.norm_inf_max);
  v("argmax", s.argmax);
  v("argmax_bound", s.argmax_bound);
  v("evaluations", s.evaluations);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, GapReport>
void describe(V& v, S& s) {
  v("m", s.m);
  v("eigenvalues", s.eigenvalues);
  v("lambda_m", s.lambda_m);
  v("lambda_m1", s.lambda_m1);
  v("gap", s.gap);
  v("lipschitz", s.lipschitz);
  v("margin", s.margin);
  v("margin_exact", s.margin_exact);
  v("lambda_cone", s.lambda_cone);
  v("eps_cone", s.eps_cone);
  v("passed", s.passed);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, ConeCheck>
void describe(V& v, S& s) {
  v("worst_slack", s.worst_slack);
  v("pairs_used", s.pairs_used);
  v("pairs_skipped", s.pairs_skipped);
  v("samples", s.samples);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, CycleInfo>
void describe(V& v, S& s) {
  v("anchor", s.anchor);
  v("section_normal", s.section_normal);
  v("period", s.period);
  v("orbit_times", s.orbit_times);
  v("orbit", s.orbit);
  v("multipliers", s.multipliers);
  v("trivial_index", s.trivial_index);
  v("stability", s.stability);
  v("stable", s.stable);
  v("period_lower_bound", s.period_lower_bound);
  v("closure_error", s.closure_error);
  v("inside_domain", s.inside_domain);
  v("graph_check_ok", s.graph_check_ok);
  v("graph_ratio", s.graph_ratio);
  v("monodromy_det", s.monodromy_det);
  v("liouville_det", s.liouville_det);
  v("liouville_error", s.liouville_error);
  v("loops", s.loops);
  v("newton_iterations", s.newton_iterations);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, GraphCheck>
void describe(V& v, S& s) {
  v("ok", s.ok);
  v("worst_ratio", s.worst_ratio);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, ProbeResult>
void describe(V& v, S& s) {
  v("start", s.start);
  v("rate", s.rate);
  v("rate_fitted", s.rate_fitted);
  v("final_distance", s.final_distance);
  v("converged", s.converged);
  v("other_attractor", s.other_attractor);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, TrackingReport>
void describe(V& v, S& s) {
  v("probes", s.probes);
  v("distance_floor", s.distance_floor);
  v("converged", s.converged);
  v("other_attractors", s.other_attractors);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, HypothesisI>
void describe(V& v, S& s) {
  v("status", s.status);
  v("invariance", s.invariance);
  v("trapping", s.trapping);
  v("equilibria", s.equilibria);
  v("unique", s.unique);
  v("unstable", s.unstable);
  v("det_nonzero", s.det_nonzero);
  v("routh_hurwitz_agrees", s.routh_hurwitz_agrees);
  v("satellite_instability", s.satellite);
  v("cell", s.cell);
  v("note", s.note);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, HypothesisII>
void describe(V& v, S& s) {
  v("status", s.status);
  v("analytic", s.analytic);
  v("user_asserted", s.user_asserted);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, HypothesisIII>
void describe(V& v, S& s) {
  v("status", s.status);
  v("gap", s.gap);
  v("cone", s.cone);
  v("transformed", s.transformed);
  v("note", s.note);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, Conclusion>
void describe(V& v, S& s) {
  v("cycle", s.cycle);
  v("graph", s.graph);
  v("tracking", s.tracking);
  v("located", s.located);
  v("note", s.note);
}

template <class V, class S>
  requires std::same_as<std::remove_const_t<S>, TheoremVerdict>
void describe(V& v, S& s) {
  v("model", s.model);
  v("overall", s.overall);
  v("hypothesis", s.hypothesis);
  v("witness", s.witness);
  v("hypothesis_i", s.hypothesis_i);
  v("hypothesis_ii", s.hypothesis_ii);
  v("hypothesis_iii", s.hypothesis_iii);
  v("conclusion", s.conclusion);
}

template <class T>
concept Described = requires(Encoder& e, const T& t) { describe(e, t); };

template <Described T>
json enc(const T& s) {
  Encoder e;
  describe(e, s);
  return e.j;
}

template <Described T>
void dec(const json& j, T& s) {
  Decoder d{j};
  describe(d, s);
}

template <class T>
json enc(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(enc(x));
  return a;
}
template <class T>
void dec(const json& j, std::vector<T>& v) {
  v.clear();
  v.resize(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) dec(j[i], v[i]);
}

template <class T>
json enc(const std::optional<T>& o) {
  return o ? enc(*o) : json(nullptr);
}
template <class T>
void dec(const json& j, std::optional<T>& o) {
  if (j.is_null()) {
    o.reset();
    return;
  }
  T v{};
  dec(j, v);
  o = std::move(v);
}

template <class T>
void Encoder::operator()(const char* name, const T& v) {
  j[name] = enc(v);
}

template <class T>
void Decoder::operator()(const char* name, T& v) {
  if (!j.contains(name)) config_error(std::string("report: missing field '") + name + "'");
  dec(j.at(name), v);
}


}  // namespace

json to_json_value(const TheoremVerdict& v) { return enc(v); }
json to_json_value(const GapReport& g) { return enc(g); }
json to_json_value(const CycleInfo& c) { return enc(c); }
json to_json_value(const Equilibrium& e) { return enc(e); }

TheoremVerdict verdict_from_json(const json& j) {
  TheoremVerdict v;
  dec(j, v);
  return v;
}

GapReport gap_report_from_json(const json& j) {
  GapReport g;
  dec(j, g);
  return g;
}

CycleInfo cycle_from_json(const json& j) {
  CycleInfo c;
  dec(j, c);
  return c;
}

std::string verdict_to_json(const TheoremVerdict& v) { return to_json_value(v).dump(2); }

TheoremVerdict verdict_from_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    config_error(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    return verdict_from_json(j);
  } catch (const json::exception& e) {
    config_error(std::string("report has an unexpected shape: ") + e.what());
  }
}

std::string orbit_csv(const CycleInfo& c) {
  std::ostringstream os;
  os.precision(17);
  const std::size_t n = c.orbit.empty() ? 0 : c.orbit.front().size();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
  os << "\r\n";
  for (std::size_t s = 0; s < c.orbit.size(); ++s) {
    os << c.orbit_times[s];
    for (double x : c.orbit[s]) os << ',' << x;
    os << "\r\n";
  }
  return os.str();
}

}  // namespace gapcert
