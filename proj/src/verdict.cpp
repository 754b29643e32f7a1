#include "gapcert/verdict.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gapcert/error.hpp"
#include "gapcert/report_json.hpp"

namespace gapcert {

std::string to_string(Overall o) {
  switch (o) {
    case Overall::Certified: return "certified";
    case Overall::Refuted: return "refuted";
    case Overall::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string to_string(HypothesisStatus s) {
  switch (s) {
    case HypothesisStatus::Pass: return "pass";
    case HypothesisStatus::Fail: return "fail";
    case HypothesisStatus::Unknown: return "unknown";
  }
  return "unknown";
}

int exit_code(const TheoremVerdict& v) {
  switch (v.overall) {
    case Overall::Certified: return 0;
    case Overall::Refuted: return 2;
    case Overall::Inconclusive: return 3;
  }
  return 3;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

std::string fmt(const Vec& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt(x[i]);
  return s + ")";
}

SampleRegion gap_region(const BuiltSystem& b) { return SampleRegion{b.domain, b.change}; }

OdeSystem gap_system(const BuiltSystem& b) {
  return b.change ? apply_change(b.sys, *b.change) : b.sys;
}

void run_hypothesis_i(const Config& cfg, const BuiltSystem& b, HypothesisI& h, std::string& witness,
                      bool& refuted) {
  h.invariance = check_inward(b.sys, b.domain, cfg.invariance_samples);
  if (h.invariance.verdict == InvarianceVerdict::Fail) {
    h.status = HypothesisStatus::Fail;
    witness = h.invariance.reason;
    refuted = true;
  } else {
    h.trapping = empirical_trapping(b.sys, b.domain, cfg.trapping_starts, cfg.trapping_horizon);
    if (h.trapping->fraction < 1.0)
      h.note = "boundary test passed but a trajectory from " + fmt(*h.trapping->escape_start) +
               " left the box numerically";
  }

  h.equilibria = find_equilibria(b.sys, b.domain, cfg.equilibrium_starts);
  if (b.control) {
    const double m1 = cfg.params.at("mu1"), m2 = cfg.params.at("mu2"), m3 = cfg.params.at("mu3");
    const double nu = std::numbers::pi / (2.0 * m1 * m2 * m3);
    h.satellite = satellite_instability(m1, m2, m3, b.control->dg(nu));
  }
  if (h.equilibria.empty()) {
    if (!refuted) {
      h.status = HypothesisStatus::Unknown;
      h.note = "no singular point found by multistart Newton";
    }
    return;
  }
  const Equilibrium& e = h.equilibria.front();
  h.unique = h.equilibria.size() == 1;
  h.unstable = e.unstable;
  const double scale = std::max(1.0, std::pow(norm_2(e.jac), static_cast<double>(b.sys.dim())));
  h.det_nonzero = std::abs(e.det) > 1e-12 * scale;
  if (e.rh && e.rh->margin > 1e-8) h.routh_hurwitz_agrees = e.rh->unstable == e.unstable;
  if (b.cell) h.cell = cell_quantities(*b.cell, e.x);

  if (refuted) return;
  if (!h.unique) {
    h.status = HypothesisStatus::Fail;
    witness = "second singular point at " + fmt(h.equilibria[1].x);
    refuted = true;
  } else if (!h.unstable) {
    h.status = HypothesisStatus::Fail;
    witness = "singular point " + fmt(e.x) + " is not unstable (max Re = " +
              fmt(e.spectrum.front().real()) + ")";
    refuted = true;
  } else if (!h.det_nonzero) {
    h.status = HypothesisStatus::Fail;
    witness = "det f'(x_s) = " + fmt(e.det) + " at " + fmt(e.x);
    refuted = true;
  } else if (h.trapping && h.trapping->fraction < 1.0) {
    h.status = HypothesisStatus::Unknown;
  } else {
    h.status = HypothesisStatus::Pass;
  }
}

}  // namespace

TheoremVerdict certify(const Config& cfg) {
  TheoremVerdict v;
  v.model = cfg.model;
  const BuiltSystem b = build_system(cfg);

  std::string witness_i, witness_iii;
  bool refuted_i = false;
  try {
    run_hypothesis_i(cfg, b, v.hypothesis_i, witness_i, refuted_i);
  } catch (const Error& e) {
    v.hypothesis_i.status = HypothesisStatus::Unknown;
    v.hypothesis_i.note = e.what();
  }

  v.hypothesis_ii.user_asserted = cfg.analytic.has_value();
  v.hypothesis_ii.analytic = cfg.analytic.value_or(b.builtin);
  v.hypothesis_ii.status =
      v.hypothesis_ii.analytic ? HypothesisStatus::Pass : HypothesisStatus::Unknown;

  HypothesisIII& h3 = v.hypothesis_iii;
  h3.transformed = b.change.has_value();
  try {
    const OdeSystem gs = gap_system(b);
    h3.gap = gap_report(gs, gap_region(b), cfg.gap_m, cfg.lipschitz);
    if (h3.gap->passed) {
      h3.status = HypothesisStatus::Pass;
      if (cfg.cone)
        h3.cone = cone_condition_check(gs, gap_region(b), *h3.gap, cfg.cone_pairs, cfg.cone_horizon,
                                       cfg.seed);
    } else {
      h3.status = HypothesisStatus::Fail;
      witness_iii = "gap margin " + fmt(h3.gap->margin) + " <= 0: lambda_" +
                    std::to_string(h3.gap->m + 1) + " - lambda_" + std::to_string(h3.gap->m) +
                    " = " + fmt(h3.gap->gap) + ", 2 K_bound = " + fmt(2.0 * h3.gap->k_bound()) +
                    " (max at " + fmt(h3.gap->lipschitz.argmax_bound) + ")";
    }
  } catch (const Error& e) {
    h3.status = HypothesisStatus::Unknown;
    h3.note = e.what();
  }

  // The cycle search only needs an unstable singular point to start from.
  Conclusion& c = v.conclusion;
  const auto& eqs = v.hypothesis_i.equilibria;
  if (!eqs.empty() && eqs.front().unstable) {
    try {
      CycleSettings cs = cfg.cycle;
      const double lam_n = sym_eigen(b.sys.A()).eigenvalues.back();
      if (h3.gap) cs.k1 = std::abs(lam_n) + h3.gap->k();
      const CycleSearch search = locate_cycle(b.sys, b.domain, eqs.front().x, cs);
      if (search.cycle) {
        CycleInfo cyc = *search.cycle;
        std::vector<Vec> orbit = cyc.orbit;
        if (b.change)
          for (Vec& x : orbit) x = b.change->c_inv() * x;
        c.graph = graph_property_check(orbit, sym_eigen(b.sys.A()), cfg.gap_m);
        cyc.graph_check_ok = c.graph->ok;
        cyc.graph_ratio = c.graph->worst_ratio;
        if (cfg.tracking_probes > 0 && cfg.tracking_horizon > 0.0)
          c.tracking = exponential_tracking_probe(b.sys, b.domain, cyc, cfg.tracking_probes,
                                                  cfg.tracking_horizon, cfg.seed);
        c.located = true;
        c.cycle = std::move(cyc);
      } else {
        c.note = search.message + "; numerical settings need tightening";
      }
    } catch (const Error& e) {
      c.note = std::string("cycle search failed: ") + e.what();
    }
  } else {
    c.note = "no unstable singular point to start the cycle search from";
  }

  // Aggregate: the first refuted hypothesis wins, then the first unknown one.
  const HypothesisStatus st[3] = {v.hypothesis_i.status, v.hypothesis_ii.status, h3.status};
  const char* names[3] = {"i", "ii", "iii"};
  const std::string witnesses[3] = {witness_i, "", witness_iii};
  for (int i = 0; i < 3 && v.hypothesis.empty(); ++i)
    if (st[i] == HypothesisStatus::Fail) {
      v.overall = Overall::Refuted;
      v.hypothesis = names[i];
      v.witness = witnesses[i];
    }
  for (int i = 0; i < 3 && v.hypothesis.empty(); ++i)
    if (st[i] == HypothesisStatus::Unknown) {
      v.overall = Overall::Inconclusive;
      v.hypothesis = names[i];
      v.witness = i == 0 ? v.hypothesis_i.note
                         : i == 1 ? "analyticity not asserted (set \"analytic\": true)" : h3.note;
    }
  if (v.hypothesis.empty()) {
    const bool ok = c.cycle && c.cycle->stable && c.cycle->inside_domain;
    if (ok) {
      v.overall = Overall::Certified;
    } else {
      v.overall = Overall::Inconclusive;
      v.hypothesis = "conclusion";
      if (!c.cycle) v.witness = c.note;
      else if (!c.cycle->inside_domain) v.witness = "located cycle leaves the domain";
      else v.witness = "located cycle is " + to_string(c.cycle->stability);
    }
  }
  return v;
}

namespace {

CommandOutput run_cycle(const Config& cfg) {
  const BuiltSystem b = build_system(cfg);
  const std::vector<Equilibrium> eqs = find_equilibria(b.sys, b.domain, cfg.equilibrium_starts);
  if (eqs.empty()) reject("no singular point found in the domain");
  if (!eqs.front().unstable) reject("singular point " + fmt(eqs.front().x) + " is not unstable");
  CycleSettings cs = cfg.cycle;
  const OdeSystem gs = gap_system(b);
  const LipschitzEstimate k = estimate_lipschitz(gs, gap_region(b), cfg.lipschitz);
  cs.k1 = std::abs(sym_eigen(b.sys.A()).eigenvalues.back()) + k.k;
  const CycleSearch s = locate_cycle(b.sys, b.domain, eqs.front().x, cs);
  CommandOutput out;
  if (!s.cycle) {
    nlohmann::json j = {{"located", false}, {"message", s.message}};
    out.json = j.dump(2);
    out.exit_code = 3;
    return out;
  }
  CycleInfo c = *s.cycle;
  std::vector<Vec> orbit = c.orbit;
  if (b.change)
    for (Vec& x : orbit) x = b.change->c_inv() * x;
  const GraphCheck g = graph_property_check(orbit, sym_eigen(b.sys.A()), cfg.gap_m);
  c.graph_check_ok = g.ok;
  c.graph_ratio = g.worst_ratio;
  out.json = to_json_value(c).dump(2);
  out.csv = orbit_csv(c);
  return out;
}

}  // namespace

CommandOutput run_command(std::string_view command, const Config& cfg) {
  CommandOutput out;
  if (command == "certify") {
    const TheoremVerdict v = certify(cfg);
    out.exit_code = exit_code(v);
    out.json = verdict_to_json(v);
    if (v.conclusion.cycle) out.csv = orbit_csv(*v.conclusion.cycle);
    return out;
  }
  if (command == "cycle") return run_cycle(cfg);
  if (command == "lipschitz") {
    const BuiltSystem b = build_system(cfg);
    const GapReport g = gap_report(gap_system(b), gap_region(b), cfg.gap_m, cfg.lipschitz);
    out.json = to_json_value(g).dump(2);
    return out;
  }
  if (command == "norms") {
    const BuiltSystem b = build_system(cfg);
    RegionTable t;
    const std::size_t n = b.sys.dim();
    for (std::size_t i = 0; i < n; ++i) t.columns.push_back("x" + std::to_string(i + 1));
    for (const char* c : {"norm_1", "norm_inf", "norm_2", "bound"}) t.columns.push_back(c);
    std::ostringstream os;
    os.precision(17);
    auto cell = [&](double v) {
      os.str("");
      os << v;
      return os.str();
    };
    for (const NormSample& s : norm_table(gap_system(b), gap_region(b), cfg.lipschitz.grid)) {
      std::vector<std::string> row;
      for (double x : s.point) row.push_back(cell(x));
      for (double v : {s.norm_1, s.norm_inf, s.norm_2, s.bound}) row.push_back(cell(v));
      t.rows.push_back(std::move(row));
    }
    out.csv = to_csv(t);
    return out;
  }
  if (command == "scan") {
    auto axis = [&](const char* k, double fallback) {
      auto it = cfg.scan.find(k);
      return it != cfg.scan.end() ? it->second : std::vector<double>{fallback};
    };
    if (cfg.model == "satellite") {
      out.csv = to_csv(satellite_region_scan(axis("mu1", cfg.params.at("mu1")),
                                             axis("mu2", cfg.params.at("mu2")),
                                             axis("mu3", cfg.params.at("mu3"))));
    } else if (cfg.model == "cell") {
      out.csv = to_csv(cell_region_scan(axis("k", cfg.params.at("k")), axis("q", cfg.params.at("q")),
                                        cfg.params.at("T"), cfg.params.at("L"), cfg.lipschitz));
    } else {
      config_error("config field 'model': region scans exist for the satellite and cell models only");
    }
    return out;
  }
  invalid_argument("unknown command '" + std::string(command) + "'");
}

}  // namespace gapcert
