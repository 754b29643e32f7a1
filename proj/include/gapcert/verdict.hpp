#pragma once

// Configuration, the hypothesis checklist that ends in a certification
// verdict, and the command layer shared by the C API and the CLI.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gapcert/equilibria.hpp"
#include "gapcert/flow.hpp"
#include "gapcert/gaplip.hpp"
#include "gapcert/invariance.hpp"
#include "gapcert/sysmodel.hpp"

namespace gapcert {

struct Config {
  std::string model;  // satellite | cell | hopf | custom
  std::map<std::string, double> params;
  std::vector<std::string> expressions;  // custom: one component of f per entry
  std::optional<Matrix> a;               // custom: symmetric linear part
  std::optional<Vec> probe;
  std::optional<BoxDomain> domain;       // nullopt: the family's default box
  std::string change = "auto";           // auto | none | matrix
  std::optional<Matrix> change_matrix;

  std::size_t gap_m = 2;
  LipschitzOptions lipschitz;
  bool cone = false;
  int cone_pairs = 50;
  double cone_horizon = 5.0;

  int invariance_samples = 400;
  int trapping_starts = 27;
  double trapping_horizon = 200.0;
  int equilibrium_starts = 27;

  CycleSettings cycle;
  double tracking_horizon = 0.0;  // > 0 runs tracking probes after the cycle
  int tracking_probes = 0;

  /// scan axes: mu1, mu2, mu3 (satellite) or k, q (cell).
  std::map<std::string, std::vector<double>> scan;

  unsigned long long seed = 0;
  std::optional<bool> analytic;

  friend bool operator==(const Config&, const Config&) = default;
};

/// Malformed JSON reports line and column; bad fields report their path.
/// Both throw Error with kind Config.
Config parse_config(std::string_view json_text);

struct BuiltSystem {
  OdeSystem sys;
  BoxDomain domain;
  std::optional<LinearChange> change;  // coordinates for the gap test
  bool builtin = false;
  std::optional<CellParams> cell;
  std::optional<AdmissibleFunction> control;  // satellite
};

BuiltSystem build_system(const Config& cfg);

enum class Overall { Certified, Refuted, Inconclusive };
enum class HypothesisStatus { Pass, Fail, Unknown };

std::string to_string(Overall o);
std::string to_string(HypothesisStatus s);

struct HypothesisI {
  HypothesisStatus status = HypothesisStatus::Unknown;
  InvarianceReport invariance;
  std::optional<TrappingReport> trapping;
  std::vector<Equilibrium> equilibria;
  bool unique = false;
  bool unstable = false;
  bool det_nonzero = false;
  bool routh_hurwitz_agrees = true;
  std::optional<SatelliteInstability> satellite;
  std::optional<CellQuantities> cell;
  std::string note;

  friend bool operator==(const HypothesisI&, const HypothesisI&) = default;
};

struct HypothesisII {
  HypothesisStatus status = HypothesisStatus::Unknown;
  bool analytic = false;
  bool user_asserted = false;

  friend bool operator==(const HypothesisII&, const HypothesisII&) = default;
};

struct HypothesisIII {
  HypothesisStatus status = HypothesisStatus::Unknown;
  std::optional<GapReport> gap;
  std::optional<ConeCheck> cone;
  bool transformed = false;
  std::string note;

  friend bool operator==(const HypothesisIII&, const HypothesisIII&) = default;
};

struct Conclusion {
  std::optional<CycleInfo> cycle;
  std::optional<GraphCheck> graph;
  std::optional<TrackingReport> tracking;
  bool located = false;
  std::string note;

  friend bool operator==(const Conclusion&, const Conclusion&) = default;
};

struct TheoremVerdict {
  std::string model;
  HypothesisI hypothesis_i;
  HypothesisII hypothesis_ii;
  HypothesisIII hypothesis_iii;
  Conclusion conclusion;
  Overall overall = Overall::Inconclusive;
  std::string hypothesis;  // "i", "ii", "iii" or "conclusion" when not certified
  std::string witness;

  friend bool operator==(const TheoremVerdict&, const TheoremVerdict&) = default;
};

TheoremVerdict certify(const Config& cfg);

/// 0 certified, 2 refuted, 3 inconclusive.
int exit_code(const TheoremVerdict& v);

/// Output of one command: exit code plus JSON and/or CSV text.
struct CommandOutput {
  int exit_code = 0;
  std::string json;
  std::string csv;
};

/// certify | cycle | lipschitz | norms | scan. Config errors propagate.
CommandOutput run_command(std::string_view command, const Config& cfg);

}  // namespace gapcert
