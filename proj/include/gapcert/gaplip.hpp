#pragma once

// Lipschitz estimation for the nonlinearity, the spectral gap test
// lambda_{m+1} - lambda_m > 2K, the associated cone parameters, a runtime
// check of the cone inequality and parameter-region scans.

#include <optional>
#include <string>
#include <vector>

#include "gapcert/numkit.hpp"
#include "gapcert/sysmodel.hpp"

namespace gapcert {

/// Points p of a box, seen by a system in coordinates C^{-1} p when a
/// change is present (the parallelepiped C^{-1} D).
struct SampleRegion {
  BoxDomain box;
  std::optional<LinearChange> change;

  Vec to_system(const Vec& p) const { return change ? change->c_inv() * p : p; }
  Vec to_box(const Vec& x) const { return change ? change->c() * x : x; }
};

struct LipschitzOptions {
  int grid = 32;          // points per axis, >= 8
  int refine_levels = 3;  // local refinements around the running argmax

  friend bool operator==(const LipschitzOptions&, const LipschitzOptions&) = default;
};

struct LipschitzEstimate {
  double k = 0.0;        // max ||F'||_2
  double k_bound = 0.0;  // max sqrt(||F'||_1 ||F'||_inf)
  double norm_1_max = 0.0;
  double norm_inf_max = 0.0;
  Vec argmax;            // box coordinates of k
  Vec argmax_bound;      // box coordinates of k_bound
  long evaluations = 0;

  friend bool operator==(const LipschitzEstimate&, const LipschitzEstimate&) = default;
};

/// Maxima over the closed box on a lattice with `grid` points per axis,
/// followed by `refine_levels` rounds of 4x denser local lattices around the
/// running argmax of each tracked quantity. Rejects a non-finite Jacobian.
LipschitzEstimate estimate_lipschitz(const OdeSystem& sys, const SampleRegion& region,
                                     const LipschitzOptions& opts = {});

struct NormSample {
  Vec point;  // box coordinates
  double norm_1 = 0.0;
  double norm_inf = 0.0;
  double norm_2 = 0.0;
  double bound = 0.0;  // sqrt(norm_1 * norm_inf)
};

/// The coarse lattice used by estimate_lipschitz, one row per point.
std::vector<NormSample> norm_table(const OdeSystem& sys, const SampleRegion& region, int grid);

struct GapReport {
  std::size_t m = 2;
  Vec eigenvalues;
  double lambda_m = 0.0;
  double lambda_m1 = 0.0;
  double gap = 0.0;
  LipschitzEstimate lipschitz;
  double margin = 0.0;        // gap - 2 K_bound (verdict)
  double margin_exact = 0.0;  // gap - 2 K
  double lambda_cone = 0.0;   // (lambda_{m+1} + lambda_m) / 2
  double eps_cone = 0.0;      // gap / 2 - K_bound
  bool passed = false;

  double k() const noexcept { return lipschitz.k; }
  double k_bound() const noexcept { return lipschitz.k_bound; }

  friend bool operator==(const GapReport&, const GapReport&) = default;
};

/// Rejects m outside [1, n-1] and a degenerate gap lambda_m == lambda_{m+1}.
GapReport gap_report(const OdeSystem& sys, const SampleRegion& region, std::size_t m = 2,
                     const LipschitzOptions& opts = {});

struct ConeCheck {
  double worst_slack = 0.0;  // max of (V' + 2 lambda V + eps |w|^2) / |w|^2
  int pairs_used = 0;
  int pairs_skipped = 0;     // left the region before the horizon
  int samples = 0;

  friend bool operator==(const ConeCheck&, const ConeCheck&) = default;
};

/// Random trajectory pairs from the region; V(w) = |Q w|^2 - |P w|^2 with P the
/// projector onto the first m eigenvectors of A, derivative by central
/// differences on a uniform grid of the dense output. Requires report.passed.
ConeCheck cone_condition_check(const OdeSystem& sys, const SampleRegion& region,
                               const GapReport& report, int n_pairs, double horizon,
                               unsigned long long seed = 0, int grid_points = 400);

// ------------------------------------------------------------- region scan

struct RegionTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 CSV with CRLF line ends.
std::string to_csv(const RegionTable& table);

struct SatelliteScanPoint {
  double mu1, mu2, mu3;
};

/// (lambda3 - lambda2 > 2K with K = 1) and the Routh-Hurwitz instability
/// inequality for the default control (g'(nu) = -1).
RegionTable satellite_region_scan(const std::vector<double>& mu1, const std::vector<double>& mu2,
                                  const std::vector<double>& mu3);

/// Gap test on the changed coordinates over each pair's default box and
/// instability of the interior equilibrium.
RegionTable cell_region_scan(const std::vector<double>& k, const std::vector<double>& q,
                             double T = 10.0, double L = 1e6, const LipschitzOptions& opts = {});

}  // namespace gapcert
