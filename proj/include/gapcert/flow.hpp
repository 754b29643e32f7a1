#pragma once

// Adaptive Dormand-Prince 5(4) integration with dense output, Poincare-section
// cycle location, Floquet multipliers and orbit-level checks.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapcert/numkit.hpp"
#include "gapcert/sysmodel.hpp"

namespace gapcert {

/// Right-hand side of an autonomous ODE; writes dx = f(x).
using Rhs = std::function<void(std::span<const double> x, std::span<double> dx)>;

struct IntegratorOptions {
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 5'000'000;
  /// Non-zero disables adaptivity and uses this constant step.
  double fixed_step = 0.0;
};

/// One accepted step with its 4th-order continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<double> coeffs;  // 5 blocks of n values

  double t1() const noexcept { return t0 + h; }
  std::size_t dim() const noexcept { return coeffs.size() / 5; }
  Vec eval(double t) const;
  void eval_into(double t, std::span<double> out) const;
};

enum class IntegrationStatus { Completed, Stopped, StepUnderflow, NonFinite, MaxSteps };

struct IntegrationResult {
  IntegrationStatus status = IntegrationStatus::Completed;
  double t = 0.0;
  Vec x;
  long accepted = 0;
  long rejected = 0;
  std::string message;

  bool ok() const noexcept {
    return status == IntegrationStatus::Completed || status == IntegrationStatus::Stopped;
  }
};

/// Called after every accepted step; return false to stop integrating.
using StepObserver = std::function<bool(const DenseStep&)>;

/// Integrates x' = rhs(x) from t0 to t1 (t1 > t0).
IntegrationResult integrate_rhs(const Rhs& rhs, Vec x0, double t0, double t1,
                                const IntegratorOptions& opts, const StepObserver& observer = {});

Rhs field_rhs(const OdeSystem& sys);

/// Dense trajectory: the accepted steps plus their local error estimates.
class Trajectory {
 public:
  const std::vector<DenseStep>& steps() const noexcept { return steps_; }
  const std::vector<double>& error_estimates() const noexcept { return errors_; }
  double t_begin() const { return steps_.empty() ? t_begin_ : steps_.front().t0; }
  double t_end() const { return steps_.empty() ? t_begin_ : steps_.back().t1(); }
  Vec eval(double t) const;
  Vec final_state() const;

  IntegrationResult result;

 private:
  friend Trajectory integrate(const OdeSystem&, const Vec&, double, double, double, double);
  friend Trajectory integrate_dense(const Rhs&, const Vec&, double, double,
                                    const IntegratorOptions&);
  std::vector<DenseStep> steps_;
  std::vector<double> errors_;
  Vec x0_;
  double t_begin_ = 0.0;
};

/// Rejects tolerances outside [1e-12, 1e-3]; integration failures are
/// reported in Trajectory::result.
Trajectory integrate(const OdeSystem& sys, const Vec& x0, double t0, double t1, double tol_rel,
                     double tol_abs);
Trajectory integrate_dense(const Rhs& rhs, const Vec& x0, double t0, double t1,
                           const IntegratorOptions& opts);

/// Hyperplane {x : normal . (x - point) = 0}; crossings counted when the
/// signed distance goes from negative to non-negative.
struct Section {
  Vec point;
  Vec normal;
  double signed_distance(std::span<const double> x) const;
};

struct Crossing {
  double t = 0.0;
  Vec x;
};

struct ReturnResult {
  std::optional<Crossing> crossing;
  bool left_domain = false;
  bool timed_out = false;
  IntegrationResult integration;
};

/// First oriented crossing of the section after the orbit has been on its
/// negative side, within t_max. `stay_inside`, when given, aborts the search
/// if the orbit leaves the (slightly inflated) closed box.
ReturnResult first_return(const OdeSystem& sys, const Vec& x0, const Section& section,
                          double t_max, const IntegratorOptions& opts,
                          const BoxDomain* stay_inside = nullptr);

// ------------------------------------------------------------------ cycles

struct CycleSettings {
  double tol_rel = 1e-9;
  double tol_abs = 1e-12;
  double transient_factor = 50.0;    // transient = factor * 2 pi / K1, capped
  double transient_cap = 1e4;
  int max_loops = 2000;              // loop-by-loop approach before shooting
  double shooting_switch = 1e-3;     // start Newton when successive returns < this * diam
  double convergence = 1e-8;         // successive iterates < this * diam
  int max_newton = 40;
  double max_return_time = 1e4;
  int orbit_samples = 1024;
  /// Lipschitz constant of the vector field (lambda_n + K); drives the
  /// transient horizon and the period lower bound.
  double k1 = 0.0;

  friend bool operator==(const CycleSettings&, const CycleSettings&) = default;
};

enum class StabilityVerdict { Stable, Marginal, Unstable };

struct CycleInfo {
  Vec anchor;
  Vec section_normal;
  double period = 0.0;
  std::vector<double> orbit_times;
  std::vector<Vec> orbit;
  std::vector<Complex> multipliers;
  std::size_t trivial_index = 0;
  StabilityVerdict stability = StabilityVerdict::Unstable;
  bool stable = false;
  double period_lower_bound = 0.0;
  double closure_error = 0.0;
  bool inside_domain = false;
  bool graph_check_ok = false;
  double graph_ratio = 0.0;
  double monodromy_det = 0.0;
  double liouville_det = 0.0;
  double liouville_error = 0.0;
  int loops = 0;
  int newton_iterations = 0;

  friend bool operator==(const CycleInfo&, const CycleInfo&) = default;
};

enum class CycleFailure { NoCrossings, LeftDomain, Stalled, IntegratorFailure };

struct CycleSearch {
  std::optional<CycleInfo> cycle;
  std::optional<CycleFailure> failure;
  std::string message;
  std::vector<Vec> last_iterates;
};

/// Finds the cycle reached from the unstable equilibrium x_s (its most
/// unstable eigen-direction) and fills anchor, period, orbit, closure and
/// multipliers (via monodromy()).
CycleSearch locate_cycle(const OdeSystem& sys, const BoxDomain& dom, const Vec& x_s,
                         const CycleSettings& settings);

/// Newton shooting for (p, T) with p on the section through `guess` normal to
/// f(guess). Used by locate_cycle and for re-anchoring an existing cycle.
std::optional<CycleInfo> refine_cycle(const OdeSystem& sys, const BoxDomain& dom, const Vec& guess,
                                      double period_guess, const CycleSettings& settings);

struct Monodromy {
  Matrix matrix;
  std::vector<Complex> multipliers;
  std::size_t trivial_index = 0;  // multiplier closest to 1
  double det = 0.0;               // det of the full-period matrix
  double liouville_det = 0.0;     // exp(integral of trace f')
  /// log|det| as a sum over short segments, each well conditioned; the
  /// full-period determinant underflows for strongly contracting cycles.
  double log_det_segments = 0.0;
  double log_liouville = 0.0;
  /// |exp(log_det_segments - log_liouville) - 1|
  double liouville_error = 0.0;
  StabilityVerdict stability = StabilityVerdict::Unstable;
};

/// Integrates Psi' = f'(x(t)) Psi, Psi(0) = I over one period.
Monodromy monodromy(const OdeSystem& sys, const Vec& anchor, double period,
                    const IntegratorOptions& opts);
Monodromy monodromy(const OdeSystem& sys, const CycleInfo& cycle, double tol_rel = 1e-9,
                    double tol_abs = 1e-12);

/// Non-trivial moduli < 1 - 1e-4: stable; within 1e-4 of 1: marginal.
StabilityVerdict classify_multipliers(const std::vector<Complex>& multipliers,
                                      std::size_t trivial_index);

struct GraphCheck {
  bool ok = false;
  double worst_ratio = 0.0;  // max ||Q d|| / ||P d|| over sample pairs

  friend bool operator==(const GraphCheck&, const GraphCheck&) = default;
};

/// ||Q_m (p - q)|| <= (1 + 1e-6) ||P_m (p - q)|| for all pairs of orbit
/// samples, P_m projecting onto the first m eigenvectors of A.
GraphCheck graph_property_check(const std::vector<Vec>& orbit, const SymSpectrum& spectrum,
                                std::size_t m = 2);

struct ProbeResult {
  Vec start;
  double rate = 0.0;           // fitted slope of log d(t) on the decaying tail
  bool rate_fitted = false;
  double final_distance = 0.0;
  bool converged = false;      // final distance < 1e-4 * diam
  bool other_attractor = false;

  friend bool operator==(const ProbeResult&, const ProbeResult&) = default;
};

struct TrackingReport {
  std::vector<ProbeResult> probes;
  double distance_floor = 0.0;  // nearest-sample error for points on the orbit
  int converged = 0;
  int other_attractors = 0;

  friend bool operator==(const TrackingReport&, const TrackingReport&) = default;
};

/// Distance-to-orbit decay for trajectories started at `starts`.
TrackingReport exponential_tracking_probe(const OdeSystem& sys, const BoxDomain& dom,
                                          const CycleInfo& cycle, const std::vector<Vec>& starts,
                                          double horizon, double tol_rel = 1e-9,
                                          double tol_abs = 1e-12);

/// Same with `n_probes` uniformly random starts in dom.
TrackingReport exponential_tracking_probe(const OdeSystem& sys, const BoxDomain& dom,
                                          const CycleInfo& cycle, int n_probes, double horizon,
                                          unsigned long long seed = 0);

/// Samples of one period starting at the anchor.
void sample_orbit(const OdeSystem& sys, CycleInfo& cycle, const IntegratorOptions& opts);

std::string to_string(StabilityVerdict v);

}  // namespace gapcert
