#pragma once

// Strict positive invariance of a box: the field on the boundary must point
// into the interior. Tangency on edges is resolved by a neighbouring face.

#include <optional>
#include <string>
#include <vector>

#include "gapcert/sysmodel.hpp"

namespace gapcert {

enum class InvarianceVerdict { Strict, WeakResolved, Fail };

std::string to_string(InvarianceVerdict v);

struct FaceReport {
  std::size_t axis = 0;
  bool upper = false;
  double max_outward = 0.0;  // largest outward normal component seen
  int samples = 0;
  int tangent = 0;           // |component| within tolerance
  int resolved = 0;          // tangent points pushed inward by another face
  bool weak = false;

  friend bool operator==(const FaceReport&, const FaceReport&) = default;
};

struct InvarianceReport {
  InvarianceVerdict verdict = InvarianceVerdict::Fail;
  std::vector<FaceReport> faces;
  std::optional<Vec> witness;
  std::string reason;
  int samples = 0;

  friend bool operator==(const InvarianceReport&, const InvarianceReport&) = default;
};

/// Samples every closed face (edges and corners included) on a lattice of
/// at least `samples_per_face` points.
InvarianceReport check_inward(const OdeSystem& sys, const BoxDomain& dom, int samples_per_face = 400);

struct TrappingReport {
  double fraction = 0.0;
  int starts = 0;
  int trapped = 0;
  std::optional<Vec> escape_start;

  friend bool operator==(const TrappingReport&, const TrappingReport&) = default;
};

/// Interior lattice starts; a trajectory escapes if it leaves the closed box
/// by more than 1e-9 relative per coordinate before `horizon`.
TrappingReport empirical_trapping(const OdeSystem& sys, const BoxDomain& dom, int n_starts,
                                  double horizon);

}  // namespace gapcert
