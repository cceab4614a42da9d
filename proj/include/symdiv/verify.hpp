#pragma once

// Randomized checks of the symmetrization identities on small finite
// instances. Each check reports the largest discrepancy seen per family and
// never throws on a failed identity.

#include "symdiv/exactdiv.hpp"

#include <deque>
#include <set>
#include <string>
#include <vector>

namespace symdiv {

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kClosedFormTol = 1e-8;
inline constexpr double kTvTol = 1e-10;
inline constexpr double kLpTol = 1e-6;
inline constexpr double kIterativeTol = 1e-3;
inline constexpr double kSinkhornTol = 1e-4;
inline constexpr double kDataProcessingTol = 1e-9;
inline constexpr double kLambdaTol = 1e-8;
inline constexpr double kShiftTol = 1e-9;
/// Full divergence must reach this on degenerate (mode-collapse) instances.
inline constexpr double kWitnessGap = 1e-3;

struct VerifyRow {
  std::string family;
  std::string identity;
  int cases = 0;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;

  bool passed() const { return max_discrepancy <= tolerance; }
  /// Records one case; NaN counts as an infinite discrepancy.
  void record(double discrepancy);
};

struct VerifyReport {
  // deque: row() hands out references that must survive later insertions.
  std::deque<VerifyRow> rows;

  bool passed() const;
  VerifyRow& row(const std::string& family, const std::string& identity, double tolerance);
  void append(const VerifyReport& other);
};

/// Finite point cloud in the plane closed under a planar C_n / D_n action.
struct SymmetricInstance {
  LinearAction linear;
  PermutationAction action;
  Eigen::MatrixXd points;
  MetricSpace metric;
};

/// Union of orbits of random points (generic, on a reflection axis, or the
/// origin) for a group drawn from {C2, C4, C8, D2, D4}, with 2 <= |X| <= max_states.
SymmetricInstance random_symmetric_instance(Rng& rng, int max_states);

/// Uniform(0,1) weights, each zeroed with probability `zero_prob` (at least
/// one state keeps positive mass), normalized.
DiscreteMeasure random_measure(int states, Rng& rng, double zero_prob = 0.0);

/// Families: "f", "tv", "w1", "mmd", "sinkhorn". Unknown names are ignored.
using FamilySet = std::set<std::string>;
FamilySet all_families();

/// Projection, duality, conditional-expectation and Jensen identities of
/// function and measure symmetrization.
VerifyReport verify_lemma1(Rng& rng, int trials);
/// Invariant (Q, P): unrestricted divergence equals the invariant-class one.
VerifyReport verify_theorem1(Rng& rng, int trials, const FamilySet& families);
/// Arbitrary (Q, P): invariant-class divergence equals the divergence of the
/// symmetrized pair, plus the degeneracy witness Q = S[P] != P.
VerifyReport verify_mode_collapse_identity(Rng& rng, int trials, const FamilySet& families);
/// Coarse-graining kernels: class-restricted divergences and data processing.
VerifyReport verify_kernel_theorem(Rng& rng, int trials);
/// Primal/dual bracket, sandwich bounds and invariance of the optimal eta for
/// the Lipschitz (f, Gamma)-divergence.
VerifyReport verify_infconv(Rng& rng, int trials);
/// Lambda_KL = log E exp and shift equivariance of Lambda.
VerifyReport verify_lambda(Rng& rng, int trials);

/// The full suite for the named families; additional names "lemma1",
/// "kernel", "infconv", "lambda" select the corresponding verifiers.
VerifyReport run_verification(Rng& rng, int trials, const FamilySet& families);

}  // namespace symdiv
