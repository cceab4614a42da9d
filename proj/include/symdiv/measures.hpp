#pragma once

// Discrete probability measures, sample sets, measure symmetrization and the
// heavy-tailed planar t-mixture data source.

#include "symdiv/groups.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace symdiv {

class DiscreteMeasure {
 public:
  /// Weights must be nonnegative and sum to 1 within 1e-12. `points` (one row
  /// per state) is an optional embedding.
  explicit DiscreteMeasure(Eigen::VectorXd weights,
                           std::optional<Eigen::MatrixXd> points = std::nullopt);

  /// Normalizes nonnegative weights before validation.
  static DiscreteMeasure from_unnormalized(const Eigen::VectorXd& mass);
  static DiscreteMeasure uniform(int states);
  static DiscreteMeasure dirac(int states, int at);

  int size() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double operator[](int i) const { return weights_(i); }
  const std::optional<Eigen::MatrixXd>& points() const { return points_; }

  double expect(const Eigen::VectorXd& f) const { return weights_.dot(f); }

 private:
  Eigen::VectorXd weights_;
  std::optional<Eigen::MatrixXd> points_;
};

/// n x d matrix of samples, one per row.
struct SampleSet {
  Eigen::MatrixXd data;
  std::string provenance;

  int size() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

/// The four-mode planar Student-t mixture embedded in R^ambient_dim.
struct TMixtureConfig {
  double offset = 10.0;  ///< centers at (+-offset, +-offset)
  double dof = 0.5;
  int ambient_dim = 12;
  /// ambient_dim x 2 orthonormal plane basis; empty means the first two axes.
  Eigen::MatrixXd plane;

  Eigen::MatrixXd basis() const;
  /// Centers in plane coordinates, ordered as a C_4 orbit:
  /// (o,o), (-o,o), (-o,-o), (o,-o).
  Eigen::Matrix<double, 4, 2> centers() const;
  /// C_4 rotating the plane by quarter turns.
  LinearAction c4_action() const;
};

/// w'_j = (1/|G|) sum_s w_{perm_s^-1(j)}.
DiscreteMeasure symmetrize_measure(const DiscreteMeasure& p, const PermutationAction& action);

bool is_invariant(const DiscreteMeasure& p, const PermutationAction& action, double tol);
/// max_s || P o perm_s^-1 - P ||_inf
double invariance_defect(const DiscreteMeasure& p, const PermutationAction& action);

/// Each row is transformed by an independent Haar-distributed element.
SampleSet augment_samples(const SampleSet& s, const LinearAction& action, Rng& rng);

/// Gamma(shape, scale) by Marsaglia-Tsang, with the U^(1/shape) boost for
/// shape < 1. Returns log of the draw so tiny values stay representable.
double sample_log_gamma(double shape, Rng& rng);

SampleSet sample_t_mixture(const TMixtureConfig& cfg, int n, Rng& rng);

/// Standard Gaussian rows in R^dim, each transformed by an independent Haar
/// element of `action`.
SampleSet sample_invariant_noise(int dim, const LinearAction& action, Rng& rng, int n);

/// Gaussian rows shifted by `mean` and then Haar-transformed.
SampleSet sample_invariant_noise(const Eigen::VectorXd& mean, const LinearAction& action,
                                 Rng& rng, int n);

}  // namespace symdiv
