#pragma once

// Sample-level diagnostics for the toy mixture: which modes are covered, how
// far samples leave the data plane, and whether the sample law is invariant.

#include "symdiv/measures.hpp"

#include <array>

namespace symdiv {

struct ModeReport {
  std::array<double, 4> freq{};  ///< nearest-center shares, centers in C4 orbit order
  double min_mode_freq = 0.0;
  /// Share within the 50% radial quantile of some component (NaN unless requested).
  double r50_fraction = std::numeric_limits<double>::quiet_NaN();
};

/// Projects onto the plane and assigns each sample to the nearest center.
ModeReport mode_occupancy(const SampleSet& samples, const TMixtureConfig& cfg,
                          bool quantile_regions = false);

/// Radius containing mass q of one bivariate Student-t component with unit scale.
double t_radius_quantile(double dof, double q);

struct ResidualReport {
  Eigen::VectorXd norms;
  double median = 0.0;
  double p90 = 0.0;
};

/// ||(I - B B^T) x|| per sample, B the plane basis.
ResidualReport orthogonal_residual(const SampleSet& samples, const TMixtureConfig& cfg);

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> v, double q);

/// V-statistic energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| (rows are samples).
double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct InvarianceReport {
  double ed = 0.0;       ///< ED(X, augment(X))
  double null_lo = 0.0;  ///< 2.5% of split-half EDs
  double null_hi = 0.0;  ///< 97.5% of split-half EDs
  bool within() const { return ed <= null_hi; }
};

/// Throws std::invalid_argument for fewer than 4 samples.
InvarianceReport invariance_error(const SampleSet& samples, const LinearAction& action, Rng& rng,
                                  int resamples = 200);

}  // namespace symdiv
