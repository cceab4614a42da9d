#include "symdiv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace symdiv {

namespace {

Eigen::MatrixXd pairwise(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    d.col(j) = (a.rowwise() - b.row(j)).rowwise().norm();
  }
  return d;
}

// Mean of all entries, accumulated column by column in a fixed order.
double mean_of(const Eigen::MatrixXd& d) { return d.sum() / static_cast<double>(d.size()); }

}  // namespace

double t_radius_quantile(double dof, double q) {
  // P(|T| <= r) = 1 - (1 + r^2 / dof)^(-dof / 2) for a bivariate t.
  return std::sqrt(dof * (std::pow(1.0 - q, -2.0 / dof) - 1.0));
}

ModeReport mode_occupancy(const SampleSet& samples, const TMixtureConfig& cfg,
                          bool quantile_regions) {
  if (samples.dim() != cfg.ambient_dim) {
    throw std::invalid_argument("mode_occupancy: sample dimension does not match the mixture");
  }
  const Eigen::MatrixXd coords = samples.data * cfg.basis();
  const Eigen::Matrix<double, 4, 2> centers = cfg.centers();
  const double r50 = t_radius_quantile(cfg.dof, 0.5);
  std::array<long long, 4> counts{};
  long long inside = 0;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    int best = 0;
    double best_d = INFINITY;
    for (int k = 0; k < 4; ++k) {
      const double d = (coords.row(i) - centers.row(k)).norm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    ++counts[best];
    if (best_d <= r50) ++inside;
  }
  ModeReport r;
  const double n = static_cast<double>(std::max<Eigen::Index>(coords.rows(), 1));
  for (int k = 0; k < 4; ++k) r.freq[k] = counts[k] / n;
  r.min_mode_freq = *std::min_element(r.freq.begin(), r.freq.end());
  if (quantile_regions) r.r50_fraction = inside / n;
  return r;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ResidualReport orthogonal_residual(const SampleSet& samples, const TMixtureConfig& cfg) {
  if (samples.dim() != cfg.ambient_dim) {
    throw std::invalid_argument("orthogonal_residual: sample dimension does not match the mixture");
  }
  const Eigen::MatrixXd b = cfg.basis();
  const Eigen::MatrixXd resid = samples.data - (samples.data * b) * b.transpose();
  ResidualReport r;
  r.norms = resid.rowwise().norm();
  std::vector<double> v(r.norms.data(), r.norms.data() + r.norms.size());
  r.median = quantile(v, 0.5);
  r.p90 = quantile(v, 0.9);
  return r;
}

double energy_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("energy_distance: empty sample");
  const double xy = mean_of(pairwise(x, y));
  const double xx = mean_of(pairwise(x, x));
  const double yy = mean_of(pairwise(y, y));
  return std::max(0.0, 2.0 * xy - xx - yy);
}

InvarianceReport invariance_error(const SampleSet& samples, const LinearAction& action, Rng& rng,
                                  int resamples) {
  const int n = samples.size();
  if (n < 4) throw std::invalid_argument("invariance_error: need at least 4 samples");
  if (samples.dim() != action.dim()) {
    throw std::invalid_argument("invariance_error: sample dimension does not match the action");
  }
  InvarianceReport r;
  const SampleSet aug = augment_samples(samples, action, rng);
  r.ed = energy_distance(samples.data, aug.data);

  // Split-half null from one distance matrix D and the half indicators a, b
  // (odd n leaves one sample out): sums a^T D a, a^T D b, b^T D b.
  const Eigen::MatrixXd d = pairwise(samples.data, samples.data);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const int h = n / 2;
  std::vector<double> null;
  null.reserve(resamples);
  Eigen::VectorXd a(n), b(n);
  for (int t = 0; t < resamples; ++t) {
    std::shuffle(idx.begin(), idx.end(), rng);
    a.setZero();
    b.setZero();
    for (int i = 0; i < h; ++i) {
      a(idx[i]) = 1.0;
      b(idx[h + i]) = 1.0;
    }
    const Eigen::VectorXd da = d * a;
    const double aa = a.dot(da), ab = b.dot(da), bb = b.dot(d * b);
    const double m = static_cast<double>(h) * h;
    null.push_back(std::max(0.0, (2.0 * ab - aa - bb) / m));
  }
  r.null_lo = quantile(null, 0.025);
  r.null_hi = quantile(null, 0.975);
  return r;
}

}  // namespace symdiv
