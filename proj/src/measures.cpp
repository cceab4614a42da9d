#include "symdiv/measures.hpp"

#include <cmath>
#include <sstream>

namespace symdiv {

DiscreteMeasure::DiscreteMeasure(Eigen::VectorXd weights,
                                 std::optional<Eigen::MatrixXd> points)
    : weights_(std::move(weights)), points_(std::move(points)) {
  if (weights_.size() == 0) throw std::invalid_argument("DiscreteMeasure: empty weights");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_(i)) || weights_(i) < 0.0) {
      throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
    }
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
  }
  if (points_ && points_->rows() != weights_.size()) {
    throw std::invalid_argument("DiscreteMeasure: one embedding point per state required");
  }
}

DiscreteMeasure DiscreteMeasure::from_unnormalized(const Eigen::VectorXd& mass) {
  const double total = mass.sum();
  if (!(total > 0.0)) throw std::invalid_argument("DiscreteMeasure: zero total mass");
  return DiscreteMeasure(mass / total);
}

DiscreteMeasure DiscreteMeasure::uniform(int states) {
  return DiscreteMeasure(Eigen::VectorXd::Constant(states, 1.0 / states));
}

DiscreteMeasure DiscreteMeasure::dirac(int states, int at) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(states);
  w(at) = 1.0;
  return DiscreteMeasure(std::move(w));
}

Eigen::MatrixXd TMixtureConfig::basis() const {
  if (plane.size() != 0) return plane;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ambient_dim, 2);
  b(0, 0) = 1.0;
  b(1, 1) = 1.0;
  return b;
}

Eigen::Matrix<double, 4, 2> TMixtureConfig::centers() const {
  Eigen::Matrix<double, 4, 2> c;
  c << offset, offset, -offset, offset, -offset, -offset, offset, -offset;
  return c;
}

LinearAction TMixtureConfig::c4_action() const {
  const Eigen::MatrixXd b = basis();
  return planar_rotation_action(make_cyclic(4), ambient_dim, b.col(0), b.col(1));
}

DiscreteMeasure symmetrize_measure(const DiscreteMeasure& p, const PermutationAction& action) {
  if (action.state_count() != p.size()) {
    throw std::invalid_argument("symmetrize_measure: state count mismatch");
  }
  const int m = action.group().order();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.size());
  for (int s = 0; s < m; ++s) {
    const auto& perm = action.perm(s);
    for (int i = 0; i < p.size(); ++i) out(perm[i]) += p[i];
  }
  out /= m;
  return DiscreteMeasure(std::move(out), p.points());
}

double invariance_defect(const DiscreteMeasure& p, const PermutationAction& action) {
  if (action.state_count() != p.size()) {
    throw std::invalid_argument("is_invariant: state count mismatch");
  }
  double worst = 0.0;
  for (int s = 0; s < action.group().order(); ++s) {
    const auto& perm = action.perm(s);
    // (P o T_s^-1)(perm[i]) = P(i)
    for (int i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - p[perm[i]]));
  }
  return worst;
}

bool is_invariant(const DiscreteMeasure& p, const PermutationAction& action, double tol) {
  return invariance_defect(p, action) <= tol;
}

SampleSet augment_samples(const SampleSet& s, const LinearAction& action, Rng& rng) {
  if (s.dim() != action.dim()) {
    throw std::invalid_argument("augment_samples: dimension mismatch");
  }
  SampleSet out{Eigen::MatrixXd(s.data.rows(), s.data.cols()),
                s.provenance + "+augment(" + action.group().name() + ")"};
  for (Eigen::Index i = 0; i < s.data.rows(); ++i) {
    const Element e = haar_sample(action.group(), rng);
    out.data.row(i) = (action.matrix(e) * s.data.row(i).transpose()).transpose();
  }
  return out;
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("sample_log_gamma: shape must be > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double boost = 0.0;
  double a = shape;
  if (a < 1.0) {
    double u;
    do u = unif(rng); while (u <= 0.0);
    boost = std::log(u) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = unif(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))) {
      return std::log(d * v) + boost;
    }
  }
}

SampleSet sample_t_mixture(const TMixtureConfig& cfg, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_t_mixture: n must be >= 1");
  const Eigen::MatrixXd basis = cfg.basis();
  if (basis.rows() != cfg.ambient_dim || basis.cols() != 2) {
    throw std::invalid_argument("sample_t_mixture: plane basis must be ambient_dim x 2");
  }
  const auto centers = cfg.centers();
  std::uniform_int_distribution<int> mode(0, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double nu = cfg.dof;
  SampleSet out{Eigen::MatrixXd(n, cfg.ambient_dim), ""};
  for (int i = 0; i < n; ++i) {
    const int k = mode(rng);
    const double z0 = normal(rng);
    const double z1 = normal(rng);
    // chi^2_nu = 2 * Gamma(nu / 2, 1)
    const double log_chi2 = std::log(2.0) + sample_log_gamma(nu / 2.0, rng);
    const double scale = std::exp(0.5 * (std::log(nu) - log_chi2));
    Eigen::Vector2d p(centers(k, 0) + z0 * scale, centers(k, 1) + z1 * scale);
    out.data.row(i) = (basis * p).transpose();
  }
  std::ostringstream tag;
  tag << "t_mixture(dof=" << nu << ",offset=" << cfg.offset << ",d=" << cfg.ambient_dim
      << ")";
  out.provenance = tag.str();
  return out;
}

SampleSet sample_invariant_noise(const Eigen::VectorXd& mean, const LinearAction& action,
                                 Rng& rng, int n) {
  const int dim = static_cast<int>(mean.size());
  if (dim != action.dim()) {
    throw std::invalid_argument("sample_invariant_noise: dimension mismatch");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleSet out{Eigen::MatrixXd(n, dim), "invariant_noise(" + action.group().name() + ")"};
  Eigen::VectorXd x(dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) x(j) = mean(j) + normal(rng);
    const Element e = haar_sample(action.group(), rng);
    out.data.row(i) = (action.matrix(e) * x).transpose();
  }
  return out;
}

SampleSet sample_invariant_noise(int dim, const LinearAction& action, Rng& rng, int n) {
  return sample_invariant_noise(Eigen::VectorXd::Zero(dim), action, rng, n);
}

}  // namespace symdiv
