#include <doctest.h>

#include "symdiv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace symdiv;

namespace {

// C2 exchanging states 0 and 1 of a 4-point space.
PermutationAction swap01() {
  return PermutationAction(make_cyclic(2), {{0, 1, 2, 3}, {1, 0, 2, 3}});
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("validation") {
  CHECK_NOTHROW(DiscreteMeasure(Eigen::Vector3d(0.2, 0.3, 0.5)));
  CHECK_THROWS(DiscreteMeasure(Eigen::Vector3d(0.2, 0.3, 0.6)));
  CHECK_THROWS(DiscreteMeasure(Eigen::Vector3d(-0.1, 0.6, 0.5)));
  CHECK_THROWS(DiscreteMeasure(Eigen::Vector3d(NAN, 0.5, 0.5)));
  const auto m = DiscreteMeasure::from_unnormalized(Eigen::Vector3d(1, 1, 2));
  CHECK(m[2] == doctest::Approx(0.5));
  CHECK(DiscreteMeasure::dirac(3, 1)[1] == 1.0);
  CHECK(DiscreteMeasure::uniform(4)[3] == 0.25);
}

TEST_CASE("symmetrization of a measure under a swap") {
  const DiscreteMeasure p(Eigen::Vector4d(0.7, 0.1, 0.1, 0.1));
  const auto act = swap01();
  const auto s = symmetrize_measure(p, act);
  CHECK(s[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(is_invariant(s, act, 1e-15));
  CHECK_FALSE(is_invariant(p, act, 1e-3));
  CHECK(invariance_defect(p, act) == doctest::Approx(0.6));
}

TEST_CASE("symmetrization is an idempotent, mass preserving projection") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = make_dihedral(3);
  // D3 on the 6 vertices of a hexagon-like orbit: use its regular action.
  std::vector<std::vector<int>> perms(g.order(), std::vector<int>(g.order()));
  for (int s = 0; s < g.order(); ++s) {
    for (int x = 0; x < g.order(); ++x) perms[s][x] = g.mul(s, x);
  }
  const PermutationAction act(g, perms);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd w(6);
    for (int i = 0; i < 6; ++i) w(i) = u(rng);
    const auto p = DiscreteMeasure::from_unnormalized(w);
    const auto s1 = symmetrize_measure(p, act);
    const auto s2 = symmetrize_measure(s1, act);
    CHECK((s1.weights() - s2.weights()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(s1.weights().sum() - 1.0) < 1e-14);
    // Regular action has one orbit: the symmetrization is uniform.
    CHECK((s1.weights().array() - 1.0 / 6).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("log-gamma sampler matches the gamma mean and small-shape tail") {
  Rng rng(11);
  for (double shape : {0.25, 0.5, 2.5}) {
    const int n = 200000;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += std::exp(sample_log_gamma(shape, rng));
    mean /= n;
    const double se = std::sqrt(shape / n);
    CHECK(std::abs(mean - shape) < 5 * se);
  }
}

TEST_CASE("t mixture: centers, plane and radial quantiles") {
  TMixtureConfig cfg;
  const auto c = cfg.centers();
  CHECK(c(0, 0) == 10.0);
  CHECK(c(1, 0) == -10.0);
  CHECK(c(2, 1) == -10.0);
  CHECK(c(3, 1) == -10.0);
  // Quarter turn maps each center to the next.
  const auto act = cfg.c4_action();
  const Eigen::MatrixXd b = cfg.basis();
  for (int k = 0; k < 4; ++k) {
    const Eigen::VectorXd x = b * c.row(k).transpose();
    const Eigen::VectorXd y = b * c.row((k + 1) % 4).transpose();
    CHECK((act.apply(1, x) - y).norm() < 1e-12);
  }

  Rng rng(5);
  const int n = 40000;
  const auto s = sample_t_mixture(cfg, n, rng);
  CHECK(s.dim() == 12);
  CHECK((s.data.rightCols(10).array() == 0.0).all());
  // Planar offset from the nearest center has radial CDF
  // P(|z|^2 / 2 <= r^2 / 2 / ...) = 1 - (1 + r^2 / nu)^(-nu / 2) for a bivariate t.
  std::vector<double> r;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d p = s.data.row(i).head(2).transpose();
    double best = INFINITY;
    for (int k = 0; k < 4; ++k) best = std::min(best, (p - c.row(k).transpose()).norm());
    r.push_back(best);
  }
  std::sort(r.begin(), r.end());
  const double nu = cfg.dof;
  const double r25 = std::sqrt(nu * (std::pow(0.75, -2.0 / nu) - 1.0));
  // Nearest-center radius is the true radius for the bulk of the draws.
  const double below = static_cast<double>(std::lower_bound(r.begin(), r.end(), r25) - r.begin()) / n;
  CHECK(std::abs(below - 0.25) < 0.015);
}

TEST_CASE("t mixture components are equally weighted") {
  TMixtureConfig cfg;
  Rng rng(9);
  const int n = 20000;
  const auto s = sample_t_mixture(cfg, n, rng);
  int quadrant[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const double x = s.data(i, 0), y = s.data(i, 1);
    quadrant[x >= 0 ? (y >= 0 ? 0 : 3) : (y >= 0 ? 1 : 2)]++;
  }
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (int q : quadrant) CHECK(std::abs(q - n / 4.0) < 5 * sd);
}

TEST_CASE("invariant Gaussian noise has an invariant law") {
  const auto act = planar_rotation_action(make_cyclic(4), 10);
  Rng rng(1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
  mean(0) = 3.0;
  const auto s = sample_invariant_noise(mean, act, rng, 40000);
  // The shifted mean is averaged over the orbit {(3,0),(0,3),(-3,0),(0,-3)}.
  const Eigen::VectorXd m = s.data.colwise().mean();
  CHECK(std::abs(m(0)) < 0.06);
  CHECK(std::abs(m(1)) < 0.06);
  // Second moment of the first coordinate: 1 + 9/2.
  CHECK(std::abs(s.data.col(0).squaredNorm() / 40000 - 5.5) < 0.15);
}

TEST_CASE("chi-square median oracle for the noise norm") {
  // ||z||^2 for z ~ N(0, I_10) is chi-square(10); its median solves
  // P(5, m / 2) = 1/2 for the regularized lower gamma P. Gamma(5, x) has the
  // closed form 1 - e^-x sum_{k<5} x^k / k!.
  auto cdf = [](double m) {
    const double x = m / 2.0;
    double term = 1.0, acc = 0.0;
    for (int k = 0; k < 5; ++k) {
      acc += term;
      term *= x / (k + 1);
    }
    return 1.0 - std::exp(-x) * acc;
  };
  double lo = 0.0, hi = 30.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  const auto act = planar_rotation_action(make_cyclic(4), 10);
  Rng rng(21);
  const auto s = sample_invariant_noise(10, act, rng, 20001);
  std::vector<double> sq(s.size());
  for (int i = 0; i < s.size(); ++i) sq[i] = s.data.row(i).squaredNorm();
  std::nth_element(sq.begin(), sq.begin() + 10000, sq.end());
  CHECK(std::abs(sq[10000] - lo) < 0.2);
}

TEST_CASE("augmentation preserves norms and maps rows within the orbit") {
  const auto act = planar_rotation_action(make_dihedral(4), 3);
  Rng rng(2);
  SampleSet s{Eigen::MatrixXd::Random(50, 3), "test"};
  const auto a = augment_samples(s, act, rng);
  for (int i = 0; i < 50; ++i) {
    CHECK(std::abs(a.data.row(i).norm() - s.data.row(i).norm()) < 1e-12);
    bool found = false;
    for (int g = 0; g < 8; ++g) {
      found |= (act.apply(g, s.data.row(i).transpose()) - a.data.row(i).transpose()).norm() < 1e-12;
    }
    CHECK(found);
  }
}

}  // TEST_SUITE
