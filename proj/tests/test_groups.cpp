#include <doctest.h>

#include "symdiv/groups.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace symdiv;

TEST_SUITE("groups") {

TEST_CASE("cyclic and dihedral tables satisfy the axioms") {
  for (int n = 1; n <= 8; ++n) {
    const auto c = make_cyclic(n);
    CHECK(c.order() == n);
    CHECK(verify_group_axioms(c));
    CHECK(c.is_abelian());
    const auto d = make_dihedral(n);
    CHECK(d.order() == 2 * n);
    CHECK(verify_group_axioms(d));
    CHECK(d.is_abelian() == (n <= 2));
  }
  CHECK(make_cyclic(4).name() == "C4");
  CHECK(make_dihedral(4).name() == "D4");
}

TEST_CASE("dihedral relations s^2 = e and s r s = r^-1") {
  const int n = 5;
  const auto d = make_dihedral(n);
  const Element r = 1, s = n;
  CHECK(d.mul(s, s) == d.identity());
  CHECK(d.mul(d.mul(s, r), s) == d.inverse(r));
  Element acc = d.identity();
  for (int k = 0; k < n; ++k) acc = d.mul(acc, r);
  CHECK(acc == d.identity());
}

TEST_CASE("invalid tables are rejected") {
  // Not a Latin square.
  CHECK_THROWS_AS(FiniteGroup({{0, 1}, {0, 1}}), GroupError);
  // Latin square with no identity element.
  CHECK_THROWS_AS(FiniteGroup({{1, 0, 2}, {0, 2, 1}, {2, 1, 0}}), GroupError);
  CHECK_THROWS(make_cyclic(0));
}

TEST_CASE("planar rotation action is a homomorphism into O(d)") {
  for (const auto& g : {make_cyclic(4), make_dihedral(4), make_cyclic(8)}) {
    const auto act = planar_rotation_action(g, 5);
    for (int a = 0; a < g.order(); ++a) {
      const auto& m = act.matrix(a);
      CHECK((m * m.transpose() - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
      for (int b = 0; b < g.order(); ++b) {
        CHECK((act.matrix(a) * act.matrix(b) - act.matrix(g.mul(a, b))).norm() < 1e-12);
      }
    }
  }
  // C4 generator is the quarter turn (x, y) -> (-y, x), integral after snapping.
  const auto c4 = planar_rotation_action(make_cyclic(4), 2);
  Eigen::Matrix2d expect;
  expect << 0, -1, 1, 0;
  CHECK(c4.matrix(1) == Eigen::MatrixXd(expect));
}

TEST_CASE("mismatched matrices are rejected") {
  auto g = make_cyclic(2);
  std::vector<Eigen::MatrixXd> ms = {Eigen::MatrixXd::Identity(2, 2),
                                     Eigen::MatrixXd::Identity(2, 2) * 2.0};
  CHECK_THROWS(LinearAction(g, ms));
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -1, 1, 0;  // order 4, not a C2 representation
  CHECK_THROWS(LinearAction(g, {Eigen::MatrixXd::Identity(2, 2), rot}));
}

TEST_CASE("induced permutations and orbits of the square's vertices plus center") {
  const auto act = planar_rotation_action(make_cyclic(4), 2);
  std::vector<Eigen::VectorXd> pts;
  for (auto [x, y] : {std::pair{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {0.0, 0.0}}) {
    Eigen::VectorXd v(2);
    v << x, y;
    pts.push_back(v);
  }
  const auto perm = permutation_from_linear(act, pts);
  CHECK(perm.state_count() == 5);
  CHECK(perm.perm(1) == std::vector<int>{1, 2, 3, 0, 4});
  const auto orb = orbits(perm);
  REQUIRE(orb.size() == 2);
  CHECK(orb[0] == std::vector<int>{0, 1, 2, 3});
  CHECK(orb[1] == std::vector<int>{4});
  CHECK(orbit_labels(perm) == std::vector<int>{0, 0, 0, 0, 1});
  // Not closed under the action.
  pts.pop_back();
  pts.pop_back();
  CHECK_THROWS(permutation_from_linear(act, pts));
}

TEST_CASE("orbit sizes divide the group order") {
  const auto g = make_dihedral(4);
  const auto act = planar_rotation_action(g, 2);
  std::vector<Eigen::VectorXd> pts;
  // Orbit of a generic point (8), of an axis point (4), and the origin (1).
  for (int s = 0; s < g.order(); ++s) {
    Eigen::VectorXd p(2);
    p << 0.3, 0.7;
    pts.push_back(act.apply(s, p));
  }
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd p(2);
    p << std::cos(k * std::numbers::pi / 2), std::sin(k * std::numbers::pi / 2);
    pts.push_back(p);
  }
  pts.push_back(Eigen::VectorXd::Zero(2));
  const auto perm = permutation_from_linear(act, pts, 1e-9);
  std::multiset<size_t> sizes;
  for (const auto& o : orbits(perm)) sizes.insert(o.size());
  CHECK(sizes == std::multiset<size_t>{1, 4, 8});
}

TEST_CASE("haar sampling is uniform") {
  Rng rng(7);
  const auto g = make_dihedral(3);
  std::vector<int> counts(g.order(), 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[haar_sample(g, rng)];
  // Binomial(n, 1/6): 5 standard deviations.
  const double mean = n / 6.0, sd = std::sqrt(n * (1.0 / 6) * (5.0 / 6));
  for (int c : counts) CHECK(std::abs(c - mean) < 5 * sd);
}

TEST_CASE("small cases of the planar action") {
  const auto c1 = planar_rotation_action(make_cyclic(1), 3);
  CHECK(c1.matrix(0) == Eigen::MatrixXd::Identity(3, 3));
  const auto c4 = planar_rotation_action(make_cyclic(4), 12);
  CHECK((c4.matrix(2) * c4.matrix(2) - c4.matrix(0)).norm() <= 1e-15);
  CHECK(make_cyclic(4).inverse(1) == 3);
  const auto d1 = make_dihedral(1);
  CHECK(d1.order() == 2);
  CHECK(d1.mul(1, 1) == d1.identity());
}

TEST_CASE("the C4 action permutes the mixture centers in one cycle") {
  const auto act = planar_rotation_action(make_cyclic(4), 2);
  std::vector<Eigen::VectorXd> pts;
  for (auto [x, y] : {std::pair{10.0, 10.0}, {-10.0, 10.0}, {-10.0, -10.0}, {10.0, -10.0}}) {
    pts.push_back(Eigen::Vector2d(x, y));
  }
  const auto perm = permutation_from_linear(act, pts);
  CHECK(orbits(perm).size() == 1);
  const auto swap = permutation_from_linear(planar_rotation_action(make_cyclic(2), 2),
                                            {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)});
  CHECK(swap.perm(1) == std::vector<int>{1, 0});
  CHECK(orbits(trivial_action(4)).size() == 4);
}

TEST_CASE("haar samples are invariant under left translation") {
  Rng rng(8);
  const auto g = make_dihedral(4);
  const int n = 40000;
  std::vector<int> plain(g.order(), 0), moved(g.order(), 0);
  const Element s = 5;
  for (int i = 0; i < n; ++i) {
    const Element x = haar_sample(g, rng);
    ++plain[x];
    ++moved[g.mul(s, x)];
  }
  // Left multiplication permutes the histogram, and each cell stays within
  // 5 standard deviations of n / |G|.
  const double mean = static_cast<double>(n) / g.order();
  const double sd = std::sqrt(n * (1.0 / g.order()) * (1.0 - 1.0 / g.order()));
  for (Element x = 0; x < g.order(); ++x) {
    CHECK(moved[g.mul(s, x)] == plain[x]);
    CHECK(std::abs(moved[x] - mean) < 5 * sd);
  }
}

}  // TEST_SUITE
