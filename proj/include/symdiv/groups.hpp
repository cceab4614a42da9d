#pragma once

// Finite groups stored by Cayley table, their actions on R^d and on finite
// state spaces, Haar sampling and orbit decomposition.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace symdiv {

using Rng = std::mt19937_64;

/// Index of a group element inside its Cayley table.
using Element = int;

class GroupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GroupKind { kCyclic, kDihedral, kCustom };

class FiniteGroup {
 public:
  /// Validates the table: rows and columns are permutations, an identity and
  /// inverses exist, and the product is associative.
  explicit FiniteGroup(std::vector<std::vector<Element>> cayley,
                       GroupKind kind = GroupKind::kCustom, int n = 0);

  int order() const { return static_cast<int>(cayley_.size()); }
  Element identity() const { return identity_; }
  Element mul(Element a, Element b) const { return cayley_[a][b]; }
  Element inverse(Element a) const { return inverses_[a]; }
  const std::vector<std::vector<Element>>& cayley() const { return cayley_; }

  GroupKind kind() const { return kind_; }
  /// The n in C_n / D_n, 0 for custom tables.
  int n() const { return n_; }
  std::string name() const;

  bool is_abelian() const;

 private:
  std::vector<std::vector<Element>> cayley_;
  std::vector<Element> inverses_;
  Element identity_ = 0;
  GroupKind kind_;
  int n_;
};

/// Brute-force check of the group axioms over all pairs and triples.
bool verify_group_axioms(const FiniteGroup& group);

FiniteGroup make_cyclic(int n);

/// D_n of order 2n. Index k < n is the rotation r^k, index n + k is s r^k.
FiniteGroup make_dihedral(int n);

/// One orthogonal d x d matrix per group element, T_a T_b = T_{ab}.
class LinearAction {
 public:
  LinearAction(FiniteGroup group, std::vector<Eigen::MatrixXd> matrices);

  const FiniteGroup& group() const { return group_; }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& matrix(Element s) const { return matrices_[s]; }
  const std::vector<Eigen::MatrixXd>& matrices() const { return matrices_; }

  Eigen::VectorXd apply(Element s, const Eigen::VectorXd& x) const {
    return matrices_[s] * x;
  }

 private:
  FiniteGroup group_;
  int dim_;
  std::vector<Eigen::MatrixXd> matrices_;
};

/// perm(s)[x] is the state T_s(x).
class PermutationAction {
 public:
  PermutationAction(FiniteGroup group, std::vector<std::vector<int>> perms);

  const FiniteGroup& group() const { return group_; }
  int state_count() const { return state_count_; }
  int apply(Element s, int x) const { return perms_[s][x]; }
  const std::vector<int>& perm(Element s) const { return perms_[s]; }

 private:
  FiniteGroup group_;
  int state_count_;
  std::vector<std::vector<int>> perms_;
};

/// The trivial action of the one-element group on `states` points.
PermutationAction trivial_action(int states);

/// C_n or D_n acting by rotations (and the reflection across `u` for D_n)
/// inside span(u, v), identity on the orthogonal complement.
LinearAction planar_rotation_action(const FiniteGroup& group, int ambient_dim,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v);

/// Convenience: plane spanned by the first two coordinate axes.
LinearAction planar_rotation_action(const FiniteGroup& group, int ambient_dim);

/// Induces the permutation action on a point set closed under `action`.
/// Each image must match exactly one point within `tol`.
PermutationAction permutation_from_linear(const LinearAction& action,
                                          const std::vector<Eigen::VectorXd>& points,
                                          double tol = 1e-9);

Element haar_sample(const FiniteGroup& group, Rng& rng);

/// Orbits sorted by smallest member; members sorted ascending.
std::vector<std::vector<int>> orbits(const PermutationAction& action);

/// orbit_labels[x] = index of x's orbit in orbits(action).
std::vector<int> orbit_labels(const PermutationAction& action);

}  // namespace symdiv
