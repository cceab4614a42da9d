#include "symdiv/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace symdiv {

namespace {

bool is_permutation_of_range(const std::vector<int>& row, int m) {
  std::vector<char> seen(m, 0);
  for (int v : row) {
    if (v < 0 || v >= m || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

// Rotation/reflection entries such as cos(pi/2) come out as 6e-17; snapping
// them keeps C_4 matrices integral.
double snap(double v) {
  double r = std::round(v);
  return std::abs(v - r) < 1e-14 ? r : v;
}

}  // namespace

FiniteGroup::FiniteGroup(std::vector<std::vector<Element>> cayley, GroupKind kind,
                         int n)
    : cayley_(std::move(cayley)), kind_(kind), n_(n) {
  const int m = order();
  if (m == 0) throw GroupError("group must have at least one element");
  for (const auto& row : cayley_) {
    if (static_cast<int>(row.size()) != m || !is_permutation_of_range(row, m)) {
      throw GroupError("cayley rows must be permutations of 0..m-1");
    }
  }
  for (int j = 0; j < m; ++j) {
    std::vector<int> col(m);
    for (int i = 0; i < m; ++i) col[i] = cayley_[i][j];
    if (!is_permutation_of_range(col, m)) {
      throw GroupError("cayley columns must be permutations of 0..m-1");
    }
  }
  identity_ = -1;
  for (int e = 0; e < m && identity_ < 0; ++e) {
    bool ok = true;
    for (int a = 0; a < m && ok; ++a) ok = cayley_[e][a] == a && cayley_[a][e] == a;
    if (ok) identity_ = e;
  }
  if (identity_ < 0) throw GroupError("cayley table has no identity");
  inverses_.assign(m, -1);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (cayley_[a][b] == identity_ && cayley_[b][a] == identity_) inverses_[a] = b;
    }
    if (inverses_[a] < 0) throw GroupError("element without two-sided inverse");
  }
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        if (cayley_[cayley_[a][b]][c] != cayley_[a][cayley_[b][c]]) {
          throw GroupError("cayley table is not associative");
        }
      }
    }
  }
}

std::string FiniteGroup::name() const {
  switch (kind_) {
    case GroupKind::kCyclic: return "C" + std::to_string(n_);
    case GroupKind::kDihedral: return "D" + std::to_string(n_);
    case GroupKind::kCustom: break;
  }
  return "G" + std::to_string(order());
}

bool FiniteGroup::is_abelian() const {
  for (int a = 0; a < order(); ++a) {
    for (int b = a + 1; b < order(); ++b) {
      if (mul(a, b) != mul(b, a)) return false;
    }
  }
  return true;
}

bool verify_group_axioms(const FiniteGroup& g) {
  const int m = g.order();
  for (int a = 0; a < m; ++a) {
    if (g.mul(g.identity(), a) != a || g.mul(a, g.identity()) != a) return false;
    if (g.mul(a, g.inverse(a)) != g.identity()) return false;
    if (g.mul(g.inverse(a), a) != g.identity()) return false;
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) return false;
      }
    }
  }
  return true;
}

FiniteGroup make_cyclic(int n) {
  if (n < 1) throw GroupError("make_cyclic: n must be >= 1");
  std::vector<std::vector<Element>> t(n, std::vector<Element>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  }
  return FiniteGroup(std::move(t), GroupKind::kCyclic, n);
}

FiniteGroup make_dihedral(int n) {
  if (n < 1) throw GroupError("make_dihedral: n must be >= 1");
  // Uses r^a s = s r^{-a}.
  auto mod = [n](int k) { return ((k % n) + n) % n; };
  const int m = 2 * n;
  std::vector<std::vector<Element>> t(m, std::vector<Element>(m));
  for (int x = 0; x < m; ++x) {
    for (int y = 0; y < m; ++y) {
      const bool xs = x >= n, ys = y >= n;
      const int a = x % n, b = y % n;
      if (!xs && !ys) t[x][y] = mod(a + b);
      else if (!xs && ys) t[x][y] = n + mod(b - a);
      else if (xs && !ys) t[x][y] = n + mod(a + b);
      else t[x][y] = mod(b - a);
    }
  }
  return FiniteGroup(std::move(t), GroupKind::kDihedral, n);
}

LinearAction::LinearAction(FiniteGroup group, std::vector<Eigen::MatrixXd> matrices)
    : group_(std::move(group)), matrices_(std::move(matrices)) {
  if (static_cast<int>(matrices_.size()) != group_.order()) {
    throw GroupError("LinearAction: need one matrix per group element");
  }
  dim_ = static_cast<int>(matrices_.front().rows());
  for (const auto& m : matrices_) {
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw GroupError("LinearAction: matrices must be square of equal size");
    }
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim_, dim_);
    if ((m.transpose() * m - eye).cwiseAbs().maxCoeff() > 1e-12) {
      throw GroupError("LinearAction: matrices must be orthogonal");
    }
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim_, dim_);
  if ((matrices_[group_.identity()] - eye).cwiseAbs().maxCoeff() > 1e-12) {
    throw GroupError("LinearAction: identity element must act as identity");
  }
  for (int a = 0; a < group_.order(); ++a) {
    for (int b = 0; b < group_.order(); ++b) {
      const Eigen::MatrixXd prod = matrices_[a] * matrices_[b];
      if ((prod - matrices_[group_.mul(a, b)]).cwiseAbs().maxCoeff() > 1e-12) {
        throw GroupError("LinearAction: matrices are not a homomorphism");
      }
    }
  }
}

PermutationAction::PermutationAction(FiniteGroup group,
                                     std::vector<std::vector<int>> perms)
    : group_(std::move(group)), perms_(std::move(perms)) {
  if (static_cast<int>(perms_.size()) != group_.order()) {
    throw GroupError("PermutationAction: need one permutation per group element");
  }
  state_count_ = static_cast<int>(perms_.front().size());
  for (const auto& p : perms_) {
    if (static_cast<int>(p.size()) != state_count_ ||
        !is_permutation_of_range(p, state_count_)) {
      throw GroupError("PermutationAction: invalid permutation");
    }
  }
  for (int x = 0; x < state_count_; ++x) {
    if (perms_[group_.identity()][x] != x) {
      throw GroupError("PermutationAction: identity must fix every state");
    }
  }
  for (int a = 0; a < group_.order(); ++a) {
    for (int b = 0; b < group_.order(); ++b) {
      const auto& pab = perms_[group_.mul(a, b)];
      for (int x = 0; x < state_count_; ++x) {
        if (perms_[a][perms_[b][x]] != pab[x]) {
          throw GroupError("PermutationAction: composition inconsistent");
        }
      }
    }
  }
}

PermutationAction trivial_action(int states) {
  std::vector<int> id(states);
  for (int i = 0; i < states; ++i) id[i] = i;
  return PermutationAction(make_cyclic(1), {id});
}

LinearAction planar_rotation_action(const FiniteGroup& group, int ambient_dim,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v) {
  if (ambient_dim < 2) throw GroupError("planar_rotation_action: need d >= 2");
  if (u.size() != ambient_dim || v.size() != ambient_dim) {
    throw GroupError("planar_rotation_action: plane vectors must have length d");
  }
  if (std::abs(u.norm() - 1.0) > 1e-10 || std::abs(v.norm() - 1.0) > 1e-10 ||
      std::abs(u.dot(v)) > 1e-10) {
    throw GroupError("planar_rotation_action: plane vectors must be orthonormal");
  }
  if (group.kind() == GroupKind::kCustom) {
    throw GroupError("planar_rotation_action: group must be C_n or D_n");
  }
  const int n = group.n();
  Eigen::MatrixXd basis(ambient_dim, 2);
  basis.col(0) = u;
  basis.col(1) = v;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(ambient_dim, ambient_dim);
  const Eigen::MatrixXd complement = eye - basis * basis.transpose();

  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(group.order());
  for (int e = 0; e < group.order(); ++e) {
    const int k = e % n;
    const bool reflect = e >= n;
    const double theta = 2.0 * std::numbers::pi * k / n;
    Eigen::Matrix2d rot;
    rot << snap(std::cos(theta)), snap(-std::sin(theta)), snap(std::sin(theta)),
        snap(std::cos(theta));
    Eigen::Matrix2d block = rot;
    if (reflect) {
      Eigen::Matrix2d s;
      s << 1, 0, 0, -1;
      block = s * rot;
    }
    Eigen::MatrixXd m = complement + basis * block * basis.transpose();
    m = m.unaryExpr([](double x) { return snap(x); });
    mats.push_back(std::move(m));
  }
  return LinearAction(group, std::move(mats));
}

LinearAction planar_rotation_action(const FiniteGroup& group, int ambient_dim) {
  if (ambient_dim < 2) throw GroupError("planar_rotation_action: need d >= 2");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ambient_dim);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ambient_dim);
  u(0) = 1.0;
  v(1) = 1.0;
  return planar_rotation_action(group, ambient_dim, u, v);
}

PermutationAction permutation_from_linear(const LinearAction& action,
                                          const std::vector<Eigen::VectorXd>& points,
                                          double tol) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw GroupError("permutation_from_linear: empty point set");
  for (const auto& p : points) {
    if (p.size() != action.dim()) {
      throw GroupError("permutation_from_linear: point dimension mismatch");
    }
  }
  std::vector<std::vector<int>> perms(action.group().order(), std::vector<int>(n));
  for (int s = 0; s < action.group().order(); ++s) {
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd img = action.apply(s, points[i]);
      int match = -1;
      for (int j = 0; j < n; ++j) {
        if ((img - points[j]).norm() <= tol) {
          if (match >= 0) {
            throw GroupError("permutation_from_linear: ambiguous match within tolerance");
          }
          match = j;
        }
      }
      if (match < 0) {
        throw GroupError("permutation_from_linear: point set not closed under the action");
      }
      perms[s][i] = match;
    }
  }
  return PermutationAction(action.group(), std::move(perms));
}

Element haar_sample(const FiniteGroup& group, Rng& rng) {
  std::uniform_int_distribution<int> dist(0, group.order() - 1);
  return dist(rng);
}

std::vector<int> orbit_labels(const PermutationAction& action) {
  const int n = action.state_count();
  std::vector<int> label(n, -1);
  int next = 0;
  for (int x = 0; x < n; ++x) {
    if (label[x] >= 0) continue;
    for (int s = 0; s < action.group().order(); ++s) label[action.apply(s, x)] = next;
    ++next;
  }
  return label;
}

std::vector<std::vector<int>> orbits(const PermutationAction& action) {
  const auto label = orbit_labels(action);
  const int count = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  std::vector<std::vector<int>> out(count);
  for (int x = 0; x < static_cast<int>(label.size()); ++x) out[label[x]].push_back(x);
  return out;
}

}  // namespace symdiv
