#include "symdiv/exactdiv.hpp"

#include <algorithm>
#include <cmath>

namespace symdiv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(const DiscreteMeasure& q, const DiscreteMeasure& p, const char* who) {
  if (q.size() != p.size()) throw std::invalid_argument(std::string(who) + ": size mismatch");
}
}  // namespace

MetricSpace::MetricSpace(Eigen::MatrixXd d) : d_(std::move(d)) {
  const Eigen::Index n = d_.rows();
  if (n == 0 || d_.cols() != n) throw std::invalid_argument("MetricSpace: square matrix required");
  if (!d_.allFinite()) throw std::invalid_argument("MetricSpace: non-finite distance");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(d_(i, i)) > 1e-12) throw std::invalid_argument("MetricSpace: nonzero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (d_(i, j) < 0.0) throw std::invalid_argument("MetricSpace: negative distance");
      if (std::abs(d_(i, j) - d_(j, i)) > 1e-12) {
        throw std::invalid_argument("MetricSpace: asymmetric distance");
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        if (d_(i, k) > d_(i, j) + d_(j, k) + 1e-9) {
          throw std::invalid_argument("MetricSpace: triangle inequality violated");
        }
      }
    }
  }
}

MetricSpace MetricSpace::euclidean(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (points.row(i) - points.row(j)).norm();
  }
  return MetricSpace(std::move(d));
}

bool MetricSpace::is_isometric(const PermutationAction& action, double tol) const {
  if (action.state_count() != size()) return false;
  for (int s = 0; s < action.group().order(); ++s) {
    for (int i = 0; i < size(); ++i) {
      for (int j = 0; j < size(); ++j) {
        if (std::abs(d_(action.apply(s, i), action.apply(s, j)) - d_(i, j)) > tol) return false;
      }
    }
  }
  return true;
}

DivergenceReport f_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p,
                              const FDivGenerator& gen) {
  require_same_size(q, p, "f_divergence");
  DivergenceReport r;
  const int n = q.size();
  r.witness = Eigen::VectorXd::Zero(n);
  double primal = 0.0;
  for (int i = 0; i < n; ++i) {
    if (p[i] > 0.0) {
      primal += p[i] * gen.f(q[i] / p[i]);
      double w = gen.fprime(q[i] / p[i]);
      // f'(0) = -inf for KL; a large negative value has f* ~ 0.
      if (!std::isfinite(w)) w = -700.0;
      r.witness(i) = w;
    } else if (q[i] > 0.0) {
      const double slope = gen.recession_slope();
      primal += slope == kInf ? kInf : q[i] * slope;
    }
  }
  r.value = primal;
  if (std::isfinite(primal)) {
    double dual = 0.0;
    for (int i = 0; i < n; ++i) {
      if (q[i] > 0.0) dual += q[i] * r.witness(i);
      if (p[i] > 0.0) dual -= p[i] * gen.conj(r.witness(i));
    }
    r.dual_value = dual;
    r.gap = std::abs(primal - dual);
  } else {
    r.gap = 0.0;
  }
  return r;
}

DivergenceReport tv_ipm(const DiscreteMeasure& q, const DiscreteMeasure& p) {
  require_same_size(q, p, "tv_ipm");
  DivergenceReport r;
  const Eigen::VectorXd diff = q.weights() - p.weights();
  r.witness = diff.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  r.value = diff.cwiseAbs().sum();
  r.dual_value = diff.dot(r.witness);
  r.gap = r.value - r.dual_value;
  return r;
}

Eigen::MatrixXd symmetrized_cost(const Eigen::MatrixXd& cost, const PermutationAction& action) {
  const int n = action.state_count();
  if (cost.rows() != n || cost.cols() != n) {
    throw std::invalid_argument("symmetrized_cost: shape mismatch");
  }
  const int m = action.group().order();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      double acc = 0.0;
      for (int s = 0; s < m; ++s) {
        for (int t = 0; t < m; ++t) acc += cost(action.apply(s, x), action.apply(t, y));
      }
      out(x, y) = acc / (static_cast<double>(m) * m);
    }
  }
  return out;
}

Eigen::MatrixXd invariant_kernel(const Eigen::MatrixXd& kernel, const PermutationAction& action) {
  const int n = action.state_count();
  if (kernel.rows() != n || kernel.cols() != n) {
    throw std::invalid_argument("invariant_kernel: shape mismatch");
  }
  const int m = action.group().order();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < m; ++s) {
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) out(x, y) += kernel(action.apply(s, x), action.apply(s, y));
    }
  }
  return out / m;
}

Eigen::MatrixXd gaussian_kernel(const Eigen::MatrixXd& points, double bandwidth) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      k(i, j) = std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    }
  }
  return k;
}

bool is_psd(const Eigen::MatrixXd& kernel, double tol) {
  if (kernel.rows() != kernel.cols()) return false;
  if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernel, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

double mmd_squared(const DiscreteMeasure& q, const DiscreteMeasure& p,
                   const Eigen::MatrixXd& kernel) {
  require_same_size(q, p, "mmd");
  if (kernel.rows() != q.size() || kernel.cols() != q.size()) {
    throw std::invalid_argument("mmd: kernel shape mismatch");
  }
  if (!is_psd(kernel)) throw std::invalid_argument("mmd: kernel is not positive semidefinite");
  const Eigen::VectorXd diff = q.weights() - p.weights();
  return std::max(0.0, diff.dot(kernel * diff));
}

double mmd(const DiscreteMeasure& q, const DiscreteMeasure& p, const Eigen::MatrixXd& kernel) {
  return std::sqrt(mmd_squared(q, p, kernel));
}

DiscreteMeasure push_to_classes(const DiscreteMeasure& p, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != p.size()) {
    throw std::invalid_argument("push_to_classes: label count mismatch");
  }
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  for (int x = 0; x < p.size(); ++x) w(labels[x]) += p[x];
  w /= w.sum();
  return DiscreteMeasure(std::move(w));
}

QuotientSpace quotient(const MetricSpace& metric, const std::vector<DiscreteMeasure>& measures,
                       const PermutationAction& action) {
  if (!metric.is_isometric(action)) {
    throw std::invalid_argument("quotient: action is not an isometry of the metric");
  }
  auto classes = orbits(action);
  auto labels = orbit_labels(action);
  const int k = static_cast<int>(classes.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      double best = kInf;
      for (int x : classes[a]) {
        for (int y : classes[b]) best = std::min(best, metric(x, y));
      }
      d(a, b) = best;
    }
  }
  std::vector<DiscreteMeasure> pushed;
  pushed.reserve(measures.size());
  for (const auto& m : measures) pushed.push_back(push_to_classes(m, labels));
  return QuotientSpace{MetricSpace(std::move(d)), std::move(pushed), std::move(labels),
                       std::move(classes)};
}

}  // namespace symdiv
