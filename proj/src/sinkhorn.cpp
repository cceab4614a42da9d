#include "symdiv/exactdiv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symdiv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  double mx = -kInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == -kInf) return -kInf;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

// One block update of the potential on the "own" side:
//   u_o = -eps * LSE_{x in o, y} (log(w_x / w_o) + log m_y + (v_y - c(x,y)) / eps)
// where c(x, y) = cost_at(x, y) and m is the other side's measure.
template <typename CostAt>
void block_update(Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& own,
                  const Eigen::VectorXd& other, const std::vector<int>& labels, int classes,
                  double eps, CostAt cost_at) {
  const int n = static_cast<int>(own.size());
  std::vector<double> class_mass(classes, 0.0);
  for (int x = 0; x < n; ++x) class_mass[labels[x]] += own(x);
  std::vector<std::vector<double>> terms(classes);
  // States outside the support still get the soft c-transform value.
  std::vector<double> single;
  for (int x = 0; x < n; ++x) {
    const int o = labels[x];
    single.clear();
    for (int y = 0; y < n; ++y) {
      if (other(y) > 0.0) single.push_back(std::log(other(y)) + (v(y) - cost_at(x, y)) / eps);
    }
    const double lse = log_sum_exp(single);
    if (class_mass[o] > 0.0 && own(x) > 0.0) {
      terms[o].push_back(std::log(own(x) / class_mass[o]) + lse);
    } else if (class_mass[o] <= 0.0) {
      u(x) = -eps * lse;
    }
  }
  for (int x = 0; x < n; ++x) {
    const int o = labels[x];
    if (class_mass[o] > 0.0) u(x) = -eps * log_sum_exp(terms[o]);
  }
}

}  // namespace

DivergenceReport sinkhorn_w(const DiscreteMeasure& q, const DiscreteMeasure& p,
                            const Eigen::MatrixXd& cost, double eps,
                            const SinkhornOptions& opts) {
  const int n = q.size();
  if (p.size() != n || cost.rows() != n || cost.cols() != n) {
    throw std::invalid_argument("sinkhorn_w: size mismatch");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("sinkhorn_w: eps must be positive");
  std::vector<int> labels(n);
  int classes = n;
  if (opts.labels) {
    if (static_cast<int>(opts.labels->size()) != n) {
      throw std::invalid_argument("sinkhorn_w: label count mismatch");
    }
    labels = *opts.labels;
    classes = *std::max_element(labels.begin(), labels.end()) + 1;
  } else {
    for (int i = 0; i < n; ++i) labels[i] = i;
  }
  const Eigen::VectorXd& pw = p.weights();
  const Eigen::VectorXd& qw = q.weights();
  // u lives on the P side (first cost argument), v on the Q side.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n);
  auto plan = [&]() {
    Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
      if (pw(x) <= 0.0) continue;
      for (int y = 0; y < n; ++y) {
        if (qw(y) <= 0.0) continue;
        pi(x, y) = pw(x) * qw(y) * std::exp((u(x) + v(y) - cost(x, y)) / eps);
      }
    }
    return pi;
  };
  // Self-transport with a symmetric cost: the averaged symmetric update
  // converges much faster than alternating projections.
  const bool self = pw == qw && cost == cost.transpose();
  int it = 0;
  double violation = kInf;
  for (; it < opts.max_iter; ++it) {
    if (self) {
      Eigen::VectorXd t = u;
      block_update(t, u, pw, pw, labels, classes, eps, [&](int x, int y) { return cost(x, y); });
      u = 0.5 * (u + t);
      v = u;
    } else {
      block_update(u, v, pw, qw, labels, classes, eps, [&](int x, int y) { return cost(x, y); });
      block_update(v, u, qw, pw, labels, classes, eps, [&](int y, int x) { return cost(x, y); });
    }
    // After the v update the Q-side class marginals are exact; measure the P side.
    const Eigen::MatrixXd pi = plan();
    const Eigen::VectorXd row = pi.rowwise().sum();
    std::vector<double> err(classes, 0.0);
    for (int x = 0; x < n; ++x) err[labels[x]] += row(x) - pw(x);
    violation = 0.0;
    for (double e : err) violation += std::abs(e);
    if (!std::isfinite(violation)) break;
    if (violation <= opts.tol) break;
  }
  if (!(violation <= opts.tol)) {
    std::ostringstream msg;
    msg << "sinkhorn_w: no convergence after " << it << " iterations (marginal violation "
        << violation << "); increase eps";
    throw SinkhornError(msg.str());
  }
  DivergenceReport r;
  r.coupling = plan().transpose();  // rows indexed by Q's states
  r.value = pw.dot(u) + qw.dot(v) - eps * r.coupling.sum() + eps;
  r.dual_value = r.value;
  r.gap = 0.0;
  r.witness = u;
  r.witness2 = v;
  r.iterations = it + 1;
  return r;
}

DivergenceReport sinkhorn_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p,
                                     const Eigen::MatrixXd& cost, double eps,
                                     const SinkhornOptions& opts) {
  DivergenceReport qp = sinkhorn_w(q, p, cost, eps, opts);
  const DivergenceReport qq = sinkhorn_w(q, q, cost, eps, opts);
  const DivergenceReport pp = sinkhorn_w(p, p, cost, eps, opts);
  qp.value = qp.value - 0.5 * (qq.value + pp.value);
  qp.dual_value = qp.value;
  qp.iterations += qq.iterations + pp.iterations;
  return qp;
}

}  // namespace symdiv
