#include "symdiv/exactdiv.hpp"

#include <algorithm>
#include <cmath>

namespace symdiv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> support_of(const DiscreteMeasure& m) {
  std::vector<int> s;
  for (int i = 0; i < m.size(); ++i) {
    if (m[i] > 0.0) s.push_back(i);
  }
  return s;
}

// Exponentiated-gradient state over couplings pi with rows on supp Q (row
// sums Q_i) and columns on supp P. Row i is Q_i * softmax(a_i).
class CouplingProblem {
 public:
  CouplingProblem(const DiscreteMeasure& q, const DiscreteMeasure& p, const FDivGenerator& gen,
                  const MetricSpace& metric, double lipschitz)
      : q_(q), p_(p), gen_(gen), d_(metric.distances()), lip_(lipschitz),
        rows_(support_of(q)), cols_(support_of(p)) {}

  const std::vector<int>& rows() const { return rows_; }
  const std::vector<int>& cols() const { return cols_; }

  Eigen::MatrixXd coupling(const Eigen::MatrixXd& a) const {
    Eigen::MatrixXd pi(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double mx = a.row(r).maxCoeff();
      Eigen::ArrayXd e = (a.row(r).array() - mx).exp();
      pi.row(r) = (q_[rows_[r]] / e.sum()) * e.matrix().transpose();
    }
    return pi;
  }

  Eigen::VectorXd eta(const Eigen::MatrixXd& pi) const { return pi.colwise().sum().transpose(); }

  double objective(const Eigen::MatrixXd& pi) const {
    const Eigen::VectorXd e = eta(pi);
    double v = 0.0;
    for (size_t c = 0; c < cols_.size(); ++c) {
      const double pj = p_[cols_[c]];
      v += pj * gen_.f(e(c) / pj);
      for (size_t r = 0; r < rows_.size(); ++r) v += lip_ * pi(r, c) * d_(rows_[r], cols_[c]);
    }
    return v;
  }

  // f'(eta_j / P_j) on the columns.
  Eigen::VectorXd column_slopes(const Eigen::VectorXd& e) const {
    Eigen::VectorXd g(cols_.size());
    for (size_t c = 0; c < cols_.size(); ++c) {
      g(c) = gen_.fprime(e(c) / p_[cols_[c]]);
      if (!std::isfinite(g(c))) g(c) = -700.0;
    }
    return g;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& pi) const {
    const Eigen::VectorXd g = column_slopes(eta(pi));
    Eigen::MatrixXd grad(rows_.size(), cols_.size());
    for (size_t r = 0; r < rows_.size(); ++r) {
      for (size_t c = 0; c < cols_.size(); ++c) {
        grad(r, c) = g(c) + lip_ * d_(rows_[r], cols_[c]);
      }
    }
    return grad;
  }

  // Dual value of the Lipschitz regularization of column values g on supp P.
  double certificate(const Eigen::VectorXd& col_values, const MetricSpace& metric,
                     Eigen::VectorXd* witness) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(q_.size());
    for (size_t c = 0; c < cols_.size(); ++c) full(cols_[c]) = col_values(c);
    Eigen::VectorXd gamma = lipschitz_regularize(full, metric, lip_, cols_);
    const double v = f_gamma_objective(q_, p_, gen_, gamma);
    if (witness) *witness = std::move(gamma);
    return v;
  }

 private:
  const DiscreteMeasure& q_;
  const DiscreteMeasure& p_;
  const FDivGenerator& gen_;
  const Eigen::MatrixXd& d_;
  double lip_;
  std::vector<int> rows_, cols_;
};

// Average the logits over the joint action on (row state, column state).
void symmetrize_logits(Eigen::MatrixXd& a, const std::vector<int>& rows,
                       const std::vector<int>& cols, const PermutationAction& action) {
  const int n = action.state_count();
  std::vector<int> row_pos(n, -1), col_pos(n, -1);
  for (size_t r = 0; r < rows.size(); ++r) row_pos[rows[r]] = static_cast<int>(r);
  for (size_t c = 0; c < cols.size(); ++c) col_pos[cols[c]] = static_cast<int>(c);
  const int m = action.group().order();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      double acc = 0.0;
      for (int s = 0; s < m; ++s) {
        acc += a(row_pos[action.apply(s, rows[r])], col_pos[action.apply(s, cols[c])]);
      }
      out(r, c) = acc / m;
    }
  }
  a = std::move(out);
}

}  // namespace

Eigen::VectorXd lipschitz_regularize(const Eigen::VectorXd& g, const MetricSpace& metric,
                                     double lipschitz, const std::vector<int>& support) {
  if (g.size() != metric.size()) throw std::invalid_argument("lipschitz_regularize: size mismatch");
  if (support.empty()) throw std::invalid_argument("lipschitz_regularize: empty support");
  Eigen::VectorXd out(g.size());
  for (int x = 0; x < metric.size(); ++x) {
    double best = kInf;
    for (int j : support) best = std::min(best, g(j) + lipschitz * metric(x, j));
    out(x) = best;
  }
  return out;
}

double f_gamma_objective(const DiscreteMeasure& q, const DiscreteMeasure& p,
                         const FDivGenerator& gen, const Eigen::VectorXd& g) {
  if (q.size() != p.size() || g.size() != q.size()) {
    throw std::invalid_argument("f_gamma_objective: size mismatch");
  }
  return q.expect(g) - lambda_f(gen, g, p).value;
}

DivergenceReport f_gamma_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p,
                                    const FDivGenerator& gen, const MetricSpace& metric,
                                    double lipschitz, const FGammaOptions& opts,
                                    const PermutationAction* symmetry) {
  if (q.size() != p.size() || q.size() != metric.size()) {
    throw std::invalid_argument("f_gamma_divergence: size mismatch");
  }
  if (!(lipschitz > 0.0)) throw std::invalid_argument("f_gamma_divergence: L must be positive");
  const int n = q.size();
  CouplingProblem prob(q, p, gen, metric, lipschitz);
  const auto& rows = prob.rows();
  const auto& cols = prob.cols();
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(cols.size());

  const bool keep_symmetric = symmetry != nullptr && is_invariant(q, *symmetry, 1e-12) &&
                              is_invariant(p, *symmetry, 1e-12) &&
                              metric.is_isometric(*symmetry);

  DivergenceReport best;
  best.value = kInf;
  double best_dual = -kInf;
  Eigen::VectorXd best_witness;
  auto offer_primal = [&](double v, const Eigen::VectorXd& eta_full, const Eigen::MatrixXd& plan) {
    if (v < best.value) {
      best.value = v;
      best.eta = eta_full;
      best.coupling = plan;
    }
  };
  auto offer_dual = [&](double v, Eigen::VectorXd w) {
    if (v > best_dual) {
      best_dual = v;
      best_witness = std::move(w);
    }
  };

  // eta = P: the transport term alone.
  {
    const DivergenceReport w1 = wasserstein1(q, p, metric, lipschitz);
    offer_primal(w1.value, p.weights(), w1.coupling);
    offer_dual(f_gamma_objective(q, p, gen, w1.witness), w1.witness);
  }
  // eta = Q: the f-divergence alone, when finite.
  {
    const DivergenceReport fd = f_divergence(q, p, gen);
    if (std::isfinite(fd.value)) {
      Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) plan(i, i) = q[i];
      offer_primal(fd.value, q.weights(), plan);
      Eigen::VectorXd col(nc);
      for (int c = 0; c < nc; ++c) col(c) = fd.witness(cols[c]);
      Eigen::VectorXd w;
      const double v = prob.certificate(col, metric, &w);
      offer_dual(v, std::move(w));
    }
  }

  // Warm start: product coupling Q x eta0 with eta0 the midpoint on supp P.
  Eigen::VectorXd eta0(nc);
  for (int c = 0; c < nc; ++c) eta0(c) = 0.5 * (q[cols[c]] + p[cols[c]]);
  eta0 /= eta0.sum();
  Eigen::MatrixXd a(nr, nc);
  for (int r = 0; r < nr; ++r) a.row(r) = eta0.array().log().matrix().transpose();
  if (keep_symmetric) symmetrize_logits(a, rows, cols, *symmetry);

  auto embed = [&](const Eigen::MatrixXd& pi, Eigen::VectorXd* eta_full) {
    Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < nr; ++r) {
      for (int c = 0; c < nc; ++c) plan(rows[r], cols[c]) = pi(r, c);
    }
    *eta_full = plan.colwise().sum().transpose();
    return plan;
  };

  Eigen::MatrixXd pi = prob.coupling(a);
  double fval = prob.objective(pi);
  double step = 1.0;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iter; ++it) {
    if (it % opts.certificate_every == 0) {
      Eigen::VectorXd eta_full;
      const Eigen::MatrixXd plan = embed(pi, &eta_full);
      offer_primal(fval, eta_full, plan);
      Eigen::VectorXd w;
      const double v = prob.certificate(prob.column_slopes(prob.eta(pi)), metric, &w);
      offer_dual(v, std::move(w));
      if (best.value - best_dual <= opts.gap_tol) {
        converged = true;
        break;
      }
    }
    const Eigen::MatrixXd grad = prob.gradient(pi);
    for (int tries = 0;; ++tries) {
      Eigen::MatrixXd a_new = a - step * grad;
      if (keep_symmetric) symmetrize_logits(a_new, rows, cols, *symmetry);
      const Eigen::MatrixXd pi_new = prob.coupling(a_new);
      const double f_new = prob.objective(pi_new);
      double kl = 0.0;
      for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c) {
          if (pi_new(r, c) > 0.0) kl += pi_new(r, c) * std::log(pi_new(r, c) / pi(r, c));
        }
      }
      const double model = fval + (grad.array() * (pi_new - pi).array()).sum() + kl / step;
      if (f_new <= model + 1e-13 * (1.0 + std::abs(fval)) || tries >= 60) {
        a = std::move(a_new);
        // Keep logits bounded; the row shift does not change pi.
        for (int r = 0; r < nr; ++r) a.row(r).array() -= a.row(r).maxCoeff();
        pi = pi_new;
        fval = f_new;
        step *= 1.2;
        break;
      }
      step *= 0.5;
    }
  }
  if (!converged) {
    Eigen::VectorXd eta_full;
    const Eigen::MatrixXd plan = embed(pi, &eta_full);
    offer_primal(fval, eta_full, plan);
    Eigen::VectorXd w;
    const double v = prob.certificate(prob.column_slopes(prob.eta(pi)), metric, &w);
    offer_dual(v, std::move(w));
    converged = best.value - best_dual <= opts.gap_tol;
  }
  best.dual_value = best_dual;
  best.gap = best.value - best_dual;
  best.witness = std::move(best_witness);
  best.iterations = it;
  best.converged = converged;
  return best;
}

}  // namespace symdiv
