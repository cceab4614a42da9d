#pragma once

// Exact and certified divergences between measures on a finite state space:
// f-divergences, total variation, Wasserstein-1 by min-cost flow, the
// Lipschitz (f, Gamma)-divergence by a primal/dual pair, Sinkhorn and MMD.

#include "symdiv/funcspace.hpp"
#include "symdiv/groups.hpp"
#include "symdiv/measures.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace symdiv {

class MetricSpace {
 public:
  /// Symmetric, nonnegative, zero diagonal, triangle inequality within 1e-9.
  explicit MetricSpace(Eigen::MatrixXd d);
  static MetricSpace euclidean(const Eigen::MatrixXd& points);

  int size() const { return static_cast<int>(d_.rows()); }
  const Eigen::MatrixXd& distances() const { return d_; }
  double operator()(int i, int j) const { return d_(i, j); }

  /// d(T_s x, T_s y) = d(x, y) for every element and pair.
  bool is_isometric(const PermutationAction& action, double tol = 1e-9) const;

 private:
  Eigen::MatrixXd d_;
};

struct DivergenceReport {
  double value = 0.0;
  /// Value of the best dual certificate, NaN when the family has none.
  double dual_value = std::numeric_limits<double>::quiet_NaN();
  /// value - dual_value; 0 for closed forms.
  double gap = 0.0;
  /// Optimal discriminator (first potential for Sinkhorn).
  Eigen::VectorXd witness;
  /// Second Sinkhorn potential.
  Eigen::VectorXd witness2;
  /// Transport plan, rows indexed by the first argument's states.
  Eigen::MatrixXd coupling;
  /// Primal optimizer of the infimal convolution.
  Eigen::VectorXd eta;
  int iterations = 0;
  bool converged = true;
};

/// sum_i p_i f(q_i / p_i), +inf when Q is not absolutely continuous w.r.t. P.
/// witness = f'(q/p) and gap = |primal - (E_Q w - E_P f*(w))|.
DivergenceReport f_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p,
                              const FDivGenerator& gen);

/// sum_i |q_i - p_i| with witness sign(q - p).
DivergenceReport tv_ipm(const DiscreteMeasure& q, const DiscreteMeasure& p);

/// L times the optimal transport cost, by successive shortest paths on integer
/// scaled weights. witness is an L-Lipschitz Kantorovich potential.
DivergenceReport wasserstein1(const DiscreteMeasure& q, const DiscreteMeasure& p,
                              const MetricSpace& metric, double lipschitz = 1.0);

struct FGammaOptions {
  int max_iter = 50000;
  double gap_tol = 1e-7;
  int certificate_every = 25;
};

/// sup over L-Lipschitz g of E_Q g - Lambda_f^P[g], bracketed by the primal
/// inf_eta { D_f(eta||P) + L W1(Q, eta) } (mirror descent over couplings)
/// and the dual value of the Lipschitz regularization of f'(eta/P).
/// value is the primal upper bound. With `symmetry`, the warm start is
/// symmetrized so iterates stay invariant when Q, P and the metric are.
DivergenceReport f_gamma_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p,
                                    const FDivGenerator& gen, const MetricSpace& metric,
                                    double lipschitz, const FGammaOptions& opts = {},
                                    const PermutationAction* symmetry = nullptr);

/// E_Q g - Lambda_f^P[g]
double f_gamma_objective(const DiscreteMeasure& q, const DiscreteMeasure& p,
                         const FDivGenerator& gen, const Eigen::VectorXd& g);

/// g(x) <- min_j (g(j) + L d(x, j)) over the states in `support`.
Eigen::VectorXd lipschitz_regularize(const Eigen::VectorXd& g, const MetricSpace& metric,
                                     double lipschitz, const std::vector<int>& support);

struct SinkhornOptions {
  double tol = 1e-10;
  int max_iter = 2000000;
  /// Restrict both potentials to be constant on these classes (orbits).
  const std::vector<int>* labels = nullptr;
};

class SinkhornError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entropic OT value W_{c,eps}(Q, P) by log-domain Sinkhorn, x ~ P indexes the
/// first cost argument. Throws SinkhornError at the iteration cap.
DivergenceReport sinkhorn_w(const DiscreteMeasure& q, const DiscreteMeasure& p,
                            const Eigen::MatrixXd& cost, double eps,
                            const SinkhornOptions& opts = {});

/// W(Q,P) - (W(Q,Q) + W(P,P)) / 2
DivergenceReport sinkhorn_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p,
                                     const Eigen::MatrixXd& cost, double eps,
                                     const SinkhornOptions& opts = {});

/// c_S(x, y) = mean over (s, s') of c(T_s x, T_s' y).
Eigen::MatrixXd symmetrized_cost(const Eigen::MatrixXd& cost, const PermutationAction& action);

/// k_S(x, y) = mean over s of k(T_s x, T_s y).
Eigen::MatrixXd invariant_kernel(const Eigen::MatrixXd& kernel,
                                 const PermutationAction& action);

Eigen::MatrixXd gaussian_kernel(const Eigen::MatrixXd& points, double bandwidth);

bool is_psd(const Eigen::MatrixXd& kernel, double tol = 1e-8);

/// (q - p)^T K (q - p); throws on a non-PSD kernel.
double mmd_squared(const DiscreteMeasure& q, const DiscreteMeasure& p,
                   const Eigen::MatrixXd& kernel);
double mmd(const DiscreteMeasure& q, const DiscreteMeasure& p, const Eigen::MatrixXd& kernel);

/// Orbit space of an isometric action with the min-over-representatives metric.
struct QuotientSpace {
  MetricSpace metric;
  std::vector<DiscreteMeasure> measures;
  std::vector<int> labels;
  std::vector<std::vector<int>> classes;
};

QuotientSpace quotient(const MetricSpace& metric, const std::vector<DiscreteMeasure>& measures,
                       const PermutationAction& action);

/// Sum of member weights per class.
DiscreteMeasure push_to_classes(const DiscreteMeasure& p, const std::vector<int>& labels);

}  // namespace symdiv
