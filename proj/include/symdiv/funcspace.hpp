#pragma once

// Test functions on finite spaces: group symmetrization, convex generators
// with their Legendre transforms, the shift-optimized cumulant functional and
// probability-kernel smoothing.

#include "symdiv/groups.hpp"
#include "symdiv/measures.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace symdiv {

/// Discriminator values over the states of a finite space.
using TabulatedFunction = Eigen::VectorXd;

/// S[g](x) = mean over s of g(T_s x).
TabulatedFunction symmetrize_function(const TabulatedFunction& g,
                                      const PermutationAction& action);

/// g o T_s
TabulatedFunction compose_with_action(const TabulatedFunction& g,
                                      const PermutationAction& action, Element s);

bool is_constant_on_orbits(const TabulatedFunction& g, const PermutationAction& action,
                           double tol);

/// Convex f with f(1) = 0, extended by +inf outside its domain [0, inf).
class FDivGenerator {
 public:
  enum class Kind { kKL, kAlpha };

  static FDivGenerator kl();
  /// alpha > 1. Values in (0, 1) need `allow_below_one`, where f* is +inf on
  /// [0, inf) and the generator is not admissible.
  static FDivGenerator alpha(double a, bool allow_below_one = false);

  Kind kind() const { return kind_; }
  double alpha_value() const { return alpha_; }
  std::string name() const;

  double f(double x) const;
  double fprime(double x) const;
  /// lim_{x->inf} f(x)/x; +inf for KL and alpha > 1.
  double recession_slope() const;
  double conj(double y) const;
  double conj_prime(double y) const;

 private:
  FDivGenerator(Kind k, double a) : kind_(k), alpha_(a) {}
  Kind kind_;
  double alpha_;
};

struct LambdaResult {
  double value;
  double nu;
};

/// Lambda_f^P[g] = inf_nu { nu + E_P f*(g - nu) } by ternary search on a
/// bracket around [min g, max g].
LambdaResult lambda_f(const FDivGenerator& gen, const TabulatedFunction& g,
                      const DiscreteMeasure& p);
LambdaResult lambda_f(const FDivGenerator& gen, const Eigen::VectorXd& values,
                      const Eigen::VectorXd& weights);

/// Row-stochastic |X| x |X| matrix; row x is K_x.
class ProbabilityKernel {
 public:
  explicit ProbabilityKernel(Eigen::MatrixXd k);
  const Eigen::MatrixXd& matrix() const { return k_; }
  int size() const { return static_cast<int>(k_.rows()); }
  bool is_projection(double tol) const;

 private:
  Eigen::MatrixXd k_;
};

/// S_K[g] = K g
TabulatedFunction kernel_smooth(const ProbabilityKernel& k, const TabulatedFunction& g);
/// S^K[P] = K^T w
DiscreteMeasure kernel_push(const ProbabilityKernel& k, const DiscreteMeasure& p);

/// Uniform back-mapping kernel of a coarse-graining map given as labels.
ProbabilityKernel coarse_grain_kernel(const std::vector<int>& labels);

/// K_x = pushforward of Haar measure through s -> T_s x.
ProbabilityKernel orbit_kernel(const PermutationAction& action);

}  // namespace symdiv
