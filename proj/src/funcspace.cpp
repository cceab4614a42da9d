#include "symdiv/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace symdiv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TabulatedFunction symmetrize_function(const TabulatedFunction& g,
                                      const PermutationAction& action) {
  if (g.size() != action.state_count()) {
    throw std::invalid_argument("symmetrize_function: size mismatch");
  }
  const int m = action.group().order();
  TabulatedFunction out = TabulatedFunction::Zero(g.size());
  for (int s = 0; s < m; ++s) {
    const auto& perm = action.perm(s);
    for (Eigen::Index x = 0; x < g.size(); ++x) out(x) += g(perm[x]);
  }
  return out / m;
}

TabulatedFunction compose_with_action(const TabulatedFunction& g,
                                      const PermutationAction& action, Element s) {
  TabulatedFunction out(g.size());
  for (Eigen::Index x = 0; x < g.size(); ++x) out(x) = g(action.apply(s, static_cast<int>(x)));
  return out;
}

bool is_constant_on_orbits(const TabulatedFunction& g, const PermutationAction& action,
                           double tol) {
  for (int s = 0; s < action.group().order(); ++s) {
    for (Eigen::Index x = 0; x < g.size(); ++x) {
      if (std::abs(g(action.apply(s, static_cast<int>(x))) - g(x)) > tol) return false;
    }
  }
  return true;
}

FDivGenerator FDivGenerator::kl() { return FDivGenerator(Kind::kKL, 0.0); }

FDivGenerator FDivGenerator::alpha(double a, bool allow_below_one) {
  if (!(a > 0.0) || a == 1.0) {
    throw std::invalid_argument("alpha generator needs alpha > 0, alpha != 1");
  }
  if (a < 1.0 && !allow_below_one) {
    throw std::invalid_argument("alpha generator with alpha < 1 is not admissible");
  }
  return FDivGenerator(Kind::kAlpha, a);
}

std::string FDivGenerator::name() const {
  if (kind_ == Kind::kKL) return "kl";
  return "alpha(" + std::to_string(alpha_) + ")";
}

double FDivGenerator::f(double x) const {
  if (x < 0.0) return kInf;
  if (kind_ == Kind::kKL) return x > 0.0 ? x * std::log(x) : 0.0;
  return (std::pow(x, alpha_) - 1.0) / (alpha_ * (alpha_ - 1.0));
}

double FDivGenerator::fprime(double x) const {
  if (kind_ == Kind::kKL) return x > 0.0 ? std::log(x) + 1.0 : -kInf;
  if (x <= 0.0) return alpha_ > 1.0 ? 0.0 : -kInf;
  return std::pow(x, alpha_ - 1.0) / (alpha_ - 1.0);
}

double FDivGenerator::recession_slope() const {
  if (kind_ == Kind::kKL || alpha_ > 1.0) return kInf;
  return 0.0;
}

double FDivGenerator::conj(double y) const {
  if (kind_ == Kind::kKL) return std::exp(y - 1.0);
  const double a = alpha_;
  const double floor = 1.0 / (a * (a - 1.0));
  if (a > 1.0) {
    if (y <= 0.0) return floor;
    return std::pow((a - 1.0) * y, a / (a - 1.0)) / a + floor;
  }
  // 0 < alpha < 1: f' ranges over (-inf, 0).
  if (y >= 0.0) return kInf;
  return std::pow((a - 1.0) * y, a / (a - 1.0)) / a + floor;
}

double FDivGenerator::conj_prime(double y) const {
  if (kind_ == Kind::kKL) return std::exp(y - 1.0);
  const double a = alpha_;
  if (a > 1.0) return y > 0.0 ? std::pow((a - 1.0) * y, 1.0 / (a - 1.0)) : 0.0;
  if (y >= 0.0) return kInf;
  return std::pow((a - 1.0) * y, 1.0 / (a - 1.0));
}

LambdaResult lambda_f(const FDivGenerator& gen, const Eigen::VectorXd& values,
                      const Eigen::VectorXd& weights) {
  if (values.size() != weights.size() || values.size() == 0) {
    throw std::invalid_argument("lambda_f: size mismatch");
  }
  if (!values.allFinite()) throw std::invalid_argument("lambda_f: non-finite function values");
  auto objective = [&](double nu) {
    double acc = nu;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (weights(i) > 0.0) acc += weights(i) * gen.conj(values(i) - nu);
    }
    return acc;
  };
  // phi'(nu) = 1 - E f*'(g - nu) changes sign once g - nu crosses f'(1).
  const double pad = 1.0 + std::abs(gen.fprime(1.0));
  double lo = values.minCoeff() - pad;
  double hi = values.maxCoeff() + pad;
  if (gen.kind() == FDivGenerator::Kind::kAlpha && gen.alpha_value() < 1.0) {
    // f* is finite only for negative arguments: nu must exceed max g.
    lo = values.maxCoeff() + 1e-300;
    hi = values.maxCoeff() + pad + (values.maxCoeff() - values.minCoeff()) + 1.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) <= objective(m2)) hi = m2;
    else lo = m1;
  }
  const double nu = 0.5 * (lo + hi);
  return {objective(nu), nu};
}

LambdaResult lambda_f(const FDivGenerator& gen, const TabulatedFunction& g,
                      const DiscreteMeasure& p) {
  if (g.size() != p.size()) throw std::invalid_argument("lambda_f: size mismatch");
  return lambda_f(gen, g, p.weights());
}

ProbabilityKernel::ProbabilityKernel(Eigen::MatrixXd k) : k_(std::move(k)) {
  if (k_.rows() != k_.cols() || k_.rows() == 0) {
    throw std::invalid_argument("ProbabilityKernel: matrix must be square");
  }
  if ((k_.array() < 0.0).any() || !k_.allFinite()) {
    throw std::invalid_argument("ProbabilityKernel: entries must be nonnegative");
  }
  for (Eigen::Index r = 0; r < k_.rows(); ++r) {
    if (std::abs(k_.row(r).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("ProbabilityKernel: rows must sum to 1");
    }
  }
}

bool ProbabilityKernel::is_projection(double tol) const {
  return ((k_ * k_) - k_).cwiseAbs().maxCoeff() <= tol;
}

TabulatedFunction kernel_smooth(const ProbabilityKernel& k, const TabulatedFunction& g) {
  if (g.size() != k.size()) throw std::invalid_argument("kernel_smooth: shape mismatch");
  return k.matrix() * g;
}

DiscreteMeasure kernel_push(const ProbabilityKernel& k, const DiscreteMeasure& p) {
  if (p.size() != k.size()) throw std::invalid_argument("kernel_push: shape mismatch");
  Eigen::VectorXd w = k.matrix().transpose() * p.weights();
  // Row sums are 1 only to 1e-12; renormalize so the result is a measure.
  w /= w.sum();
  return DiscreteMeasure(std::move(w), p.points());
}

ProbabilityKernel coarse_grain_kernel(const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw std::invalid_argument("coarse_grain_kernel: empty label map");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    int count = 0;
    for (int y = 0; y < n; ++y) count += labels[y] == labels[x];
    for (int y = 0; y < n; ++y) {
      if (labels[y] == labels[x]) k(x, y) = 1.0 / count;
    }
  }
  return ProbabilityKernel(std::move(k));
}

ProbabilityKernel orbit_kernel(const PermutationAction& action) {
  const int n = action.state_count();
  const int m = action.group().order();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    for (int s = 0; s < m; ++s) k(x, action.apply(s, x)) += 1.0 / m;
  }
  return ProbabilityKernel(std::move(k));
}

}  // namespace symdiv
