#pragma once

// Adversarial training on the planar t-mixture with the Wasserstein, alpha-
// and Lipschitz-alpha objectives.

#include "symdiv/funcspace.hpp"
#include "symdiv/metrics.hpp"
#include "symdiv/nn.hpp"

#include <functional>
#include <memory>
#include <stdexcept>

namespace symdiv {

enum class LossKind { kWganGp, kFAlpha, kLipAlpha };

struct LossConfig {
  LossKind kind = LossKind::kLipAlpha;
  double alpha = 2.0;
  /// Use the KL generator instead of alpha (FAlpha / LipAlpha only).
  bool kl = false;
  /// Gradient-penalty weight; unused by FAlpha.
  double lambda = 10.0;

  FDivGenerator generator() const;
  void validate() const;
};

struct GanConfig {
  GeneratorVariant generator = GeneratorVariant::kEqv;
  DiscriminatorVariant discriminator = DiscriminatorVariant::kInv;
  bool sym_layer = false;
  LossConfig loss;
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  int d_steps = 2;
  int batch = 64;
  long long epochs = 10000;
  unsigned long long seed = 0;
  TMixtureConfig data;
  int n_train = 200;
  int noise_dim = 10;
  Widths widths;
  double ema = 0.9999;
  long long eval_interval = 1000;
  int eval_samples = 2000;

  void validate() const;
};

struct EvalRecord {
  long long epoch = 0;
  ModeReport modes;
  double orth_median = 0.0;
  double orth_p90 = 0.0;
  InvarianceReport invariance;
  double d_loss = std::numeric_limits<double>::quiet_NaN();
  double g_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainState {
  GanConfig config;
  std::shared_ptr<const LinearAction> action_z, action_x;
  std::unique_ptr<Network> generator, discriminator;
  std::vector<Eigen::MatrixXd> ema;  ///< EMA of generator parameters, for sampling only
  SampleSet train_set;
  long long epoch = 0;
  std::vector<EvalRecord> history;
  double last_d_loss = std::numeric_limits<double>::quiet_NaN();
  double last_g_loss = std::numeric_limits<double>::quiet_NaN();
  Rng train_rng, eval_rng;
};

/// Raised when a loss becomes non-finite; carries the history up to that point.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, long long epoch, std::vector<EvalRecord> history)
      : std::runtime_error(what), epoch(epoch), history(std::move(history)) {}
  long long epoch;
  std::vector<EvalRecord> history;
};

/// f* applied elementwise as graph nodes.
Graph::Id conjugate_node(Graph& g, Graph::Id y, const FDivGenerator& gen);

/// Variational objective J(gamma) on (Q = real, P = fake), maximized by the
/// discriminator and minimized by the generator:
///   WGAN: E_Q g - E_P g;  FAlpha: E_Q g - E_P f*(g);  LipAlpha: E_Q g - Lambda_f^P[g],
/// with the Lambda minimizer nu* held constant (written to *nu when given).
Graph::Id variational_objective(Graph& g, const LossConfig& loss, Graph::Id gamma_real,
                                Graph::Id gamma_fake, double* nu = nullptr);

/// mean relu(||grad_x||^2 - 1) over the rows of an input-gradient node.
Graph::Id one_sided_penalty(Graph& g, Graph::Id input_grad);

/// Penalty at independent uniform interpolates of paired rows, as a node
/// depending on the discriminator parameters (without the lambda weight).
Graph::Id gradient_penalty(Graph& g, const Network& disc, const std::vector<Graph::Id>& params,
                           const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake, Rng& rng);

/// Random stream for (seed, purpose). Training uses purposes 1 (data),
/// 2 (initialization), 3 (minibatches) and 4 (evaluation).
Rng seeded_stream(unsigned long long seed, unsigned purpose);

TrainState make_train_state(const GanConfig& cfg);
/// Runs `epochs` more epochs without evaluating. Throws TrainingAborted on a
/// non-finite loss.
void train_epochs(TrainState& st, long long epochs);
/// Evaluates at epoch 0, then trains cfg.epochs epochs (with a final
/// evaluation if the last epoch is not on the interval).
TrainState train(const GanConfig& cfg,
                 const std::function<void(const EvalRecord&)>& on_eval = nullptr);
EvalRecord evaluate(TrainState& st);

/// n samples from the EMA generator.
SampleSet snapshot_samples(const TrainState& st, int n, Rng& rng);

struct PairedObjective {
  double raw = 0.0;        ///< J(Q, P_g) for the given discriminator
  double symmetrized = 0.0;  ///< J(Q, augmented P_g)
  double raw_lo = 0.0, raw_hi = 0.0;  ///< bootstrap 95% intervals
  double sym_lo = 0.0, sym_hi = 0.0;
  bool overlap() const { return raw_lo <= sym_hi && sym_lo <= raw_hi; }
};

/// Sample-level check that an invariant discriminator cannot tell P_g from
/// its symmetrization: paired evaluation with bootstrap intervals.
PairedObjective paired_objective(const Network& disc, const LossConfig& loss,
                                 const SampleSet& real, const SampleSet& fake,
                                 const LinearAction& action, Rng& rng, int bootstrap = 200);

std::string to_string(LossKind k);
LossKind parse_loss_kind(const std::string& s);

}  // namespace symdiv
