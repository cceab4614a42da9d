#include "symdiv/gan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symdiv {

namespace {

// Independent generator stream for (seed, purpose).
Rng stream(unsigned long long seed, unsigned purpose) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu), static_cast<unsigned>(seed >> 32),
                    purpose};
  return Rng(seq);
}

Eigen::MatrixXd normal_noise(int n, int dim, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd m(n, dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = z(rng);
  }
  return m;
}

Graph::Id mean_all(Graph& g, Graph::Id a) {
  return g.scale(g.sum_all(a), 1.0 / static_cast<double>(g.value(a).size()));
}

// The P-side term: E_P g, E_P f*(g) or Lambda_f^P[g].
Graph::Id p_term(Graph& g, const LossConfig& loss, Graph::Id gamma_fake, double* nu) {
  switch (loss.kind) {
    case LossKind::kWganGp:
      return mean_all(g, gamma_fake);
    case LossKind::kFAlpha:
      return mean_all(g, conjugate_node(g, gamma_fake, loss.generator()));
    case LossKind::kLipAlpha: {
      const Eigen::MatrixXd& v = g.value(gamma_fake);
      const Eigen::VectorXd values = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
      const Eigen::VectorXd w = Eigen::VectorXd::Constant(v.size(), 1.0 / v.size());
      const FDivGenerator gen = loss.generator();
      const double nu_star = lambda_f(gen, values, w).nu;
      if (nu) *nu = nu_star;
      // Envelope property: nu* enters as a constant.
      const Graph::Id shifted = conjugate_node(g, g.add_scalar(gamma_fake, -nu_star), gen);
      return g.add_scalar(mean_all(g, shifted), nu_star);
    }
  }
  throw std::logic_error("p_term: unknown loss");
}

bool all_finite(const Graph& g, const std::vector<Graph::Id>& ids) {
  for (Graph::Id id : ids) {
    if (!g.value(id).allFinite()) return false;
  }
  return true;
}

std::vector<Eigen::MatrixXd> values_of(const Graph& g, const std::vector<Graph::Id>& ids) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(ids.size());
  for (Graph::Id id : ids) out.push_back(g.value(id));
  return out;
}

[[noreturn]] void abort_training(const TrainState& st, const char* which, double value) {
  std::ostringstream msg;
  msg << "non-finite " << which << " (" << value << ") at epoch " << st.epoch;
  throw TrainingAborted(msg.str(), st.epoch, st.history);
}

bool uses_penalty(const LossConfig& loss) {
  return loss.kind != LossKind::kFAlpha && loss.lambda > 0.0;
}

void discriminator_step(TrainState& st, int batch) {
  const GanConfig& cfg = st.config;
  Rng& rng = st.train_rng;
  std::uniform_int_distribution<int> pick(0, cfg.n_train - 1);
  Eigen::MatrixXd real(batch, cfg.data.ambient_dim);
  for (int r = 0; r < batch; ++r) real.row(r) = st.train_set.data.row(pick(rng));
  const Eigen::MatrixXd fake = st.generator->predict(normal_noise(batch, cfg.noise_dim, rng), &rng);
  const bool penalty = uses_penalty(cfg.loss);

  Eigen::MatrixXd x(penalty ? 3 * batch : 2 * batch, real.cols());
  x.topRows(batch) = real;
  x.middleRows(batch, batch) = fake;
  if (penalty) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < batch; ++r) {
      const double t = u(rng);
      x.row(2 * batch + r) = t * real.row(r) + (1.0 - t) * fake.row(r);
    }
  }
  Graph g;
  const auto params = st.discriminator->bind(g);
  const Graph::Id in = g.leaf(std::move(x));
  const Graph::Id out = st.discriminator->forward(g, in, params, nullptr);
  if (!g.value(out).allFinite()) abort_training(st, "discriminator output", g.value(out).sum());
  const Graph::Id objective = variational_objective(g, cfg.loss, g.rows(out, 0, batch),
                                                    g.rows(out, batch, batch));
  Graph::Id loss = g.scale(objective, -1.0);
  if (penalty) {
    const Graph::Id gx = g.gradients(g.sum_all(g.rows(out, 2 * batch, batch)), {in})[0];
    const Graph::Id pen = one_sided_penalty(g, g.rows(gx, 2 * batch, batch));
    loss = g.add(loss, g.scale(pen, cfg.loss.lambda));
  }
  st.last_d_loss = g.scalar(loss);
  if (!std::isfinite(st.last_d_loss)) abort_training(st, "discriminator loss", st.last_d_loss);
  const auto grads = g.gradients(loss, params);
  if (!all_finite(g, grads)) abort_training(st, "discriminator gradient", st.last_d_loss);
  adam_step(st.discriminator->params(), values_of(g, grads), st.discriminator->adam(), cfg.lr_d);
}

void generator_step(TrainState& st, int batch) {
  const GanConfig& cfg = st.config;
  Rng& rng = st.train_rng;
  Graph g;
  const auto gp = st.generator->bind(g);
  const auto dp = st.discriminator->bind(g);
  const Graph::Id z = g.leaf(normal_noise(batch, cfg.noise_dim, rng));
  const Graph::Id fake = st.generator->forward(g, z, gp, &rng);
  const Graph::Id gamma = st.discriminator->forward(g, fake, dp, nullptr);
  if (!g.value(gamma).allFinite()) abort_training(st, "discriminator output", g.value(gamma).sum());
  // The real-data term does not depend on the generator.
  const Graph::Id loss = g.scale(p_term(g, cfg.loss, gamma, nullptr), -1.0);
  st.last_g_loss = g.scalar(loss);
  if (!std::isfinite(st.last_g_loss)) abort_training(st, "generator loss", st.last_g_loss);
  const auto grads = g.gradients(loss, gp);
  if (!all_finite(g, grads)) abort_training(st, "generator gradient", st.last_g_loss);
  auto& params = st.generator->params();
  adam_step(params, values_of(g, grads), st.generator->adam(), cfg.lr_g);
  for (size_t i = 0; i < params.size(); ++i) {
    st.ema[i] = cfg.ema * st.ema[i] + (1.0 - cfg.ema) * params[i];
  }
}

double objective_value(const LossConfig& loss, const Eigen::VectorXd& real,
                       const Eigen::VectorXd& fake) {
  Graph g;
  const Graph::Id r = g.leaf(real);
  const Graph::Id f = g.leaf(fake);
  return g.scalar(variational_objective(g, loss, r, f));
}

}  // namespace

FDivGenerator LossConfig::generator() const {
  return kl ? FDivGenerator::kl() : FDivGenerator::alpha(alpha);
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("loss: lambda must be nonnegative");
  if (kind != LossKind::kWganGp && !kl && !(alpha > 1.0)) {
    throw std::invalid_argument("loss: alpha must exceed 1");
  }
}

void GanConfig::validate() const {
  loss.validate();
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw std::invalid_argument("config: learning rates must be positive");
  if (d_steps < 1) throw std::invalid_argument("config: d_steps must be at least 1");
  if (batch < 1) throw std::invalid_argument("config: batch must be at least 1");
  if (epochs < 0) throw std::invalid_argument("config: epochs must be nonnegative");
  if (n_train < 1) throw std::invalid_argument("config: n_train must be at least 1");
  if (noise_dim < 2) throw std::invalid_argument("config: noise_dim must be at least 2");
  if (data.ambient_dim < 2) throw std::invalid_argument("config: ambient_dim must be at least 2");
  if (!(ema >= 0.0 && ema < 1.0)) throw std::invalid_argument("config: ema must lie in [0, 1)");
  if (eval_interval < 1) throw std::invalid_argument("config: eval_interval must be at least 1");
  if (eval_samples < 4) throw std::invalid_argument("config: eval_samples must be at least 4");
  if (widths.hidden < 4 || widths.hidden_layers < 1) throw std::invalid_argument("config: invalid widths");
}

Graph::Id conjugate_node(Graph& g, Graph::Id y, const FDivGenerator& gen) {
  if (gen.kind() == FDivGenerator::Kind::kKL) return g.exp(g.add_scalar(y, -1.0));
  const double a = gen.alpha_value();
  // f*(y) = ((a-1) y)_+^(a/(a-1)) / a + 1/(a(a-1))
  const Graph::Id core = g.pow_pos(g.scale(y, a - 1.0), a / (a - 1.0));
  return g.add_scalar(g.scale(core, 1.0 / a), 1.0 / (a * (a - 1.0)));
}

Graph::Id variational_objective(Graph& g, const LossConfig& loss, Graph::Id gamma_real,
                                Graph::Id gamma_fake, double* nu) {
  return g.sub(mean_all(g, gamma_real), p_term(g, loss, gamma_fake, nu));
}

Graph::Id one_sided_penalty(Graph& g, Graph::Id input_grad) {
  const Graph::Id sq = g.sum_cols(g.mul(input_grad, input_grad));
  return mean_all(g, g.relu(g.add_scalar(sq, -1.0)));
}

Graph::Id gradient_penalty(Graph& g, const Network& disc, const std::vector<Graph::Id>& params,
                           const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake, Rng& rng) {
  if (real.rows() != fake.rows() || real.cols() != fake.cols()) {
    throw ShapeError("gradient_penalty: batches differ in shape");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(real.rows(), real.cols());
  for (Eigen::Index r = 0; r < real.rows(); ++r) {
    const double t = u(rng);
    x.row(r) = t * real.row(r) + (1.0 - t) * fake.row(r);
  }
  const Graph::Id in = g.leaf(std::move(x));
  const Graph::Id out = disc.forward(g, in, params, nullptr);
  return one_sided_penalty(g, g.gradients(g.sum_all(out), {in})[0]);
}

Rng seeded_stream(unsigned long long seed, unsigned purpose) { return stream(seed, purpose); }

TrainState make_train_state(const GanConfig& cfg) {
  cfg.validate();
  TrainState st;
  st.config = cfg;
  st.action_x = std::make_shared<LinearAction>(cfg.data.c4_action());
  st.action_z = std::make_shared<LinearAction>(planar_rotation_action(make_cyclic(4), cfg.noise_dim));
  Rng data_rng = stream(cfg.seed, 1);
  st.train_set = sample_t_mixture(cfg.data, cfg.n_train, data_rng);
  Rng init_rng = stream(cfg.seed, 2);
  st.generator = std::make_unique<Network>(
      build_generator(cfg.generator, st.action_z, st.action_x, cfg.widths, init_rng, cfg.sym_layer));
  st.discriminator = std::make_unique<Network>(
      build_discriminator(cfg.discriminator, st.action_x, cfg.widths, init_rng));
  st.ema = st.generator->params();
  st.train_rng = stream(cfg.seed, 3);
  st.eval_rng = stream(cfg.seed, 4);
  return st;
}

void train_epochs(TrainState& st, long long epochs) {
  const GanConfig& cfg = st.config;
  const int batch = std::min(cfg.batch, cfg.n_train);
  const int iters = (cfg.n_train + batch - 1) / batch;
  for (long long e = 0; e < epochs; ++e) {
    for (int it = 0; it < iters; ++it) {
      for (int k = 0; k < cfg.d_steps; ++k) discriminator_step(st, batch);
      generator_step(st, batch);
    }
    ++st.epoch;
  }
}

EvalRecord evaluate(TrainState& st) {
  EvalRecord rec;
  rec.epoch = st.epoch;
  const SampleSet s = snapshot_samples(st, st.config.eval_samples, st.eval_rng);
  rec.modes = mode_occupancy(s, st.config.data, true);
  const ResidualReport res = orthogonal_residual(s, st.config.data);
  rec.orth_median = res.median;
  rec.orth_p90 = res.p90;
  rec.invariance = invariance_error(s, *st.action_x, st.eval_rng);
  rec.d_loss = st.last_d_loss;
  rec.g_loss = st.last_g_loss;
  return rec;
}

TrainState train(const GanConfig& cfg, const std::function<void(const EvalRecord&)>& on_eval) {
  TrainState st = make_train_state(cfg);
  auto record = [&]() {
    st.history.push_back(evaluate(st));
    if (on_eval) on_eval(st.history.back());
  };
  record();
  while (st.epoch < cfg.epochs) {
    const long long to_next = cfg.eval_interval - st.epoch % cfg.eval_interval;
    train_epochs(st, std::min(to_next, cfg.epochs - st.epoch));
    record();
  }
  return st;
}

SampleSet snapshot_samples(const TrainState& st, int n, Rng& rng) {
  Network g = *st.generator;
  g.params() = st.ema;
  SampleSet s;
  s.data = g.predict(normal_noise(n, st.config.noise_dim, rng), &rng);
  std::ostringstream prov;
  prov << "generator=" << to_string(st.config.generator) << ", epoch=" << st.epoch
       << ", seed=" << st.config.seed << ", weights=ema";
  s.provenance = prov.str();
  return s;
}

PairedObjective paired_objective(const Network& disc, const LossConfig& loss,
                                 const SampleSet& real, const SampleSet& fake,
                                 const LinearAction& action, Rng& rng, int bootstrap) {
  const SampleSet aug = augment_samples(fake, action, rng);
  const Eigen::VectorXd gr = disc.predict(real.data).col(0);
  const Eigen::VectorXd gf = disc.predict(fake.data).col(0);
  const Eigen::VectorXd ga = disc.predict(aug.data).col(0);
  PairedObjective po;
  po.raw = objective_value(loss, gr, gf);
  po.symmetrized = objective_value(loss, gr, ga);
  std::uniform_int_distribution<int> pr(0, static_cast<int>(gr.size()) - 1);
  std::uniform_int_distribution<int> pf(0, static_cast<int>(gf.size()) - 1);
  std::vector<double> raw, sym;
  Eigen::VectorXd br(gr.size()), bf(gf.size()), ba(gf.size());
  for (int b = 0; b < bootstrap; ++b) {
    for (Eigen::Index i = 0; i < br.size(); ++i) br(i) = gr(pr(rng));
    for (Eigen::Index i = 0; i < bf.size(); ++i) {
      const int k = pf(rng);
      bf(i) = gf(k);
      ba(i) = ga(k);
    }
    raw.push_back(objective_value(loss, br, bf));
    sym.push_back(objective_value(loss, br, ba));
  }
  po.raw_lo = quantile(raw, 0.025);
  po.raw_hi = quantile(raw, 0.975);
  po.sym_lo = quantile(sym, 0.025);
  po.sym_hi = quantile(sym, 0.975);
  return po;
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::kWganGp: return "wgan-gp";
    case LossKind::kFAlpha: return "f-alpha";
    case LossKind::kLipAlpha: return "lip-alpha";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "wgan-gp" || s == "wgan") return LossKind::kWganGp;
  if (s == "f-alpha" || s == "falpha") return LossKind::kFAlpha;
  if (s == "lip-alpha" || s == "lipalpha") return LossKind::kLipAlpha;
  throw std::invalid_argument("unknown loss '" + s + "'");
}

}  // namespace symdiv
