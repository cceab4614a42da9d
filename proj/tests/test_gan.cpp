#include <doctest.h>

#include "support/gradcheck.hpp"
#include "symdiv/exactdiv.hpp"
#include "symdiv/gan.hpp"

#include <cmath>
#include <cstring>

using namespace symdiv;

namespace {

double objective(const LossConfig& loss, const Eigen::VectorXd& real, const Eigen::VectorXd& fake) {
  Graph g;
  return g.scalar(variational_objective(g, loss, g.leaf(real), g.leaf(fake)));
}

GanConfig small_config() {
  GanConfig cfg;
  cfg.epochs = 2;
  cfg.eval_interval = 1;
  cfg.eval_samples = 64;
  cfg.n_train = 50;
  cfg.batch = 16;
  cfg.widths.hidden = 16;
  cfg.seed = 5;
  return cfg;
}

struct PenaltyOfNet {
  Eigen::MatrixXd real, fake;
  unsigned long long seed;
  Graph::Id build(Graph& g, const Network& net, const std::vector<Graph::Id>& params) const {
    Rng rng(seed);
    return gradient_penalty(g, net, params, real, fake, rng);
  }
};

}  // namespace

TEST_SUITE("gan") {

TEST_CASE("objectives at constant discriminators") {
  const Eigen::VectorXd zr = Eigen::VectorXd::Zero(7), zf = Eigen::VectorXd::Zero(5);
  LossConfig wgan{LossKind::kWganGp};
  CHECK(objective(wgan, zr, zf) == 0.0);
  // f*(0) = 1/(a(a-1)) for the alpha generator with f(1) = 0.
  LossConfig falpha{LossKind::kFAlpha, 2.0};
  CHECK(objective(falpha, zr, zf) == doctest::Approx(-0.5).epsilon(1e-15));
  LossConfig fa3{LossKind::kFAlpha, 3.0};
  CHECK(objective(fa3, zr, zf) == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  LossConfig lip{LossKind::kLipAlpha, 2.0};
  for (const double c : {-3.0, 0.0, 2.5, 40.0}) {
    const Eigen::VectorXd r = Eigen::VectorXd::Constant(7, c), f = Eigen::VectorXd::Constant(5, c);
    CHECK(std::abs(objective(lip, r, f)) <= 1e-8);
  }
}

TEST_CASE("conjugate node matches the generator's conjugate") {
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(9, -3.0, 4.0);
  for (const auto& gen : {FDivGenerator::kl(), FDivGenerator::alpha(2.0), FDivGenerator::alpha(1.5)}) {
    Graph g;
    const auto c = conjugate_node(g, g.leaf(y), gen);
    for (int i = 0; i < y.size(); ++i) {
      CHECK(g.value(c)(i, 0) == doctest::Approx(gen.conj(y(i))).epsilon(1e-13));
    }
  }
}

TEST_CASE("KL objective at the optimal discriminator equals the KL divergence") {
  // Q = (3/4, 1/4) as four real draws, P = (1/2, 1/2) as two fake draws.
  const double q1 = 0.75, q2 = 0.25, p1 = 0.5, p2 = 0.5;
  const double g1 = 1.0 + std::log(q1 / p1), g2 = 1.0 + std::log(q2 / p2);
  Eigen::VectorXd real(4), fake(2);
  real << g1, g1, g1, g2;
  fake << g1, g2;
  LossConfig kl{LossKind::kFAlpha};
  kl.kl = true;
  const double exact = f_divergence(DiscreteMeasure(Eigen::Vector2d(q1, q2)),
                                    DiscreteMeasure(Eigen::Vector2d(p1, p2)), FDivGenerator::kl())
                           .value;
  CHECK(objective(kl, real, fake) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("lip-alpha objective gradient treats nu* as constant without error") {
  Rng rng(1);
  const Eigen::VectorXd real = gradcheck::normal_matrix(6, 1, rng);
  Eigen::VectorXd fake = gradcheck::normal_matrix(5, 1, rng);
  LossConfig lip{LossKind::kLipAlpha, 2.0};
  Graph g;
  const auto f = g.leaf(fake);
  const auto grad = g.gradients(variational_objective(g, lip, g.leaf(real), f), {f})[0];
  const double h = 1e-5;
  for (int i = 0; i < fake.size(); ++i) {
    Eigen::VectorXd up = fake, down = fake;
    up(i) += h;
    down(i) -= h;
    const double fd = (objective(lip, real, up) - objective(lip, real, down)) / (2 * h);
    CHECK(g.value(grad)(i, 0) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("gradient penalty of linear discriminators") {
  Rng rng(2);
  const Eigen::MatrixXd real = gradcheck::normal_matrix(8, 3, rng);
  const Eigen::MatrixXd fake = gradcheck::normal_matrix(8, 3, rng);
  Network net({LayerSpec::dense(3, 1)}, rng);
  net.params()[0] << 2.0, 0.0, 0.0;
  {
    Graph g;
    const auto params = net.bind(g);
    CHECK(g.scalar(gradient_penalty(g, net, params, real, fake, rng)) == doctest::Approx(3.0).epsilon(1e-14));
  }
  net.params()[0] << 0.6, -0.8, 0.0;
  {
    Graph g;
    const auto params = net.bind(g);
    CHECK(g.scalar(gradient_penalty(g, net, params, real, fake, rng)) <= 1e-15);
  }
  CHECK_THROWS_AS(
      [&] {
        Graph g;
        const auto params = net.bind(g);
        gradient_penalty(g, net, params, real, fake.topRows(4), rng);
      }(),
      ShapeError);
}

TEST_CASE("gradient penalty parameter gradient passes the finite-difference check") {
  Rng rng(3);
  auto a = std::make_shared<LinearAction>(planar_rotation_action(make_cyclic(4), 4));
  Network net = build_discriminator(DiscriminatorVariant::kInv, a, {8, 2}, rng);
  // Steep enough that the one-sided penalty is active.
  for (auto& p : net.params()) p *= 6.0;
  int checked = 0;
  for (int attempt = 0; attempt < 50 && checked < 3; ++attempt) {
    PenaltyOfNet loss{gradcheck::normal_matrix(4, 4, rng), gradcheck::normal_matrix(4, 4, rng), rng()};
    Graph g;
    const auto params = net.bind(g);
    const double value = g.scalar(loss.build(g, net, params));
    if (g.kink_margin() < gradcheck::kMinMargin || value <= 0.0) continue;
    const auto res = gradcheck::check(net, loss, gradcheck::kStep);
    CHECK(res.rel_error <= 1e-3);
    ++checked;
  }
  CHECK(checked == 3);
}

TEST_CASE("loss and config validation") {
  CHECK_THROWS(LossConfig{LossKind::kLipAlpha, 1.0}.validate());
  CHECK_THROWS(LossConfig{LossKind::kWganGp, 2.0, false, -1.0}.validate());
  CHECK_NOTHROW(LossConfig{LossKind::kWganGp, 0.5}.validate());
  GanConfig cfg;
  cfg.batch = 0;
  CHECK_THROWS(cfg.validate());
  CHECK(parse_loss_kind(to_string(LossKind::kFAlpha)) == LossKind::kFAlpha);
  CHECK_THROWS(parse_loss_kind("hinge"));
}

TEST_CASE("zero epochs records only the initial state") {
  GanConfig cfg = small_config();
  cfg.epochs = 0;
  const TrainState st = train(cfg);
  REQUIRE(st.history.size() == 1);
  CHECK(st.history[0].epoch == 0);
  CHECK(std::isnan(st.history[0].d_loss));
  CHECK(st.ema == st.generator->params());
}

TEST_CASE("training is deterministic given the seed") {
  GanConfig cfg = small_config();
  cfg.generator = GeneratorVariant::kVanilla;
  const TrainState a = train(cfg);
  const TrainState b = train(cfg);
  REQUIRE(a.history.size() == 3);
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].epoch == static_cast<long long>(i));
    // Bitwise comparison; the initial record has NaN losses.
    CHECK(std::memcmp(&a.history[i].d_loss, &b.history[i].d_loss, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.history[i].g_loss, &b.history[i].g_loss, sizeof(double)) == 0);
    CHECK(a.history[i].modes.freq == b.history[i].modes.freq);
    CHECK(a.history[i].invariance.ed == b.history[i].invariance.ed);
  }
  CHECK(a.generator->params() == b.generator->params());
  // Parameters moved, and the EMA lags behind them.
  CHECK(a.ema != a.generator->params());
  cfg.seed = 6;
  const TrainState c = train(cfg);
  CHECK(c.history[2].d_loss != a.history[2].d_loss);
}

TEST_CASE("every loss trains without aborting") {
  for (auto kind : {LossKind::kWganGp, LossKind::kFAlpha, LossKind::kLipAlpha}) {
    GanConfig cfg = small_config();
    cfg.loss.kind = kind;
    const TrainState st = train(cfg);
    CHECK(std::isfinite(st.history.back().d_loss));
    CHECK(std::isfinite(st.history.back().g_loss));
  }
}

TEST_CASE("a diverging run aborts with its history") {
  GanConfig cfg = small_config();
  cfg.lr_g = 1e300;
  cfg.lr_d = 1e300;
  cfg.epochs = 3;
  CHECK_THROWS_AS(train(cfg), TrainingAborted);
  try {
    train(cfg);
  } catch (const TrainingAborted& e) {
    CHECK(!e.history.empty());
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
  }
}

TEST_CASE("snapshot samples: shape and invariance of the pushforward") {
  GanConfig cfg = small_config();
  Rng rng(7);
  TrainState eqv = make_train_state(cfg);
  const SampleSet s = snapshot_samples(eqv, 1000, rng);
  CHECK(s.size() == 1000);
  CHECK(s.dim() == 12);
  CHECK(invariance_error(s, *eqv.action_x, rng).within());

  // The dense-first generator is only mildly asymmetric at initialization,
  // so this probe uses the full width and more samples.
  cfg.generator = GeneratorVariant::kIEqv;
  cfg.widths = {};
  cfg.seed = 2;
  TrainState ieqv = make_train_state(cfg);
  CHECK_FALSE(invariance_error(snapshot_samples(ieqv, 2000, rng), *ieqv.action_x, rng).within());

  // A symmetrization layer after the dense input restores invariance.
  cfg.sym_layer = true;
  TrainState sym = make_train_state(cfg);
  CHECK(invariance_error(snapshot_samples(sym, 2000, rng), *sym.action_x, rng).within());
}

TEST_CASE("an invariant discriminator cannot tell samples from their symmetrization") {
  GanConfig cfg = small_config();
  cfg.generator = GeneratorVariant::kVanilla;
  TrainState st = make_train_state(cfg);
  Rng rng(8);
  const SampleSet fake = snapshot_samples(st, 300, rng);
  const auto po = paired_objective(*st.discriminator, cfg.loss, st.train_set, fake, *st.action_x, rng);
  CHECK(std::abs(po.raw - po.symmetrized) <= 1e-10);
  CHECK(po.overlap());
  // A plain discriminator separates them.
  Rng init(9);
  const Network plain = build_discriminator(DiscriminatorVariant::kVanilla, st.action_x, {}, init);
  const auto pv = paired_objective(plain, cfg.loss, st.train_set, fake, *st.action_x, rng);
  CHECK(std::abs(pv.raw - pv.symmetrized) > 1e-6);
}

}  // TEST_SUITE
