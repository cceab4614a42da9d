#include "symdiv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace symdiv {

namespace {

constexpr double kSinkhornEps = 0.2;

double discrepancy(double a, double b) {
  if (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)) return 0.0;
  return std::abs(a - b);
}

FiniteGroup pick_group(Rng& rng, int max_states) {
  // C8 has only orbits of size 1 and 8.
  std::vector<FiniteGroup> groups = {make_cyclic(2), make_cyclic(4), make_dihedral(2),
                                     make_dihedral(4)};
  if (max_states >= 9) groups.push_back(make_cyclic(8));
  std::uniform_int_distribution<size_t> pick(0, groups.size() - 1);
  return groups[pick(rng)];
}

void add_orbit(const LinearAction& act, const Eigen::Vector2d& x, std::vector<Eigen::VectorXd>& pts) {
  for (int s = 0; s < act.group().order(); ++s) {
    const Eigen::VectorXd y = act.apply(s, x);
    bool seen = false;
    for (const auto& p : pts) seen |= (p - y).norm() < 1e-9;
    if (!seen) pts.push_back(y);
  }
}

Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& pts) {
  Eigen::MatrixXd m(pts.size(), 2);
  for (size_t i = 0; i < pts.size(); ++i) m.row(i) = pts[i].transpose();
  return m;
}

Eigen::MatrixXd unit_scale_cost(const MetricSpace& metric) {
  Eigen::MatrixXd c = metric.distances().array().square();
  const double mx = c.maxCoeff();
  return mx > 0.0 ? Eigen::MatrixXd(c / mx) : c;
}

double median_distance(const MetricSpace& metric) {
  std::vector<double> d;
  for (int i = 0; i < metric.size(); ++i) {
    for (int j = i + 1; j < metric.size(); ++j) d.push_back(metric(i, j));
  }
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return std::max(d[d.size() / 2], 1e-3);
}

// Invariant Gaussian kernel on the instance.
Eigen::MatrixXd instance_kernel(const SymmetricInstance& inst) {
  return invariant_kernel(gaussian_kernel(inst.points, median_distance(inst.metric)), inst.action);
}

// MMD over the invariant class: the separately symmetrized kernel is
// constant on orbit pairs, so it lives on the quotient with class masses.
double restricted_mmd(const DiscreteMeasure& q, const DiscreteMeasure& p,
                      const Eigen::MatrixXd& kbar, const QuotientSpace& quo) {
  const int k = static_cast<int>(quo.classes.size());
  Eigen::MatrixXd kq(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) kq(a, b) = kbar(quo.classes[a].front(), quo.classes[b].front());
  }
  return mmd(push_to_classes(q, quo.labels), push_to_classes(p, quo.labels), kq);
}

const FDivGenerator& generator_for(int trial) {
  static const FDivGenerator kl = FDivGenerator::kl();
  static const FDivGenerator a2 = FDivGenerator::alpha(2.0);
  return trial % 2 == 0 ? kl : a2;
}

Eigen::VectorXd random_function(int n, Rng& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g(i) = u(rng);
  return g;
}

}  // namespace

void VerifyRow::record(double d) {
  ++cases;
  if (std::isnan(d)) d = std::numeric_limits<double>::infinity();
  max_discrepancy = std::max(max_discrepancy, d);
}

bool VerifyReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.passed(); });
}

VerifyRow& VerifyReport::row(const std::string& family, const std::string& identity,
                             double tolerance) {
  for (auto& r : rows) {
    if (r.family == family && r.identity == identity) return r;
  }
  rows.push_back(VerifyRow{family, identity, 0, 0.0, tolerance});
  return rows.back();
}

void VerifyReport::append(const VerifyReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

SymmetricInstance random_symmetric_instance(Rng& rng, int max_states) {
  if (max_states < 2) throw std::invalid_argument("random_symmetric_instance: need max_states >= 2");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const FiniteGroup g = pick_group(rng, max_states);
    const LinearAction act = planar_rotation_action(g, 2);
    const bool dihedral = g.kind() == GroupKind::kDihedral;
    const int generic = g.order();
    const int axis = dihedral ? g.n() : g.order();
    std::vector<Eigen::VectorXd> pts;
    if (u(rng) < 0.4) pts.push_back(Eigen::VectorXd::Zero(2));
    for (int attempt = 0; attempt < 8; ++attempt) {
      const int room = max_states - static_cast<int>(pts.size());
      const bool can_generic = generic <= room;
      const bool can_axis = dihedral && axis <= room;
      if (!can_generic && !can_axis) break;
      const double r = 0.5 + 1.5 * u(rng);
      Eigen::Vector2d x;
      if (can_generic && (!can_axis || u(rng) < 0.6)) {
        const double theta = 2.0 * std::numbers::pi * u(rng);
        x << r * std::cos(theta), r * std::sin(theta);
      } else {
        x << r, 0.0;  // fixed by the reflection s
      }
      add_orbit(act, x, pts);
      if (pts.size() >= 3 && u(rng) < 0.35) break;
    }
    if (pts.size() < 2) continue;
    const Eigen::MatrixXd m = stack(pts);
    PermutationAction perm = permutation_from_linear(act, pts, 1e-9);
    MetricSpace metric = MetricSpace::euclidean(m);
    return SymmetricInstance{act, std::move(perm), m, std::move(metric)};
  }
}

DiscreteMeasure random_measure(int states, Rng& rng, double zero_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd w(states);
  for (int i = 0; i < states; ++i) w(i) = u(rng) < zero_prob ? 0.0 : 0.05 + u(rng);
  if (w.sum() <= 0.0) w(std::uniform_int_distribution<int>(0, states - 1)(rng)) = 1.0;
  return DiscreteMeasure::from_unnormalized(w);
}

FamilySet all_families() {
  return {"f", "tv", "w1", "mmd", "sinkhorn", "infconv", "kernel", "lemma1", "lambda"};
}

VerifyReport verify_lemma1(Rng& rng, int trials) {
  VerifyReport rep;
  auto& fproj = rep.row("lemma1", "S(S g) = S g", kAlgebraTol);
  auto& mproj = rep.row("lemma1", "S(S P) = S P", kAlgebraTol);
  auto& comp = rep.row("lemma1", "S(g o T) = S g", kAlgebraTol);
  auto& dual = rep.row("lemma1", "E_{S P} g = E_P S g", kAlgebraTol);
  auto& range = rep.row("lemma1", "S g constant on orbits; invariant g fixed", kAlgebraTol);
  auto& cond = rep.row("lemma1", "E_P[S g 1_A] = E_P[g 1_A], invariant P", kAlgebraTol);
  auto& jensen = rep.row("lemma1", "f*(S g - nu) <= S f*(g - nu)", kAlgebraTol);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_symmetric_instance(rng, 12);
    const auto& act = inst.action;
    const int n = act.state_count();
    const Eigen::VectorXd g = random_function(n, rng);
    const auto p = random_measure(n, rng, 0.2);
    const Eigen::VectorXd sg = symmetrize_function(g, act);
    fproj.record((symmetrize_function(sg, act) - sg).cwiseAbs().maxCoeff());
    const auto sp = symmetrize_measure(p, act);
    mproj.record((symmetrize_measure(sp, act).weights() - sp.weights()).cwiseAbs().maxCoeff());
    double worst = 0.0;
    for (int s = 0; s < act.group().order(); ++s) {
      const Eigen::VectorXd gs = compose_with_action(g, act, s);
      worst = std::max(worst, (symmetrize_function(gs, act) - sg).cwiseAbs().maxCoeff());
    }
    comp.record(worst);
    dual.record(std::abs(sp.expect(g) - p.expect(sg)));

    double spread = 0.0;
    for (int s = 0; s < act.group().order(); ++s) {
      for (int x = 0; x < n; ++x) spread = std::max(spread, std::abs(sg(act.apply(s, x)) - sg(x)));
    }
    const auto labels = orbit_labels(act);
    const Eigen::VectorXd per_orbit = random_function(static_cast<int>(orbits(act).size()), rng);
    Eigen::VectorXd inv(n);
    for (int x = 0; x < n; ++x) inv(x) = per_orbit(labels[x]);
    spread = std::max(spread, (symmetrize_function(inv, act) - inv).cwiseAbs().maxCoeff());
    range.record(spread);

    // Random union of orbits as the event A.
    Eigen::VectorXd indicator(n);
    std::vector<char> chosen(orbits(act).size());
    for (auto& c : chosen) c = u(rng) < 0.5;
    for (int x = 0; x < n; ++x) indicator(x) = chosen[labels[x]] ? 1.0 : 0.0;
    cond.record(std::abs(sp.expect(sg.cwiseProduct(indicator)) - sp.expect(g.cwiseProduct(indicator))));

    const auto& gen = generator_for(t);
    const double nu = 2.0 * u(rng) - 1.0;
    Eigen::VectorXd fs(n), shifted(n);
    for (int x = 0; x < n; ++x) shifted(x) = gen.conj(g(x) - nu);
    const Eigen::VectorXd sf = symmetrize_function(shifted, act);
    double violation = 0.0;
    for (int x = 0; x < n; ++x) {
      fs(x) = gen.conj(sg(x) - nu);
      violation = std::max(violation, fs(x) - sf(x));
    }
    jensen.record(violation);
  }
  return rep;
}

VerifyReport verify_theorem1(Rng& rng, int trials, const FamilySet& families) {
  VerifyReport rep;
  const std::string id = "invariant (Q,P): full = invariant class";
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_symmetric_instance(rng, 12);
    const int n = inst.action.state_count();
    const auto q = symmetrize_measure(random_measure(n, rng, 0.15), inst.action);
    const auto p = symmetrize_measure(random_measure(n, rng, 0.15), inst.action);
    const auto quo = quotient(inst.metric, {q, p}, inst.action);
    const auto& qq = quo.measures[0];
    const auto& qp = quo.measures[1];
    if (families.count("f")) {
      const auto& gen = generator_for(t);
      rep.row("f", id, kClosedFormTol)
          .record(discrepancy(f_divergence(q, p, gen).value, f_divergence(qq, qp, gen).value));
    }
    if (families.count("tv")) {
      rep.row("tv", id, kTvTol).record(std::abs(tv_ipm(q, p).value - tv_ipm(qq, qp).value));
    }
    if (families.count("w1")) {
      const double lip = 0.5 + (t % 3);
      rep.row("w1", id, kLpTol)
          .record(std::abs(wasserstein1(q, p, inst.metric, lip).value -
                           wasserstein1(qq, qp, quo.metric, lip).value));
    }
    if (families.count("mmd")) {
      const Eigen::MatrixXd k = instance_kernel(inst);
      const Eigen::MatrixXd kbar = symmetrized_cost(k, inst.action);
      rep.row("mmd", id, kClosedFormTol)
          .record(std::abs(mmd(q, p, k) - restricted_mmd(q, p, kbar, quo)));
    }
    if (families.count("sinkhorn")) {
      const Eigen::MatrixXd c = unit_scale_cost(inst.metric);
      SinkhornOptions restricted;
      restricted.labels = &quo.labels;
      rep.row("sinkhorn", id, kSinkhornTol)
          .record(std::abs(sinkhorn_divergence(q, p, c, kSinkhornEps).value -
                           sinkhorn_divergence(q, p, c, kSinkhornEps, restricted).value));
    }
  }
  return rep;
}

VerifyReport verify_mode_collapse_identity(Rng& rng, int trials, const FamilySet& families) {
  VerifyReport rep;
  const std::string id = "invariant class on (Q,P) = full on (SQ,SP)";
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_symmetric_instance(rng, 12);
    const auto& act = inst.action;
    const int n = act.state_count();
    const auto q = random_measure(n, rng, 0.15);
    const auto p = random_measure(n, rng, 0.15);
    const auto sq = symmetrize_measure(q, act);
    const auto sp = symmetrize_measure(p, act);
    const auto quo = quotient(inst.metric, {q, p}, act);
    const auto& oq = quo.measures[0];
    const auto& op = quo.measures[1];
    if (families.count("f")) {
      const auto& gen = generator_for(t);
      rep.row("f", id, kClosedFormTol)
          .record(discrepancy(f_divergence(oq, op, gen).value, f_divergence(sq, sp, gen).value));
    }
    if (families.count("tv")) {
      rep.row("tv", id, kTvTol).record(std::abs(tv_ipm(oq, op).value - tv_ipm(sq, sp).value));
    }
    if (families.count("w1")) {
      rep.row("w1", id, kLpTol)
          .record(std::abs(wasserstein1(oq, op, quo.metric).value -
                           wasserstein1(sq, sp, inst.metric).value));
    }
    if (families.count("mmd")) {
      const Eigen::MatrixXd k = instance_kernel(inst);
      const Eigen::MatrixXd kbar = symmetrized_cost(k, act);
      rep.row("mmd", id, kClosedFormTol)
          .record(std::abs(restricted_mmd(q, p, kbar, quo) - mmd(sq, sp, k)));
      rep.row("mmd", "MMD(SQ,SP) <= MMD(Q,P)", kClosedFormTol)
          .record(std::max(0.0, mmd(sq, sp, k) - mmd(q, p, k)));
    }
    if (families.count("sinkhorn")) {
      // Separately invariant cost: restricted potentials on (Q,P) against the
      // unrestricted problem on the symmetrized pair.
      const Eigen::MatrixXd c = symmetrized_cost(unit_scale_cost(inst.metric), act);
      SinkhornOptions restricted;
      restricted.labels = &quo.labels;
      rep.row("sinkhorn", id, kSinkhornTol)
          .record(std::abs(sinkhorn_divergence(q, p, c, kSinkhornEps, restricted).value -
                           sinkhorn_divergence(sq, sp, c, kSinkhornEps).value));
    }

    // Degeneracy witness: P concentrated on one state, Q its symmetrization.
    std::vector<int> moved;
    for (int x = 0; x < n; ++x) {
      bool fixed = true;
      for (int s = 0; s < act.group().order(); ++s) fixed &= act.apply(s, x) == x;
      if (!fixed) moved.push_back(x);
    }
    if (moved.empty()) continue;
    const int at = moved[std::uniform_int_distribution<size_t>(0, moved.size() - 1)(rng)];
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 0.02);
    w(at) += 1.0;
    const auto pd = DiscreteMeasure::from_unnormalized(w);
    const auto qd = symmetrize_measure(pd, act);
    const auto dq = quotient(inst.metric, {qd, pd}, act);
    const std::string restricted_id = "Q = S[P] != P: invariant class value <= 1e-8";
    const std::string full_id = "Q = S[P] != P: full value >= 1e-3";
    auto witness = [&](const std::string& fam, double restricted_value, double full_value) {
      rep.row(fam, restricted_id, kClosedFormTol).record(std::abs(restricted_value));
      rep.row(fam, full_id, 0.0).record(std::max(0.0, kWitnessGap - full_value));
    };
    if (families.count("f")) {
      const auto& gen = generator_for(t);
      witness("f", f_divergence(dq.measures[0], dq.measures[1], gen).value,
              f_divergence(qd, pd, gen).value);
    }
    if (families.count("tv")) {
      witness("tv", tv_ipm(dq.measures[0], dq.measures[1]).value, tv_ipm(qd, pd).value);
    }
    if (families.count("w1")) {
      witness("w1", wasserstein1(dq.measures[0], dq.measures[1], dq.metric).value,
              wasserstein1(qd, pd, inst.metric).value);
    }
    if (families.count("mmd")) {
      const Eigen::MatrixXd k = instance_kernel(inst);
      witness("mmd", restricted_mmd(qd, pd, symmetrized_cost(k, act), dq), mmd(qd, pd, k));
    }
  }
  return rep;
}

VerifyReport verify_kernel_theorem(Rng& rng, int trials) {
  VerifyReport rep;
  const std::string id = "K-invariant (Q,P): full = class-restricted";
  const std::string id_general = "class-restricted on (Q,P) = full on (S^K Q, S^K P)";
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    const int n = std::uniform_int_distribution<int>(3, 10)(rng);
    const int classes = std::uniform_int_distribution<int>(1, n - 1)(rng);
    std::vector<int> labels(n);
    for (int x = 0; x < n; ++x) labels[x] = x < classes ? x : std::uniform_int_distribution<int>(0, classes - 1)(rng);
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto k = coarse_grain_kernel(labels);
    rep.row("kernel", "S_K is a projection", kAlgebraTol)
        .record(((k.matrix() * k.matrix()) - k.matrix()).cwiseAbs().maxCoeff());

    const auto q0 = random_measure(n, rng, 0.1);
    const auto p0 = random_measure(n, rng, 0.1);
    const auto q = kernel_push(k, q0);
    const auto p = kernel_push(k, p0);
    const auto& gen = generator_for(t);
    rep.row("kernel.f", id, kClosedFormTol)
        .record(discrepancy(f_divergence(q, p, gen).value,
                            f_divergence(push_to_classes(q, labels), push_to_classes(p, labels), gen).value));
    rep.row("kernel.tv", id, kTvTol)
        .record(std::abs(tv_ipm(q, p).value -
                         tv_ipm(push_to_classes(q, labels), push_to_classes(p, labels)).value));
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) pts.row(i) << z(rng), z(rng);
    const Eigen::MatrixXd gram = gaussian_kernel(pts, 1.0);
    const Eigen::MatrixXd restricted = k.matrix() * gram * k.matrix().transpose();
    rep.row("kernel.mmd", id, kClosedFormTol).record(std::abs(mmd(q, p, gram) - mmd(q, p, restricted)));

    // Non-invariant inputs: restricted class sees only the class masses.
    rep.row("kernel.f", id_general, kClosedFormTol)
        .record(discrepancy(f_divergence(push_to_classes(q0, labels), push_to_classes(p0, labels), gen).value,
                            f_divergence(q, p, gen).value));
    rep.row("kernel.mmd", id_general, kClosedFormTol)
        .record(std::abs(mmd(q0, p0, restricted) - mmd(q, p, gram)));
  }
  // Data processing on dense random kernels, twice as many draws.
  for (int t = 0; t < 2 * trials; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 10)(rng);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = u(rng) < 0.3 ? 0.0 : u(rng);
      m(i, std::uniform_int_distribution<int>(0, n - 1)(rng)) += 0.1;
      m.row(i) /= m.row(i).sum();
    }
    const ProbabilityKernel k(m);
    const auto q = random_measure(n, rng, 0.2);
    const auto p = random_measure(n, rng, 0.1);
    const auto kq = kernel_push(k, q);
    const auto kp = kernel_push(k, p);
    for (const auto& gen : {FDivGenerator::kl(), FDivGenerator::alpha(2.0)}) {
      const double before = f_divergence(q, p, gen).value;
      const double after = f_divergence(kq, kp, gen).value;
      const double violation = std::isinf(before) ? 0.0 : after - before;
      rep.row("kernel.dpi", "D_f(S^K Q||S^K P) <= D_f(Q||P)", kDataProcessingTol)
          .record(std::max(0.0, violation));
    }
    rep.row("kernel.dpi", "TV(S^K Q, S^K P) <= TV(Q, P)", kDataProcessingTol)
        .record(std::max(0.0, tv_ipm(kq, kp).value - tv_ipm(q, p).value));
  }
  return rep;
}

VerifyReport verify_infconv(Rng& rng, int trials) {
  VerifyReport rep;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto& bracket = rep.row("infconv", "dual <= primal", 1e-9);
  auto& gap = rep.row("infconv", "gap <= 1e-3", kIterativeTol);
  auto& lower = rep.row("infconv", "value >= 0", 1e-9);
  auto& upper = rep.row("infconv", "value <= min(D_f, L W1)", kLpTol);
  auto& sym = rep.row("infconv", "eta invariant for invariant (Q,P)", kLpTol);
  auto& thm = rep.row("infconv", "invariant (Q,P): full = quotient", kIterativeTol);
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_symmetric_instance(rng, 6);
    const auto& act = inst.action;
    const int n = act.state_count();
    const bool invariant = t % 2 == 0;
    auto q = random_measure(n, rng, 0.2);
    auto p = random_measure(n, rng, 0.1);
    if (invariant) {
      q = symmetrize_measure(q, act);
      p = symmetrize_measure(p, act);
    }
    const auto& gen = generator_for(t / 2);
    const double lip = 0.25 + 2.0 * u(rng);
    const auto r = f_gamma_divergence(q, p, gen, inst.metric, lip, {}, invariant ? &act : nullptr);
    bracket.record(std::max(0.0, r.dual_value - r.value));
    gap.record(r.gap);
    lower.record(std::max(0.0, -r.value));
    const double cap = std::min(f_divergence(q, p, gen).value, wasserstein1(q, p, inst.metric, lip).value);
    upper.record(std::max(0.0, r.value - cap));
    if (invariant) {
      sym.record(invariance_defect(DiscreteMeasure::from_unnormalized(r.eta), act));
      const auto quo = quotient(inst.metric, {q, p}, act);
      const auto rq = f_gamma_divergence(quo.measures[0], quo.measures[1], gen, quo.metric, lip);
      thm.record(std::abs(r.value - rq.value));
    }
  }
  return rep;
}

VerifyReport verify_lambda(Rng& rng, int trials) {
  VerifyReport rep;
  auto& kl = rep.row("lambda", "Lambda_KL = log E_P exp(g)", kLambdaTol);
  auto& shift = rep.row("lambda", "Lambda[g + c] = Lambda[g] + c", kShiftTol);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto klgen = FDivGenerator::kl();
  for (int t = 0; t < trials; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    const auto p = random_measure(n, rng, 0.2);
    const Eigen::VectorXd g = random_function(n, rng, 3.0);
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) oracle += p[i] * std::exp(g(i));
    kl.record(std::abs(lambda_f(klgen, g, p).value - std::log(oracle)));
    const double c = u(rng);
    for (const auto& gen : {klgen, FDivGenerator::alpha(2.0), FDivGenerator::alpha(5.0)}) {
      const double base = lambda_f(gen, g, p).value;
      const Eigen::VectorXd gc = (g.array() + c).matrix();
      shift.record(std::abs(lambda_f(gen, gc, p).value - base - c));
    }
  }
  return rep;
}

VerifyReport run_verification(Rng& rng, int trials, const FamilySet& families) {
  VerifyReport rep;
  if (trials <= 0) return rep;
  if (families.count("lemma1")) rep.append(verify_lemma1(rng, 2 * trials));
  if (families.count("lambda")) rep.append(verify_lambda(rng, trials));
  const bool any_family = families.count("f") || families.count("tv") || families.count("w1") ||
                          families.count("mmd") || families.count("sinkhorn");
  if (any_family) {
    rep.append(verify_theorem1(rng, trials, families));
    rep.append(verify_mode_collapse_identity(rng, trials, families));
  }
  if (families.count("kernel")) rep.append(verify_kernel_theorem(rng, trials));
  if (families.count("infconv")) rep.append(verify_infconv(rng, std::max(1, trials / 2)));
  return rep;
}

}  // namespace symdiv
