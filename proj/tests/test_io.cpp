#include <doctest.h>

#include "symdiv/io.hpp"

#include <cmath>
#include <sstream>

using namespace symdiv;

namespace {

Json solve(const std::string& text) { return solve_instance(instance_from_json(parse_json(text))); }

}  // namespace

TEST_SUITE("io") {

TEST_CASE("group descriptors") {
  CHECK(group_from_json(parse_json(R"({"kind":"cyclic","n":8})")).order() == 8);
  const FiniteGroup d4 = group_from_json(parse_json(R"({"kind":"dihedral","n":4})"));
  CHECK(d4.order() == 8);
  CHECK_FALSE(d4.is_abelian());
  CHECK_THROWS_AS(group_from_json(parse_json(R"({"kind":"klein","n":4})")), InputError);
  CHECK_THROWS_AS(group_from_json(parse_json(R"({"kind":"cyclic"})")), InputError);
  CHECK_THROWS_AS(group_from_json(parse_json(R"({"kind":"cyclic","n":0})")), InputError);

  const LinearAction a = action_from_json(
      parse_json(R"({"kind":"cyclic","n":4,"ambient_dim":3,"plane":[[0,1,0],[0,0,1]]})"));
  CHECK(a.dim() == 3);
  // The quarter turn fixes the first axis and maps e2 to e3.
  const Eigen::Vector3d e2(0, 1, 0), e1(1, 0, 0);
  CHECK((a.apply(1, e1) - e1).norm() <= 1e-15);
  CHECK((a.apply(1, e2) - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-15);
  CHECK_THROWS_AS(action_from_json(parse_json(R"({"kind":"cyclic","n":4,"ambient_dim":3,"plane":[[1,0]]})")),
                  InputError);
  CHECK_THROWS_AS(action_from_json(parse_json(R"({"kind":"cyclic","n":4,"color":1})")), InputError);
}

TEST_CASE("measure round trip") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0.0, 1.0, 2.5, -1.0;
  const DiscreteMeasure m(Eigen::Vector2d(0.25, 0.75), pts);
  const DiscreteMeasure back = measure_from_json(parse_json(dump(to_json(m))));
  CHECK(back.weights() == m.weights());
  REQUIRE(back.points());
  CHECK(*back.points() == pts);
  CHECK(measure_from_json(parse_json("[0.5, 0.5]")).size() == 2);
  CHECK_THROWS_AS(measure_from_json(parse_json("[0.5, 0.6]")), InputError);
  CHECK_THROWS_AS(measure_from_json(parse_json(R"({"weights":[1], "mass":[1]})")), InputError);
}

TEST_CASE("generator specs") {
  CHECK(generator_from_json(parse_json(R"({"f":"kl"})")).kind() == FDivGenerator::Kind::kKL);
  const FDivGenerator a = generator_from_json(parse_json(R"({"f":"alpha","alpha":3.0})"));
  CHECK(a.alpha_value() == 3.0);
  CHECK(dump(to_json(a)) == dump(parse_json(R"({"f":"alpha","alpha":3.0})")));
  CHECK_THROWS_AS(generator_from_json(parse_json(R"({"f":"alpha"})")), InputError);
  CHECK_THROWS_AS(generator_from_json(parse_json(R"({"f":"alpha","alpha":0.5})")), InputError);
  CHECK_THROWS_AS(generator_from_json(parse_json(R"({"f":"js"})")), InputError);
}

TEST_CASE("identical measures give zero for every divergence kind") {
  const std::string base = R"({"Q":[0.2,0.3,0.5],"P":[0.2,0.3,0.5],"points":[[0,0],[1,0],[0,2]],)";
  for (const char* d : {R"({"kind":"f","f":"kl"})", R"({"kind":"f","f":"alpha","alpha":2})",
                        R"({"kind":"tv"})", R"({"kind":"w1"})", R"({"kind":"sinkhorn","eps":0.5})",
                        R"({"kind":"mmd","bandwidth":1.0})",
                        R"({"kind":"fgamma","f":"kl","lipschitz":1})"}) {
    CAPTURE(d);
    const Json out = solve(base + R"("divergence":)" + d + "}");
    CHECK(std::abs(out["value"].get<double>()) <= 1e-9);
    CHECK(out["witness"].size() == 3);
  }
}

TEST_CASE("four-state KL instance under a swap symmetry") {
  // States {a, a', b, b'} with the swap exchanging primes.
  const Json out = solve(R"({"Q":[0.4,0.1,0.1,0.4],"P":[0.25,0.25,0.25,0.25],
      "group":{"kind":"cyclic","n":2,"perms":[[0,1,2,3],[1,0,3,2]]},
      "divergence":{"kind":"f","f":"kl"}})");
  const double q[4] = {0.4, 0.1, 0.1, 0.4};
  double sum = 0.0;
  for (double x : q) sum += x * std::log(x / 0.25);
  CHECK(out["value"].get<double>() == doctest::Approx(sum).epsilon(1e-14));
  CHECK(std::abs(out["gap"].get<double>()) <= 1e-12);

  // Restricted to invariant test functions the divergence sees only the
  // symmetrized pair, which here is uniform against uniform.
  const Json inv = solve(R"({"Q":[0.4,0.1,0.1,0.4],"P":[0.25,0.25,0.25,0.25],
      "group":{"kind":"cyclic","n":2,"perms":[[0,1,2,3],[1,0,3,2]]},
      "divergence":{"kind":"f","f":"kl","invariant":true}})");
  CHECK(std::abs(inv["value"].get<double>()) <= 1e-15);
}

TEST_CASE("planar group on points and Wasserstein distance") {
  // Two antipodal points under C2; all mass moves distance 2.
  const Json out = solve(R"({"Q":[1,0],"P":[0,1],"points":[[1,0],[-1,0]],
      "group":{"kind":"cyclic","n":2},"divergence":{"kind":"w1","lipschitz":1.5}})");
  CHECK(out["value"].get<double>() == doctest::Approx(3.0).epsilon(1e-12));
  const Json inv = solve(R"({"Q":[1,0],"P":[0,1],"points":[[1,0],[-1,0]],
      "group":{"kind":"cyclic","n":2},"divergence":{"kind":"w1","invariant":true}})");
  CHECK(std::abs(inv["value"].get<double>()) <= 1e-12);
}

TEST_CASE("instance errors") {
  CHECK_THROWS_AS(parse_json("{"), InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1],"divergence":{"kind":"tv"}})"), InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1],"P":[1],"divergence":{"kind":"hellinger"}})"), InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1,0],"P":[0,1],"divergence":{"kind":"w1"}})"), InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1,0],"P":[0,1],"metric":[[0]],"divergence":{"kind":"w1"}})"),
                  InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1,0],"P":[0,1],"metric":[[0,1],[2,0]],"divergence":{"kind":"w1"}})"),
                  InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1,0],"P":[0,1],"divergence":{"kind":"tv","invariant":true}})"),
                  InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1,0],"P":[0,1],"divergence":{"kind":"tv","eps":1}})"), InputError);
  CHECK_THROWS_AS(solve(R"({"Q":[1,0,0],"P":[0,1,0],
      "group":{"kind":"cyclic","n":2,"perms":[[0,1],[1,0]]},"divergence":{"kind":"tv"}})"),
                  InputError);
  // The swap of states 0 and 1 does not preserve this metric.
  CHECK_THROWS_AS(solve(R"({"Q":[1,0,0],"P":[0,1,0],"metric":[[0,1,2],[1,0,1],[2,1,0]],
      "group":{"kind":"cyclic","n":2,"perms":[[0,1,2],[1,0,2]]},"divergence":{"kind":"tv"}})"),
                  InputError);
}

TEST_CASE("training config round trip and validation") {
  GanConfig c;
  c.generator = GeneratorVariant::kIEqv;
  c.sym_layer = true;
  c.loss.kind = LossKind::kWganGp;
  c.seed = 18446744073709551615ULL;
  c.widths = {32, 2};
  c.data.plane = Eigen::MatrixXd::Zero(12, 2);
  c.data.plane(3, 0) = 1.0;
  c.data.plane(7, 1) = 1.0;
  const std::string text = dump(to_json(c));
  const GanConfig back = gan_config_from_json(parse_json(text));
  CHECK(dump(to_json(back)) == text);
  CHECK(back.seed == c.seed);
  CHECK(back.data.plane == c.data.plane);

  const GanConfig d = gan_config_from_json(parse_json("{}"));
  CHECK(dump(to_json(d)) == dump(to_json(GanConfig{})));
  CHECK_THROWS_AS(gan_config_from_json(parse_json(R"({"batchsize":3})")), InputError);
  CHECK_THROWS_AS(gan_config_from_json(parse_json(R"({"batch":0})")), InputError);
  CHECK_THROWS_AS(gan_config_from_json(parse_json(R"({"batch":2.5})")), InputError);
  CHECK_THROWS_AS(gan_config_from_json(parse_json(R"({"seed":-1})")), InputError);
  CHECK_THROWS_AS(gan_config_from_json(parse_json(R"({"generator":"cnn"})")), InputError);
  CHECK_THROWS_AS(gan_config_from_json(parse_json(R"({"loss":{"kind":"hinge"}})")), InputError);
}

TEST_CASE("metrics document carries the summary keys and history arrays") {
  TrainState st;
  st.config.epochs = 5;
  EvalRecord a, b;
  a.epoch = 0;
  b.epoch = 5;
  b.modes.freq = {0.1, 0.2, 0.3, 0.4};
  b.modes.min_mode_freq = 0.1;
  b.orth_median = 1.5;
  b.invariance.ed = 0.25;
  b.invariance.null_hi = 0.5;
  st.history = {a, b};
  const Json j = metrics_json(st);
  CHECK(j["mode_freq"][3].get<double>() == 0.4);
  CHECK(j["min_mode_freq"].get<double>() == 0.1);
  CHECK(j["orth_residual"]["median"].get<double>() == 1.5);
  CHECK(j["orth_residual"].contains("p90"));
  CHECK(j["invariance"]["ed"].get<double>() == 0.25);
  CHECK(j["invariance"]["null_hi"].get<double>() == 0.5);
  CHECK(j["history"]["epoch"].size() == 2);
  CHECK(j["history"]["mode_freq"][1][1].get<double>() == 0.2);
  // The initial record has no losses yet; NaN is written as null.
  CHECK(parse_json(dump(j))["history"]["d_loss"][0].is_null());
  CHECK(j["config"]["epochs"].get<long long>() == 5);
}

TEST_CASE("samples csv round trip is exact") {
  Rng rng(1);
  SampleSet s = sample_t_mixture(TMixtureConfig{}, 50, rng);
  s.provenance = "test";
  std::stringstream ss;
  write_samples_csv(ss, s, 42);
  std::string first;
  std::getline(std::stringstream(ss.str()), first);
  CHECK(first == "# seed=42, source=test");
  const SampleSet back = read_samples_csv(ss);
  CHECK(back.data == s.data);
  CHECK(back.provenance == "test");
  std::stringstream bad("1,2\n3\n");
  CHECK_THROWS_AS(read_samples_csv(bad), InputError);
  std::stringstream junk("1,x\n");
  CHECK_THROWS_AS(read_samples_csv(junk), InputError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("non-finite numbers dump as null") {
  Json j;
  j["x"] = std::nan("");
  j["y"] = INFINITY;
  CHECK(dump(j) == "{\n  \"x\": null,\n  \"y\": null\n}\n");
}

}  // TEST_SUITE
