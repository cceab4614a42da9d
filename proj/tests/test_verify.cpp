#include <doctest.h>

#include "symdiv/verify.hpp"

using namespace symdiv;

TEST_SUITE("verify") {

TEST_CASE("zero trials produce an empty passing report") {
  Rng rng(1);
  const auto rep = run_verification(rng, 0, all_families());
  CHECK(rep.rows.empty());
  CHECK(rep.passed());
}

TEST_CASE("family selection") {
  Rng rng(2);
  const auto rep = run_verification(rng, 3, {"tv", "lambda"});
  REQUIRE_FALSE(rep.rows.empty());
  for (const auto& row : rep.rows) CHECK((row.family == "tv" || row.family == "lambda"));
  CHECK(rep.passed());
}

TEST_CASE("every family passes on a short run") {
  Rng rng(3);
  const auto rep = run_verification(rng, 10, all_families());
  for (const auto& row : rep.rows) {
    CAPTURE(row.family);
    CAPTURE(row.identity);
    CHECK(row.cases > 0);
    CHECK(row.passed());
  }
}

TEST_CASE("a NaN discrepancy fails its row") {
  VerifyReport rep;
  rep.row("x", "id", 1e-9).record(0.0);
  CHECK(rep.passed());
  rep.row("x", "id", 1e-9).record(std::numeric_limits<double>::quiet_NaN());
  CHECK_FALSE(rep.passed());
  CHECK(rep.rows.size() == 1);
}

TEST_CASE("random symmetric instances are closed and isometric") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto inst = random_symmetric_instance(rng, 12);
    const int n = inst.action.state_count();
    CHECK(n >= 2);
    CHECK(n <= 12);
    CHECK(inst.metric.is_isometric(inst.action));
  }
}

}  // TEST_SUITE
