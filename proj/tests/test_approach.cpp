#include <doctest.h>

#include <cmath>
#include <vector>

#include "orthant/approach.hpp"
#include "orthant/errors.hpp"
#include "oracles.hpp"

using namespace orthant;

namespace {

// Matching pennies as a one-dimensional vector game: +1 on a match.
VectorPayoffGame pennies() {
  return VectorPayoffGame{{{{1.0}, {-1.0}}, {{-1.0}, {1.0}}}};
}

Adversary uniform_adversary(int cols) {
  return [cols](const AdversaryView&, Rng&) { return SimplexVector::uniform(cols); };
}

Adversary constant_adversary(int cols, int j) {
  return [cols, j](const AdversaryView&, Rng&) { return SimplexVector::vertex(cols, j); };
}

ConvexTarget whole_space() {
  return ConvexTarget::from_oracle([](const Vec& z) { return z; }, 1.0);
}

}  // namespace

TEST_CASE("vector payoff game shape and radius") {
  VectorPayoffGame g = pennies();
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 2);
  CHECK(g.dim() == 1);
  CHECK(g.at(0, 1) == Vec{-1.0});
  CHECK(g.radius_sq() == doctest::Approx(1.0));

  CHECK_THROWS_AS(VectorPayoffGame({}), PreconditionError);
  CHECK_THROWS_AS(VectorPayoffGame({{{1.0}}, {}}), PreconditionError);
  CHECK_THROWS_AS(VectorPayoffGame({{{1.0}, {1.0, 2.0}}}), PreconditionError);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(VectorPayoffGame(std::vector<std::vector<Vec>>{{{inf}}}), PreconditionError);
}

TEST_CASE("expected payoff at vertices and mixtures") {
  VectorPayoffGame g = pennies();
  CHECK(expected_payoff(g, SimplexVector::vertex(2, 0), SimplexVector::vertex(2, 1)) == Vec{-1.0});
  CHECK(expected_payoff(g, SimplexVector::uniform(2), SimplexVector::vertex(2, 0))[0] ==
        doctest::Approx(0.0));
  CHECK(expected_payoff_column(g, SimplexVector::vertex(2, 1), 0) == Vec{-1.0});
  CHECK(expected_payoff_column(g, SimplexVector::uniform(2), 1)[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(expected_payoff_column(g, SimplexVector::uniform(2), 2), PreconditionError);
  CHECK_THROWS_AS(expected_payoff(g, SimplexVector::uniform(3), SimplexVector::uniform(2)),
                  PreconditionError);
}

TEST_CASE("expected payoff agrees with Monte Carlo sampling") {
  VectorPayoffGame g{{{{0.3, -0.1}, {0.9, 0.4}}, {{-0.5, 0.2}, {0.1, -0.8}}}};
  SimplexVector x{Vec{0.3, 0.7}};
  SimplexVector y{Vec{0.6, 0.4}};
  Vec exact = expected_payoff(g, x, y);
  Rng rng(404);
  const int draws = 40000;
  for (int d = 0; d < g.dim(); ++d) {
    std::vector<double> samples;
    samples.reserve(draws);
    Rng local(rng.raw());
    for (int t = 0; t < draws; ++t) {
      int i = static_cast<int>(sample_index(x.weights(), local));
      int j = static_cast<int>(sample_index(y.weights(), local));
      samples.push_back(g.at(i, j)[static_cast<std::size_t>(d)]);
    }
    oracle::MeanSE ms = oracle::mean_se(samples);
    CHECK(std::abs(ms.mean - exact[static_cast<std::size_t>(d)]) <= 3.0 * ms.se);
  }
}

TEST_CASE("blackwell step inside the target plays uniform") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  SimplexVector x = blackwell_step(g, c, Vec{0.0});
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.5));
}

TEST_CASE("blackwell step against a displaced average equalizes") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  SimplexVector x = blackwell_step(g, c, Vec{1.0});
  // The one-shot game <payoff - 0, 1 - 0> is matching pennies itself; its
  // optimal mixture is exact and self-play never leaves it.
  CHECK(std::abs(x[0] - 0.5) <= 1e-9);
  CHECK_THROWS_AS(blackwell_step(g, c, Vec{0.0, 0.0}), PreconditionError);
}

TEST_CASE("blackwell step reports non-approachable directions") {
  // Every payoff is +1, so nothing can move the average toward 0.
  VectorPayoffGame g{{{{1.0}, {1.0}}, {{1.0}, {1.0}}}};
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  try {
    blackwell_step(g, c, Vec{1.0});
    FAIL("expected SeparationError");
  } catch (const SeparationError& e) {
    CHECK(e.margin == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(e.witness_action >= 0);
    CHECK(e.witness_action < 2);
  }
}

TEST_CASE("direct approach run meets the averaging rate") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  MetricTrace t = run_blackwell(g, c, uniform_adversary(2), 10000, 1);
  CHECK(t.columns == std::vector<std::string>{"distance", "distance_sq"});
  double d = t.value(t.rows.size() - 1, "distance");
  CHECK(d <= 2.0 * std::sqrt(4.0 * g.radius_sq() / 10000.0));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(t.value(r, "distance_sq") ==
          doctest::Approx(t.value(r, "distance") * t.value(r, "distance")));
  }
}

TEST_CASE("direct approach with a trivial target never leaves it") {
  VectorPayoffGame g = pennies();
  MetricTrace t = run_blackwell(g, whole_space(), constant_adversary(2, 0), 256, 9);
  for (std::size_t r = 0; r < t.rows.size(); ++r) CHECK(t.value(r, "distance") == 0.0);
}

TEST_CASE("direct approach runs are reproducible") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  MetricTrace a = run_blackwell(g, c, uniform_adversary(2), 2000, 7);
  MetricTrace b = run_blackwell(g, c, uniform_adversary(2), 2000, 7);
  CHECK(a == b);
  MetricTrace other = run_blackwell(g, c, uniform_adversary(2), 2000, 8);
  CHECK(a.rows != other.rows);
}

TEST_CASE("best response table for an approachable point") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  BestResponseTable table = build_best_response_table(g, c, 0.8, 0.08);
  REQUIRE(table.forecasts.size() == 3);
  REQUIRE(table.responses.size() == 3);
  CHECK(table.epsilon == doctest::Approx(0.16));
  for (double a : table.achieved) CHECK(a <= 1e-12);
  // Extreme forecasts admit exactly one equalizing response on the grid.
  CHECK(table.responses[0][0] == doctest::Approx(0.5));
  CHECK(table.responses[2][0] == doctest::Approx(0.5));
}

TEST_CASE("best response table rejects an excludable point") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{1.0});
  try {
    build_best_response_table(g, c, 0.8, 0.08);
    FAIL("expected ExcludabilityError");
  } catch (const ExcludabilityError& e) {
    // Against the balanced column every response pays 0, never 1.
    CHECK(e.witness == Vec{0.5, 0.5});
    CHECK(e.distance == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(build_best_response_table(g, c, 0.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(build_best_response_table(g, c, 0.1, 0.0), PreconditionError);
}

TEST_CASE("best response table accepts a covering target") {
  VectorPayoffGame g = pennies();
  BestResponseTable table = build_best_response_table(g, whole_space(), 0.8, 0.08);
  for (double a : table.achieved) CHECK(a == 0.0);
}

TEST_CASE("calibrated approach logs one row for a one-stage run") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  BestResponseTable table = build_best_response_table(g, c, 0.8, 0.08);
  MetricTrace t = run_calibrated_approach(g, c, table, uniform_adversary(2), 1, 3);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].n == 1);
  CHECK(t.columns.size() == 2 + 2 * table.forecasts.size());
  CHECK(t.columns[0] == "distance");
  CHECK(t.columns[1] == "decomp_bound");
  CHECK(t.columns[2] == "freq_0");
  CHECK(t.columns.back() == "ferr_2");
}

TEST_CASE("calibrated approach tracks its decomposition bound") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  BestResponseTable table = build_best_response_table(g, c, 0.8, 0.08);
  MetricTrace t = run_calibrated_approach(g, c, table, uniform_adversary(2), 20000, 11);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(t.value(r, "distance") <= t.value(r, "decomp_bound") + 1e-9);
    double mass = 0.0;
    for (int l = 0; l < 3; ++l) mass += t.value(r, "freq_" + std::to_string(l));
    CHECK(mass == doctest::Approx(1.0));
  }
  CHECK(t.value(t.rows.size() - 1, "distance") <= table.epsilon + 0.04);
}

TEST_CASE("calibrated forecasts settle on a constant opponent") {
  VectorPayoffGame g = pennies();
  ConvexTarget c = ConvexTarget::point(Vec{0.0});
  BestResponseTable table = build_best_response_table(g, c, 0.8, 0.08);
  MetricTrace t = run_calibrated_approach(g, c, table, constant_adversary(2, 0), 100000, 21);
  // Column 0 is the vertex (1,0), nearest to forecast grid point 2.
  CHECK(t.value(t.rows.size() - 1, "freq_2") >= 0.95);
  CHECK(t.value(t.rows.size() - 1, "ferr_2") <= 0.05);
}

TEST_CASE("halfspace reduction rewrites payoffs as slacks") {
  VectorPayoffGame g = pennies();
  VectorPayoffGame same = halfspace_reduction(g, {{{1.0}, 0.0}});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(same.at(i, j) == g.at(i, j));

  std::vector<Halfspace> four{{{1.0}, 0.5}, {{-1.0}, 0.5}, {{2.0}, 3.0}, {{-2.0}, 3.0}};
  VectorPayoffGame reduced = halfspace_reduction(g, four);
  CHECK(reduced.dim() == 4);
  CHECK(reduced.at(0, 0) == Vec{0.5, -1.5, -1.0, -5.0});

  CHECK_THROWS_WITH_AS(halfspace_reduction(g, {}), "halfspace list is empty", PreconditionError);
  CHECK_THROWS_WITH_AS(halfspace_reduction(g, {{{1.0, 0.0}, 0.0}}),
                       "halfspace dimension mismatch", PreconditionError);
}

TEST_CASE("halfspace run drives both distances down together") {
  VectorPayoffGame g = pennies();
  MetricTrace t = run_halfspace(g, {{{1.0}, 0.0}}, uniform_adversary(2), 10000, 5);
  CHECK(t.columns == std::vector<std::string>{"distance_box", "aux_distance"});
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    // With one halfspace in one dimension the two readings coincide.
    CHECK(t.value(r, "distance_box") == doctest::Approx(t.value(r, "aux_distance")).epsilon(1e-7));
  }
  CHECK(t.value(t.rows.size() - 1, "distance_box") <= 0.05);
}
