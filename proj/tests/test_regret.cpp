#include <doctest.h>

#include <utility>
#include <vector>

#include "orthant/errors.hpp"
#include "orthant/regret.hpp"
#include "orthant/rng.hpp"
#include "oracles.hpp"

using namespace orthant;

namespace {

Matrix make(int rows, int cols, std::vector<double> entries) {
  Matrix m(rows, cols);
  m.data() = std::move(entries);
  return m;
}

}  // namespace

TEST_CASE("invariant probability of a pinned 2x2 matrix") {
  // sum_j lambda_j a_ji = lambda_i sum_j a_ij gives lambda_1 = 2 lambda_0.
  InvariantProbability r = invariant_probability(make(2, 2, {0, 2, 1, 0}));
  CHECK(r.distribution[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.distribution[1] == doctest::Approx(2.0 / 3.0));
  CHECK(r.residual <= 1e-9 * 2.0);
}

TEST_CASE("invariant probability of the zero matrix is uniform") {
  InvariantProbability r = invariant_probability(Matrix(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(r.distribution[i] == doctest::Approx(1.0 / 3.0));
  CHECK(r.residual == 0.0);
}

TEST_CASE("invariant probability rejects negative entries") {
  CHECK_THROWS_WITH_AS(invariant_probability(make(2, 2, {0, -1, 1, 0})),
                       "matrix not nonnegative", PreconditionError);
  CHECK_THROWS_AS(invariant_probability(Matrix()), PreconditionError);
  CHECK_THROWS_AS(invariant_probability(Matrix(2, 3)), PreconditionError);
}

TEST_CASE("invariant probability matches the damped power oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    Matrix a(4, 4);
    for (double& x : a.data()) x = rng.unit();
    for (int i = 0; i < 4; ++i) a(i, i) = 0.0;
    InvariantProbability fast = invariant_probability(a);
    Vec slow = oracle::invariant_power(a);
    CHECK(max_abs_diff(fast.distribution.weights(), slow) <= 1e-7);
    CHECK(fast.residual <= 1e-9 * a.max_abs());
    CHECK(oracle::invariant_residual(a, fast.distribution.weights()) <= 1e-9 * a.max_abs());
  }
}

TEST_CASE("invariant probability survives rank deficiency and scaling") {
  // Two communicating actions plus an unreachable one.
  Matrix a = make(3, 3, {0, 1, 0, 1, 0, 0, 0, 0, 0});
  InvariantProbability r = invariant_probability(a);
  CHECK(oracle::invariant_residual(a, r.distribution.weights()) <= 1e-9);

  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b(3, 3);
    for (double& x : b.data()) x = rng.unit();
    Matrix scaled = b;
    for (double& x : scaled.data()) x *= 1e6;
    Vec lo = invariant_probability(b).distribution.weights();
    Vec hi = invariant_probability(scaled).distribution.weights();
    CHECK(max_abs_diff(lo, hi) <= 1e-8);
  }
}

TEST_CASE("instant regret touches one row") {
  Matrix m = instant_regret(0, Vec{0.5, -0.5});
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == doctest::Approx(-1.0));
  CHECK(m(1, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
  CHECK_THROWS_AS(instant_regret(2, Vec{0.0, 0.0}), PreconditionError);
  Matrix solo = instant_regret(0, Vec{0.0});
  CHECK(solo.rows() == 1);
  CHECK(solo(0, 0) == 0.0);
}

TEST_CASE("engine accounts a single stage") {
  RegretEngine e(2, 1.0);
  CHECK(e.stage() == 0);
  CHECK(e.next()[0] == doctest::Approx(0.5));
  CHECK_THROWS_WITH_AS(e.max_positive_regret(), "empty history", PreconditionError);

  e.update(0, Vec{0.5, -0.5});
  Matrix avg = e.average_regret();
  CHECK(avg(0, 0) == 0.0);
  CHECK(avg(0, 1) == doctest::Approx(-1.0));
  CHECK(avg(1, 0) == 0.0);
  CHECK(e.max_positive_regret() == 0.0);
  // Nothing positive to fix, so the recommendation stays uniform.
  CHECK(e.next()[1] == doctest::Approx(0.5));
  CHECK(e.count(0) == 1);
  CHECK(e.count(1) == 0);
  CHECK(e.average_outcome(0) == Vec{0.5, -0.5});
  CHECK(e.average_outcome(1) == Vec{0.0, 0.0});
}

TEST_CASE("opposite outcomes on one action cancel") {
  RegretEngine e(2, 1.0);
  e.update(0, Vec{0.5, -0.5});
  e.update(0, Vec{-0.5, 0.5});
  CHECK(e.average_regret().max_abs() == 0.0);
  CHECK(e.max_positive_regret() == 0.0);
}

TEST_CASE("engine recommendation is the invariant of the clipped average") {
  RegretEngine e(2, 2.0);
  e.update(0, Vec{0.0, 2.0});
  e.update(1, Vec{1.0, 0.0});
  // Average regret [[0,1],[0.5,0]] is already nonnegative.
  CHECK(e.max_positive_regret() == doctest::Approx(1.0));
  CHECK(e.next()[0] == doctest::Approx(1.0 / 3.0));
  CHECK(e.next()[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("engine input checks") {
  RegretEngine e(2, 1.0);
  CHECK_THROWS_AS(e.update(-1, Vec{0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(e.update(2, Vec{0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(e.update(0, Vec{0.0}), PreconditionError);
  CHECK_THROWS_WITH_AS(e.update(0, Vec{1.5, 0.0}), "outcome out of range", PreconditionError);
  CHECK_THROWS_AS(RegretEngine(0, 1.0), PreconditionError);
  CHECK_THROWS_AS(RegretEngine(2, 0.0), PreconditionError);
  CHECK(e.stage() == 0);  // rejected updates leave no trace
}

TEST_CASE("engine statistics match a brute recomputation") {
  Rng rng(7);
  RegretEngine e(3, 1.0);
  std::vector<std::pair<int, Vec>> history;
  for (int n = 1; n <= 200; ++n) {
    int action = static_cast<int>(sample_index(e.next().weights(), rng));
    Vec u(3);
    for (double& x : u) x = 2.0 * rng.unit() - 1.0;
    e.update(action, u);
    history.emplace_back(action, u);
    CHECK(e.max_positive_regret() ==
          doctest::Approx(oracle::max_positive_regret_brute(history, 3)).epsilon(1e-12));
  }
  CHECK(e.stage() == 200);
  long total = 0;
  for (int i = 0; i < 3; ++i) total += e.count(i);
  CHECK(total == 200);
}

TEST_CASE("playing the recommendation drives regret down") {
  Rng rng(2024);
  RegretEngine e(3, 1.0);
  for (int n = 0; n < 5000; ++n) {
    int action = static_cast<int>(sample_index(e.next().weights(), rng));
    Vec u(3);
    for (double& x : u) x = 2.0 * rng.unit() - 1.0;
    e.update(action, u);
  }
  CHECK(e.max_positive_regret() <= 0.1);
}
