#include <doctest.h>

#include <cmath>

#include "orthant/errors.hpp"
#include "orthant/rng.hpp"
#include "orthant/simplex.hpp"

using namespace orthant;

TEST_CASE("SimplexVector validates and normalizes") {
  SimplexVector v{Vec{0.25, 0.75}};
  CHECK(v.dim() == 2);
  CHECK(v[0] == doctest::Approx(0.25));

  CHECK_THROWS_AS(SimplexVector(Vec{}), PreconditionError);
  CHECK_THROWS_AS(SimplexVector(Vec{-0.1, 1.1}), PreconditionError);
  CHECK_THROWS_AS(SimplexVector(Vec{0.4, 0.4}), PreconditionError);

  // Rounding residue inside the 1e-12 gate is absorbed into an exact sum.
  SimplexVector w{Vec{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  double total = 0.0;
  for (int i = 0; i < w.dim(); ++i) total += w[i];
  CHECK(total == 1.0);
}

TEST_CASE("SimplexVector factories") {
  SimplexVector u = SimplexVector::uniform(4);
  for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25));

  SimplexVector e = SimplexVector::vertex(3, 1);
  CHECK(e[0] == 0.0);
  CHECK(e[1] == 1.0);
  CHECK(e[2] == 0.0);
  CHECK_THROWS_AS(SimplexVector::vertex(3, 3), PreconditionError);
  CHECK_THROWS_AS(SimplexVector::uniform(0), PreconditionError);

  SimplexVector n = SimplexVector::normalized(Vec{2.0, 6.0});
  CHECK(n[0] == doctest::Approx(0.25));
  CHECK_THROWS_AS(SimplexVector::normalized(Vec{0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(SimplexVector::normalized(Vec{1.0, -1.0}), PreconditionError);
}

TEST_CASE("simplex_grid over two points at mesh 0.8") {
  FiniteGrid g = simplex_grid(2, 0.8);
  // sqrt(2)/0.8 rounds up to m = 2, so the lattice is thirds of the mass.
  REQUIRE(g.size() == 3);
  CHECK(g.points[0] == Vec{0.0, 1.0});
  CHECK(g.points[1] == Vec{0.5, 0.5});
  CHECK(g.points[2] == Vec{1.0, 0.0});
  CHECK(g.mesh == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(g.mesh <= 0.8);
}

TEST_CASE("simplex_grid counts match the lattice") {
  FiniteGrid g = simplex_grid_denominator(3, 2);
  CHECK(g.size() == 6);  // C(2+2, 2)
  CHECK(simplex_grid_count(3, 2) == doctest::Approx(6.0));
  CHECK(simplex_grid_count(4, 5) == doctest::Approx(56.0));  // C(8, 3)
  CHECK(static_cast<double>(g.size()) == simplex_grid_count(3, 2));
}

TEST_CASE("simplex_grid degenerate dimension") {
  FiniteGrid g = simplex_grid(1, 0.37);
  REQUIRE(g.size() == 1);
  CHECK(g.points[0] == Vec{1.0});
}

TEST_CASE("simplex_grid covers the simplex at its reported mesh") {
  FiniteGrid g = simplex_grid(3, 0.3);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Vec w(3);
    for (double& x : w) x = -std::log(1.0 - rng.unit());
    SimplexVector p = SimplexVector::normalized(std::move(w));
    double d = 0.0;
    g.nearest(p.weights(), &d);
    CHECK(d <= g.mesh + 1e-12);
  }
}

TEST_CASE("simplex_grid budget gate") {
  CHECK_THROWS_AS(simplex_grid(6, 1e-3), GridBudgetError);
  try {
    simplex_grid_denominator(3, 2, 5.0);  // 6 points against a budget of 5
    FAIL("expected GridBudgetError");
  } catch (const GridBudgetError& e) {
    CHECK(e.estimated_points == doctest::Approx(6.0));
  }
  CHECK_THROWS_AS(simplex_grid(2, 0.0), PreconditionError);
  CHECK_THROWS_AS(simplex_grid_denominator(0, 3), PreconditionError);
}

TEST_CASE("FiniteGrid::nearest picks the closest point") {
  FiniteGrid g = simplex_grid(2, 0.8);  // (0,1), (.5,.5), (1,0)
  double d = 0.0;
  CHECK(g.nearest(Vec{0.9, 0.1}, &d) == 2);
  CHECK(d == doctest::Approx(std::sqrt(0.02)));
  CHECK(g.nearest(Vec{0.5, 0.5}) == 1);
  FiniteGrid empty;
  CHECK_THROWS_AS(empty.nearest(Vec{0.0}), PreconditionError);
}

TEST_CASE("project_to_simplex on known points") {
  Vec p = project_to_simplex(Vec{2.0, 0.0});
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));

  // Simplex points are fixed.
  Vec q = project_to_simplex(Vec{0.2, 0.3, 0.5});
  CHECK(q[0] == doctest::Approx(0.2));
  CHECK(q[1] == doctest::Approx(0.3));
  CHECK(q[2] == doctest::Approx(0.5));

  // Uniform shift splits evenly.
  Vec r = project_to_simplex(Vec{1.0, 1.0});
  CHECK(r[0] == doctest::Approx(0.5));

  CHECK_THROWS_AS(project_to_simplex(Vec{}), PreconditionError);
}

TEST_CASE("project_to_simplex is a projection") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Vec z(4);
    for (double& x : z) x = 4.0 * rng.unit() - 2.0;
    Vec p = project_to_simplex(z);
    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0));
    // Nonexpansive around a feasible point: the projection cannot land
    // farther from any simplex point than z itself is.
    Vec u(4, 0.25);
    CHECK(dist(p, u) <= dist(z, u) + 1e-12);
  }
}

TEST_CASE("Rng is deterministic and in range") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    double x = a.unit();
    CHECK(x == b.unit());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  Rng c(43);
  CHECK(a.unit() != c.unit());
}

TEST_CASE("sample_index contract") {
  Vec w{0.0, 1.0, 0.0};
  Rng rng(5);
  for (int i = 0; i < 50; ++i) CHECK(sample_index(w, rng) == 1);

  CHECK(sample_index(Vec{0.5, 0.5}, 0.0) == 0);
  CHECK(sample_index(Vec{0.5, 0.5}, 0.49) == 0);
  CHECK(sample_index(Vec{0.5, 0.5}, 0.51) == 1);
  // Quantile at the top lands on the last positive weight.
  CHECK(sample_index(Vec{0.5, 0.5, 0.0}, 1.0) == 1);

  CHECK_THROWS_AS(sample_index(Vec{-1.0, 2.0}, 0.5), PreconditionError);
  CHECK_THROWS_AS(sample_index(Vec{0.0, 0.0}, 0.5), PreconditionError);
}

TEST_CASE("sample_index frequencies follow the weights") {
  Vec w{0.2, 0.5, 0.3};
  Rng rng(99);
  Vec counts(3, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sample_index(w, rng))] += 1.0;
  for (int k = 0; k < 3; ++k) CHECK(counts[static_cast<std::size_t>(k)] / n == doctest::Approx(w[static_cast<std::size_t>(k)]).epsilon(0.05));
}
