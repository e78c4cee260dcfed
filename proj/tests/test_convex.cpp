#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "orthant/convex.hpp"
#include "orthant/errors.hpp"
#include "orthant/rng.hpp"

using namespace orthant;

TEST_CASE("project_orthant splits sign parts exactly") {
  auto [neg, pos] = project_orthant(Vec{1.5, -2.0, 0.0});
  CHECK(neg == Vec{0.0, -2.0, 0.0});
  CHECK(pos == Vec{1.5, 0.0, 0.0});
  CHECK(dot(neg, pos) == 0.0);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Vec a(5);
    for (double& x : a) x = 2.0 * rng.unit() - 1.0;
    auto [n, p] = project_orthant(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(n[i] + p[i] == a[i]);
      CHECK(n[i] <= 0.0);
      CHECK(p[i] >= 0.0);
    }
    CHECK(dot(n, p) == 0.0);
  }
}

TEST_CASE("nonpositive orthant target") {
  ConvexTarget c = ConvexTarget::nonpositive_orthant(3);
  Vec p = c.project(Vec{1.0, -2.0, 0.5});
  CHECK(p == Vec{0.0, -2.0, 0.0});
  CHECK(c.distance(Vec{1.0, -2.0, 0.5}) == doctest::Approx(std::sqrt(1.25)));
  CHECK(c.contains(Vec{-0.3, 0.0, -5.0}));
  CHECK_FALSE(c.contains(Vec{1e-6, 0.0, 0.0}));
  CHECK(c.contains(Vec{1e-10, 0.0, 0.0}));  // inside the default tolerance
  CHECK(c.radius() == 0.0);
}

TEST_CASE("point target") {
  ConvexTarget c = ConvexTarget::point(Vec{0.6, -0.8});
  CHECK(c.project(Vec{5.0, 5.0}) == Vec{0.6, -0.8});
  CHECK(c.distance(Vec{0.6, -0.8}) == doctest::Approx(0.0));
  CHECK(c.radius() == doctest::Approx(1.0));  // norm of the point
}

TEST_CASE("oracle target delegates") {
  auto clamp01 = [](const Vec& z) {
    Vec out = z;
    for (double& x : out) x = std::clamp(x, 0.0, 1.0);
    return out;
  };
  ConvexTarget c = ConvexTarget::from_oracle(clamp01, 2.0);
  CHECK(c.project(Vec{-1.0, 0.5, 3.0}) == Vec{0.0, 0.5, 1.0});
  CHECK(c.radius() == 2.0);
  CHECK_FALSE(c.has_halfspaces());
}

TEST_CASE("halfspace target equals closed-form projections") {
  // The box [-1,1]^2 as four halfspaces.
  std::vector<Halfspace> hs{
      {{1.0, 0.0}, 1.0}, {{-1.0, 0.0}, 1.0}, {{0.0, 1.0}, 1.0}, {{0.0, -1.0}, 1.0}};
  ConvexTarget box = ConvexTarget::from_halfspaces(hs, 3.0);
  CHECK(box.has_halfspaces());
  CHECK(box.radius() == 3.0);

  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z{6.0 * rng.unit() - 3.0, 6.0 * rng.unit() - 3.0};
    Vec p = box.project(z);
    Vec q{std::clamp(z[0], -1.0, 1.0), std::clamp(z[1], -1.0, 1.0)};
    CHECK(dist(p, q) <= 1e-8);
    CHECK(box.distance(z) == doctest::Approx(dist(z, q)).epsilon(1e-7));
  }
  CHECK(box.contains(Vec{0.2, -0.9}));
  CHECK_FALSE(box.contains(Vec{1.1, 0.0}));
}

TEST_CASE("project_halfspaces fixes feasible points") {
  std::vector<Halfspace> hs{{{1.0, 1.0}, 1.0}, {{-1.0, 0.0}, 0.0}};
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z{rng.unit(), rng.unit()};
    if (z[0] + z[1] > 1.0) continue;
    Vec p = project_halfspaces(z, hs);
    CHECK(dist(p, z) <= 1e-9);
  }
  // A single halfspace has a one-step projection.
  Vec p = project_halfspaces(Vec{2.0, 0.0}, {{{1.0, 0.0}, 0.0}});
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("project_halfspaces satisfies projection optimality") {
  // Intersection of a diagonal halfspace and the nonpositive first axis.
  std::vector<Halfspace> hs{{{1.0, 2.0}, 2.0}, {{1.0, 0.0}, 0.0}};
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    Vec z{8.0 * rng.unit() - 4.0, 8.0 * rng.unit() - 4.0};
    Vec p = project_halfspaces(z, hs);
    for (const Halfspace& h : hs) CHECK(dot(h.normal, p) <= h.offset + 1e-8);
    // No feasible direction improves: p is closest among sampled feasible points.
    for (int probe = 0; probe < 20; ++probe) {
      Vec w{4.0 * rng.unit() - 4.0, 4.0 * rng.unit() - 2.0};
      if (dot(hs[0].normal, w) > hs[0].offset || dot(hs[1].normal, w) > hs[1].offset) continue;
      CHECK(dist(z, p) <= dist(z, w) + 1e-7);
    }
  }
}

TEST_CASE("project_halfspaces reports non-convergence") {
  // Empty intersection: x <= -1 and -x <= -1 cannot both hold.
  std::vector<Halfspace> hs{{{1.0}, -1.0}, {{-1.0}, -1.0}};
  try {
    project_halfspaces(Vec{0.0}, hs, 1e-10, 50);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual > 0.0);
  }
  // No constraints means nothing to project away.
  CHECK(project_halfspaces(Vec{0.4}, {}) == Vec{0.4});
}

TEST_CASE("project_linear_image onto a segment") {
  std::vector<Vec> vertices{{0.0, 0.0}, {1.0, 1.0}};
  LinearImageProjection r = project_linear_image(Vec{1.0, 0.0}, vertices);
  CHECK(r.image[0] == doctest::Approx(0.5));
  CHECK(r.image[1] == doctest::Approx(0.5));
  CHECK(r.coefficients[0] == doctest::Approx(0.5));
  CHECK(r.coefficients[1] == doctest::Approx(0.5));
  CHECK(r.gap <= 1e-8);
}

TEST_CASE("project_linear_image clamps to a vertex") {
  std::vector<Vec> vertices{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  LinearImageProjection r = project_linear_image(Vec{2.0, 0.0, 0.0}, vertices);
  CHECK(dist(r.image, Vec{1.0, 0.0, 0.0}) <= 1e-6);
  CHECK(r.coefficients[0] == doctest::Approx(1.0));
}

TEST_CASE("project_linear_image keeps interior targets") {
  std::vector<Vec> vertices{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  Vec target{0.2, 0.3, 0.5};
  LinearImageProjection r = project_linear_image(target, vertices);
  CHECK(dist(r.image, target) <= 1e-4);
  // The coefficients reproduce the image.
  Vec rebuilt(3, 0.0);
  for (int k = 0; k < 3; ++k) axpy(rebuilt, r.coefficients[k], vertices[static_cast<std::size_t>(k)]);
  CHECK(dist(rebuilt, r.image) <= 1e-12);
}

TEST_CASE("project_linear_image validates input") {
  CHECK_THROWS_AS(project_linear_image(Vec{0.0}, {}), PreconditionError);
  CHECK_THROWS_AS(project_linear_image(Vec{0.0}, {{0.0, 1.0}}), PreconditionError);
}
