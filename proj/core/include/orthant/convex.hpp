#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "orthant/linalg.hpp"
#include "orthant/simplex.hpp"

namespace orthant {

// Closed halfspace { w : <normal, w> <= offset }.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

// A closed convex target set, given either as an intersection of halfspaces
// or as an exact projection oracle.  `radius` bounds the norm of the points
// of interest in the set; it only scales certificates and never gates
// membership.
class ConvexTarget {
 public:
  static ConvexTarget from_halfspaces(std::vector<Halfspace> hs, double radius = 1.0);
  static ConvexTarget from_oracle(std::function<Vec(const Vec&)> proj, double radius = 1.0);
  // { w <= 0 } with a closed-form projection.
  static ConvexTarget nonpositive_orthant(int dim);
  // The single point {p}.
  static ConvexTarget point(Vec p);

  // Euclidean projection onto the set.  For the halfspace form this runs
  // Dykstra's cycling scheme (below); the oracle form delegates.
  Vec project(const Vec& z) const;

  double distance(const Vec& z) const;
  bool contains(const Vec& z, double tol = 1e-9) const;

  bool has_halfspaces() const { return !halfspaces_.empty(); }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  double radius() const { return radius_; }

 private:
  ConvexTarget() = default;
  std::vector<Halfspace> halfspaces_;
  std::function<Vec(const Vec&)> oracle_;
  double radius_ = 1.0;
};

// Entrywise split A = neg + pos with neg = min(A, 0) and pos = max(A, 0);
// the two parts have disjoint supports, so <neg, pos> = 0 exactly.  `pos` is
// the projection of A onto the nonnegative orthant, `neg` the projection
// onto the nonpositive orthant.
std::pair<Vec, Vec> project_orthant(const Vec& a);

// Dykstra's alternating projection with correction terms, cycling over the
// halfspaces until the iterate moves less than `tol` over a full cycle.
// Converges to the exact Euclidean projection onto the intersection.
// Throws ConvergenceError("projection did not converge") after `max_cycles`
// cycles, reporting the last cycle movement as the residual.
Vec project_halfspaces(const Vec& z, const std::vector<Halfspace>& hs,
                       double tol = 1e-10, int max_cycles = 100000);

// Projection of `target` onto the convex hull of `vertices` by Frank-Wolfe
// with exact line search, stopping when the duality gap drops below
// `gap_tol` or after `max_iters` iterations.  Returns the hull point and the
// convex coefficients over the vertices.  Never throws; the attained gap is
// written to *gap_out when provided.
struct LinearImageProjection {
  Vec image;
  SimplexVector coefficients;
  double gap = 0.0;
  int iterations = 0;
};
LinearImageProjection project_linear_image(const Vec& target,
                                           const std::vector<Vec>& vertices,
                                           double gap_tol = 1e-8,
                                           int max_iters = 10000);

}  // namespace orthant
