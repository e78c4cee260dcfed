#pragma once

#include <vector>

#include "orthant/linalg.hpp"

namespace orthant {

// A probability vector: nonnegative weights summing to one (within 1e-12 at
// construction; construction renormalizes exact rounding residue away).
class SimplexVector {
 public:
  explicit SimplexVector(Vec weights);

  // Uniform distribution over d points.
  static SimplexVector uniform(int d);

  // Point mass on coordinate i.
  static SimplexVector vertex(int d, int i);

  // Normalizes arbitrary nonnegative weights with positive total.
  static SimplexVector normalized(Vec weights);

  int dim() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[i]; }
  const Vec& weights() const { return w_; }

 private:
  SimplexVector() = default;
  Vec w_;
};

// A finite set of points together with the radius at which it covers the set
// it was built from: every point of the covered set lies within `mesh` of
// some grid point (Euclidean norm).
struct FiniteGrid {
  std::vector<Vec> points;
  double mesh = 0.0;

  int size() const { return static_cast<int>(points.size()); }
  // Index of the grid point nearest to z, and the attained distance.
  int nearest(const Vec& z, double* distance = nullptr) const;
};

// All points (k_1/m, ..., k_d/m) with nonnegative integers summing to m,
// m = ceil(sqrt(d)/mesh), enumerated lexicographically in (k_1, ..., k_d).
// Covering radius of this grid over the simplex is at most sqrt(d)/m, which
// is the value reported in the result's mesh field (<= requested mesh).
// Throws GridBudgetError("grid budget exceeded") when the point count
// C(m+d-1, d-1) would exceed `budget`.
FiniteGrid simplex_grid(int dimension, double mesh, double budget = 1e6);

// Same lattice for an explicitly chosen denominator m >= 1.
FiniteGrid simplex_grid_denominator(int dimension, int m, double budget = 1e6);

// Number of lattice points C(m+d-1, d-1), computed in floating point so the
// budget check cannot overflow.
double simplex_grid_count(int dimension, int m);

// Euclidean projection onto the probability simplex (sort-based exact
// algorithm). Nonexpansive, so perturbing a simplex point by a vector of
// norm t and projecting back stays within t of the original.
Vec project_to_simplex(const Vec& v);

}  // namespace orthant
