#include "orthant/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "orthant/errors.hpp"

namespace orthant {

SimplexVector::SimplexVector(Vec weights) : w_(std::move(weights)) {
  if (w_.empty()) throw PreconditionError("SimplexVector: empty weight vector");
  double sum = 0.0;
  for (double x : w_) {
    if (x < 0.0) throw PreconditionError("SimplexVector: negative weight");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw PreconditionError("SimplexVector: weights do not sum to one");
  // Absorb the rounding residue so downstream sums see exactly 1.
  for (double& x : w_) x /= sum;
}

SimplexVector SimplexVector::uniform(int d) {
  if (d <= 0) throw PreconditionError("SimplexVector::uniform: dimension must be positive");
  SimplexVector v;
  v.w_.assign(d, 1.0 / d);
  return v;
}

SimplexVector SimplexVector::vertex(int d, int i) {
  if (d <= 0 || i < 0 || i >= d) throw PreconditionError("SimplexVector::vertex: index out of range");
  SimplexVector v;
  v.w_.assign(d, 0.0);
  v.w_[i] = 1.0;
  return v;
}

SimplexVector SimplexVector::normalized(Vec weights) {
  double sum = 0.0;
  for (double x : weights) {
    if (x < 0.0) throw PreconditionError("SimplexVector::normalized: negative weight");
    sum += x;
  }
  if (sum <= 0.0) throw PreconditionError("SimplexVector::normalized: zero total weight");
  for (double& x : weights) x /= sum;
  SimplexVector v;
  v.w_ = std::move(weights);
  return v;
}

int FiniteGrid::nearest(const Vec& z, double* distance) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < points.size(); ++l) {
    const double d2 = dist2(points[l], z);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(l);
    }
  }
  if (best < 0) throw PreconditionError("FiniteGrid::nearest: empty grid");
  if (distance) *distance = std::sqrt(best_d2);
  return best;
}

double simplex_grid_count(int dimension, int m) {
  // C(m + d - 1, d - 1) as a product, in floating point.
  double c = 1.0;
  for (int k = 1; k <= dimension - 1; ++k) {
    c *= static_cast<double>(m + k) / k;
    if (c > 1e18) return c;  // already far beyond any sane budget
  }
  return c;
}

FiniteGrid simplex_grid_denominator(int dimension, int m, double budget) {
  if (dimension <= 0) throw PreconditionError("simplex_grid: dimension must be positive");
  if (m <= 0) throw PreconditionError("simplex_grid: denominator must be positive");
  if (simplex_grid_count(dimension, m) > budget)
    throw GridBudgetError("grid budget exceeded", simplex_grid_count(dimension, m));

  FiniteGrid grid;
  grid.mesh = std::sqrt(static_cast<double>(dimension)) / m;

  // Enumerate compositions (k_1, ..., k_d) of m lexicographically.
  std::vector<int> k(dimension, 0);
  k[dimension - 1] = m;
  Vec point(dimension);
  while (true) {
    for (int i = 0; i < dimension; ++i) point[i] = static_cast<double>(k[i]) / m;
    grid.points.push_back(point);
    // Lexicographic successor: increment the rightmost position that has
    // mass strictly to its right, then push that remaining mass to the end.
    int j = dimension - 2;
    int tail = 0;
    while (j >= 0) {
      tail += k[j + 1];
      if (tail > 0) break;
      --j;
    }
    if (j < 0) break;
    ++k[j];
    for (int t = j + 1; t < dimension; ++t) k[t] = 0;
    k[dimension - 1] = tail - 1;
  }
  return grid;
}

FiniteGrid simplex_grid(int dimension, double mesh, double budget) {
  if (!(mesh > 0.0)) throw PreconditionError("simplex_grid: mesh must be positive");
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dimension)) / mesh));
  return simplex_grid_denominator(dimension, std::max(m, 1), budget);
}

Vec project_to_simplex(const Vec& v) {
  if (v.empty()) throw PreconditionError("project_to_simplex: empty vector");
  // Find the shift theta with sum_i max(0, v_i - theta) = 1 by scanning the
  // sorted coordinates.
  Vec sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = sorted[0] - 1.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

}  // namespace orthant
