#include "orthant/convex.hpp"

#include <cmath>

#include "orthant/errors.hpp"

namespace orthant {

ConvexTarget ConvexTarget::from_halfspaces(std::vector<Halfspace> hs, double radius) {
  if (hs.empty()) throw PreconditionError("ConvexTarget: no halfspaces given");
  for (const auto& h : hs)
    if (norm2(h.normal) <= 0.0)
      throw PreconditionError("ConvexTarget: halfspace with zero normal");
  ConvexTarget t;
  t.halfspaces_ = std::move(hs);
  t.radius_ = radius;
  return t;
}

ConvexTarget ConvexTarget::from_oracle(std::function<Vec(const Vec&)> proj, double radius) {
  if (!proj) throw PreconditionError("ConvexTarget: empty projection oracle");
  ConvexTarget t;
  t.oracle_ = std::move(proj);
  t.radius_ = radius;
  return t;
}

ConvexTarget ConvexTarget::nonpositive_orthant(int dim) {
  if (dim <= 0) throw PreconditionError("ConvexTarget: dimension must be positive");
  return from_oracle(
      [](const Vec& z) {
        Vec p(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::min(z[i], 0.0);
        return p;
      },
      0.0);
}

ConvexTarget ConvexTarget::point(Vec p) {
  const double r = norm(p);
  return from_oracle([p = std::move(p)](const Vec&) { return p; }, r);
}

Vec ConvexTarget::project(const Vec& z) const {
  if (oracle_) return oracle_(z);
  return project_halfspaces(z, halfspaces_);
}

double ConvexTarget::distance(const Vec& z) const { return dist(z, project(z)); }

bool ConvexTarget::contains(const Vec& z, double tol) const { return distance(z) <= tol; }

std::pair<Vec, Vec> project_orthant(const Vec& a) {
  Vec neg(a.size()), pos(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    neg[i] = std::min(a[i], 0.0);
    pos[i] = std::max(a[i], 0.0);
  }
  return {std::move(neg), std::move(pos)};
}

namespace {

// Projection onto a single halfspace <c, w> <= b.
void project_one(Vec& y, const Halfspace& h) {
  const double viol = dot(h.normal, y) - h.offset;
  if (viol > 0.0) axpy(y, -viol / norm2(h.normal), h.normal);
}

}  // namespace

Vec project_halfspaces(const Vec& z, const std::vector<Halfspace>& hs,
                       double tol, int max_cycles) {
  for (const auto& h : hs)
    if (h.normal.size() != z.size())
      throw PreconditionError("project_halfspaces: dimension mismatch");

  Vec x = z;
  // One correction term per halfspace; with them the cycle limit of plain
  // alternating projections (a feasible but not nearest point) is avoided.
  std::vector<Vec> corr(hs.size(), Vec(z.size(), 0.0));
  double moved = 0.0;
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    moved = 0.0;
    for (std::size_t k = 0; k < hs.size(); ++k) {
      Vec y = x;
      axpy(y, 1.0, corr[k]);
      Vec before = y;
      project_one(y, hs[k]);
      // corr = (x + corr) - proj, the outward step removed this round
      for (std::size_t i = 0; i < y.size(); ++i) corr[k][i] = before[i] - y[i];
      moved += dist(x, y);
      x = std::move(y);
    }
    if (moved < tol) return x;
  }
  throw ConvergenceError("projection did not converge", moved);
}

LinearImageProjection project_linear_image(const Vec& target,
                                           const std::vector<Vec>& vertices,
                                           double gap_tol, int max_iters) {
  if (vertices.empty()) throw PreconditionError("project_linear_image: no vertices");
  const std::size_t d = target.size();
  for (const auto& v : vertices)
    if (v.size() != d) throw PreconditionError("project_linear_image: dimension mismatch");

  const int n = static_cast<int>(vertices.size());
  Vec coeff(n, 0.0);

  // Start at the vertex nearest the target.
  int start = 0;
  double best = dist2(vertices[0], target);
  for (int j = 1; j < n; ++j) {
    const double d2 = dist2(vertices[j], target);
    if (d2 < best) {
      best = d2;
      start = j;
    }
  }
  coeff[start] = 1.0;
  Vec image = vertices[start];

  double gap = 0.0;
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    // grad f = 2 (image - target); linear subproblem picks the vertex with
    // the most negative <grad, v>.
    Vec grad(d);
    for (std::size_t i = 0; i < d; ++i) grad[i] = 2.0 * (image[i] - target[i]);
    int jstar = 0;
    double lo = dot(grad, vertices[0]);
    for (int j = 1; j < n; ++j) {
      const double s = dot(grad, vertices[j]);
      if (s < lo) {
        lo = s;
        jstar = j;
      }
    }
    gap = dot(grad, image) - lo;  // Frank-Wolfe duality gap
    if (gap < gap_tol) break;

    // Exact line search along image -> vertex for the quadratic objective.
    Vec dir(d);
    for (std::size_t i = 0; i < d; ++i) dir[i] = vertices[jstar][i] - image[i];
    const double denom = norm2(dir);
    if (denom <= 0.0) break;
    double gamma = 0.0;
    for (std::size_t i = 0; i < d; ++i) gamma += (target[i] - image[i]) * dir[i];
    gamma = std::min(1.0, std::max(0.0, gamma / denom));
    if (gamma <= 0.0) break;

    for (std::size_t i = 0; i < d; ++i) image[i] += gamma * dir[i];
    for (double& c : coeff) c *= 1.0 - gamma;
    coeff[jstar] += gamma;
  }
  return LinearImageProjection{std::move(image), SimplexVector::normalized(std::move(coeff)),
                               gap, iter};
}

}  // namespace orthant
