#pragma once

#include <cstdint>
#include <vector>

#include "orthant/adversary.hpp"
#include "orthant/convex.hpp"
#include "orthant/linalg.hpp"
#include "orthant/simplex.hpp"
#include "orthant/trace.hpp"

namespace orthant {

// Finite two-player game whose payoffs are vectors in R^dim rather than
// scalars. The row player wants the long-run average payoff to approach a
// convex target set.
class VectorPayoffGame {
 public:
  // payoff[i][j] is the vector paid when row i meets column j. All inner
  // vectors must share one dimension and be finite.
  explicit VectorPayoffGame(std::vector<std::vector<Vec>> payoff);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return dim_; }
  const Vec& at(int i, int j) const { return payoff_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

  // Largest squared payoff norm; the approachability rate constant.
  double radius_sq() const { return radius_sq_; }

 private:
  std::vector<std::vector<Vec>> payoff_;
  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 0;
  double radius_sq_ = 0.0;
};

// Bilinear extension sum_{i,j} x_i y_j payoff(i,j).
Vec expected_payoff(const VectorPayoffGame& game, const SimplexVector& x, const SimplexVector& y);

// Partial extension against a pure column.
Vec expected_payoff_column(const VectorPayoffGame& game, const SimplexVector& x, int j);

// One step of the direct approachability strategy at running average z.
// If z lies in the target (within 1e-9) any action works and uniform is
// returned. Otherwise the zero-sum game with scalar payoff
// <payoff(i,j) - p, z - p>, p the projection of z, is solved by
// multiplicative-weights self-play (at most 10^4 rounds, step sqrt(8 ln k / t)
// for a k-action player); the averaged row strategy is returned once it
// certifies max_j <payoff(x,j) - p, z - p> <= 1e-3 * |z - p| * sqrt(radius_sq).
// Throws SeparationError when the certificate cannot be met, which is
// evidence the target is not approachable from direction z.
SimplexVector blackwell_step(const VectorPayoffGame& game, const ConvexTarget& target, const Vec& z);

// Repeated play of blackwell_step against an adversary. Stage actions are
// sampled from the step mixture; the empty history is treated as average
// zero. Trace columns: distance, distance_sq (to the target).
MetricTrace run_blackwell(const VectorPayoffGame& game, const ConvexTarget& target,
                          const Adversary& adversary, long steps, std::uint64_t seed,
                          long log_every = 0);

// Certified forecast -> response table: for every grid point y(l) of the
// column simplex, a row mixture x(l) with d(payoff(x(l), y(l)), target)
// at most epsilon / 2.
struct BestResponseTable {
  FiniteGrid forecasts;
  std::vector<SimplexVector> responses;
  Vec achieved;    // distance reached at each grid point
  double epsilon = 0.0;
};

// Scans a response grid of the row simplex for each forecast grid point and
// keeps the distance minimizer. The table tolerance is epsilon =
// 2 * response_mesh, so the certification threshold per point is
// response_mesh itself. The first grid point whose best response stays
// further than that aborts the build with an ExcludabilityError carrying the
// witness point and the distance reached: the target is not approachable.
BestResponseTable build_best_response_table(const VectorPayoffGame& game, const ConvexTarget& target,
                                            double forecast_mesh, double response_mesh);

// Approachability through calibrated forecasting of the opponent: each stage
// forecasts a grid point l of the column simplex, plays x(l), and feeds the
// observed pure column (as a simplex vertex) back to the calibrator.
// Trace columns: distance, decomp_bound (the convexity upper bound
// sum_l (N_l/n) d(avg payoff at l, target)), then freq_<l> and ferr_<l>
// (per-type frequency and forecast error |avg column at l - y(l)|).
MetricTrace run_calibrated_approach(const VectorPayoffGame& game, const ConvexTarget& target,
                                    const BestResponseTable& table, const Adversary& adversary,
                                    long steps, std::uint64_t seed, long log_every = 0);

// Auxiliary game whose payoff coordinates are the halfspace slacks
// <payoff(i,j), normal(l)> - offset(l). Driving its average into the
// nonpositive orthant drives the original average into the intersection of
// the halfspaces.
VectorPayoffGame halfspace_reduction(const VectorPayoffGame& game,
                                     const std::vector<Halfspace>& halfspaces);

// Runs the direct strategy on the reduced game while tracking the original
// average. Trace columns: distance_box (original average to the halfspace
// intersection), aux_distance (reduced average to the nonpositive orthant).
MetricTrace run_halfspace(const VectorPayoffGame& game, const std::vector<Halfspace>& halfspaces,
                          const Adversary& adversary, long steps, std::uint64_t seed,
                          long log_every = 0);

}  // namespace orthant
