#pragma once

#include <optional>

#include "orthant/linalg.hpp"
#include "orthant/simplex.hpp"

namespace orthant {

// An outcome assigns one real to each action; the engine bounds entries by
// its outcome bound (full monitoring uses 1, the calibration reduction
// 4 * outcome-radius^2, the partial-monitoring reduction scales with 1/eta).
using OutcomeVector = Vec;

struct InvariantProbability {
  SimplexVector distribution;
  // max_i |sum_j lambda(j) a_ji - lambda(i) sum_j a_ij|, the defining
  // equation's violation on the source matrix.
  double residual = 0.0;
  bool used_power_iteration = false;
};

// Invariant probability of a nonnegative matrix A: the distribution with
// sum_j lambda(j) a_ji = lambda(i) sum_j a_ij for every i.  Builds the
// stochastic matrix M_ij = a_ij / kappa (kappa = max off-diagonal row mass,
// 1 if that mass is zero) and solves lambda M = lambda, sum lambda = 1 by
// Gaussian elimination with partial pivoting.  When the system is
// rank-deficient the minimum-norm valid basic solution is returned; if no
// basic solution normalizes to a distribution, damped power iteration
// (lambda <- lambda (0.99 M + 0.01 I), 1e4 rounds) decides.
// Throws PreconditionError("matrix not nonnegative") on a negative entry.
InvariantProbability invariant_probability(const Matrix& a);

// Matrix whose row i holds (U^j - U^i)_j, zeros elsewhere.
Matrix instant_regret(int action, const OutcomeVector& outcome);

// Internal-regret minimizer: plays the invariant probability of the positive
// part of the average regret matrix.
class RegretEngine {
 public:
  RegretEngine(int num_actions, double outcome_bound);

  int num_actions() const { return c_; }
  double outcome_bound() const { return bound_; }
  long stage() const { return n_; }

  // Invariant probability of the positive part of the average regret
  // matrix; uniform at n=0 (and whenever no regret entry is positive).
  const SimplexVector& next() const;

  // Accounts one (action, outcome) pair.  Touches only row `action` of the
  // cumulative matrix.  Throws "outcome out of range" past the bound.
  void update(int action, const OutcomeVector& outcome);

  // Max over (i,j) of the average regret clipped below at zero.
  // Throws PreconditionError("empty history") at n=0.
  double max_positive_regret() const;

  Matrix average_regret() const;
  const Matrix& cumulative_regret() const { return cum_; }
  long count(int action) const;
  // Average outcome over the stages where `action` was played (zeros when
  // the action is unused).
  Vec average_outcome(int action) const;

 private:
  int c_;
  double bound_;
  long n_ = 0;
  Matrix cum_;
  std::vector<long> counts_;
  std::vector<Vec> outcome_sums_;
  mutable std::optional<SimplexVector> lambda_;  // cache for next()
};

}  // namespace orthant
