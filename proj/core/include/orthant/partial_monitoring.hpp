#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "orthant/adversary.hpp"
#include "orthant/calibrate.hpp"
#include "orthant/linalg.hpp"
#include "orthant/rng.hpp"
#include "orthant/simplex.hpp"
#include "orthant/trace.hpp"

namespace orthant {

// Scalar-payoff game where the row player never observes the opponent's
// action, only a random signal drawn from a law attached to the joint action.
struct SignalStructure {
  Matrix payoff;                          // one scalar per (row, column)
  std::vector<std::vector<Vec>> signal;   // signal law per (row, column)
  int num_signals = 0;
  double payoff_radius = 0.0;             // max |payoff|

  SignalStructure(Matrix payoff_matrix, std::vector<std::vector<Vec>> signal_laws);
  int rows() const { return payoff.rows(); }
  int cols() const { return payoff.cols(); }
  const Vec& law(int i, int j) const {
    return signal[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  // Flattened flag of each pure column, precomputed once; these are the
  // vertices of the reachable flag polytope.
  const std::vector<Vec>& pure_flags() const { return pure_flags_; }

 private:
  std::vector<Vec> pure_flags_;
};

// Everything the row player can learn about a mixed opponent action: the
// signal distribution each own action would face, flattened row-major
// (entry (i, s) at i * signals + s).
struct Flag {
  int actions = 0;
  int signals = 0;
  Vec data;

  Flag() = default;
  Flag(int actions_, int signals_)
      : actions(actions_), signals(signals_),
        data(static_cast<std::size_t>(actions_) * static_cast<std::size_t>(signals_), 0.0) {}

  double at(int i, int s) const { return data[static_cast<std::size_t>(i) * signals + s]; }
  double& at(int i, int s) { return data[static_cast<std::size_t>(i) * signals + s]; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * signals; }
};

// Flag generated by a mixed opponent action: row i = sum_j y_j law(i, j).
Flag flag_of(const SignalStructure& structure, const SimplexVector& y);
Flag pure_flag(const SignalStructure& structure, int j);

struct RangeProjection {
  Flag image;                 // nearest point of the reachable flag polytope
  SimplexVector coefficients; // mixture of pure flags achieving it
  double gap = 0.0;           // solver termination gap
};

// Euclidean projection onto conv{pure_flag(j) : j}, the set of flags an
// opponent can actually generate.
RangeProjection range_projection(const SignalStructure& structure, const Flag& mu);

// Which payoff evaluation to attach to a flag: the worst value consistent
// with it, or the best.
enum class Valuation { worst_case, optimistic };

// Worst-case payoff of playing x knowing only the flag: the minimum of
// payoff(x, y) over mixed y generating mu, after projecting mu onto the
// reachable polytope. Solved as min_y payoff(x,y) + K|flag_of(y) - mu|^2
// with K = 10^3 * payoff_radius by Frank-Wolfe with exact line search,
// cross-checked against a mesh-0.01 grid scan for small column counts.
double worst_case_w(const SignalStructure& structure, const SimplexVector& x, const Flag& mu);

// Same with maximization: the best payoff still consistent with the flag.
double optimistic_o(const SignalStructure& structure, const SimplexVector& x, const Flag& mu);

// Core evaluator behind both. With mu_in_range = true the projection step is
// skipped; callers passing averages of generated flags (which stay inside
// the polytope) use this to keep report loops cheap.
double flag_value(const SignalStructure& structure, Valuation valuation, const SimplexVector& x,
                  const Flag& mu, bool mu_in_range);

// Forecast grid over reachable flags with a near-best response attached to
// every grid point.
struct BestResponseGrid {
  FiniteGrid flags;                      // grid points mu(l), flattened flags
  std::vector<SimplexVector> responses;  // x(l), argmax of the valuation over response_grid
  FiniteGrid response_grid;              // the row-simplex grid used for every sup over x
  double epsilon = 0.0;
  double eta = 0.0;            // perturbation weight, epsilon / (4 max(r, 1))
  double delta = 0.0;          // covering radius the flag grid achieves
  double lipschitz_mu = 0.0;   // sampled Lipschitz constant of the valuation in the flag
  double flag_gain = 0.0;      // operator norm of y -> flag_of(y) on simplex differences
};

// Builds the grid for a target tolerance epsilon: estimates the valuation's
// Lipschitz constant in the flag from sampled reachable pairs, sets the
// covering radius delta = epsilon / (4 L), lays a grid over the reachable
// polytope (a column-simplex grid pushed through flag_of, deduplicated),
// attaches response-grid maximizers, and spot-checks on random perturbed
// pairs that every x(l) stays epsilon-best within the (2 eta, 2 delta)
// neighborhood. Throws GridBudgetError when a grid would be too large and
// GridConstantsError when the spot-check finds a violating sample.
BestResponseGrid build_br_grid(const SignalStructure& structure, Valuation valuation,
                               double epsilon, double budget = 1e6);

// (1 - eta) x + eta * uniform; every coordinate ends up >= eta / dim.
SimplexVector perturb(const SimplexVector& x, double eta);

// Importance-weighted flag estimate from one observed signal: one-hot at
// (action, signal) scaled by 1 / x_used[action]. Unbiased for the true flag
// when the action is drawn from x_used; sup-norm at most dim / eta under the
// perturbation floor.
Vec estimator(int signal, int action, const SimplexVector& x_used, int num_signals);

// One learner playing a signal structure through a best-response grid: a
// calibrator forecasts the flag from estimator feedback, the stage action is
// drawn from the perturbed response of the forecast type. The session also
// keeps simulator-side ground truth (true flags, realized payoffs) that the
// strategy itself never reads; the regret reports need it.
class PartialMonitorSession {
 public:
  PartialMonitorSession(SignalStructure structure, BestResponseGrid grid);

  struct Step {
    int type = 0;
    int action = 0;
  };

  // Forecasts the flag type and draws this stage's action.
  Step begin_stage(Rng& rng);

  // Completes the stage: true_flag is what the opponent generated, signal
  // the observed symbol, payoff the realized payoff. Feeds the estimator to
  // the calibrator and updates the ground-truth averages.
  void finish_stage(const Flag& true_flag, int signal, double payoff);

  long stage() const { return calibrator_.stage(); }
  int num_types() const { return grid_.flags.size(); }
  const SignalStructure& structure() const { return structure_; }
  const BestResponseGrid& grid() const { return grid_; }
  const Calibrator& calibrator() const { return calibrator_; }
  const SimplexVector& perturbed_response(int l) const {
    return perturbed_[static_cast<std::size_t>(l)];
  }

  long count(int l) const { return calibrator_.count(l); }
  Vec estimator_average(int l) const { return calibrator_.average_outcome(l); }
  SimplexVector action_average(int l) const;
  Flag true_flag_average(int l) const;
  double payoff_average(int l) const;
  Flag overall_flag_average() const;
  double overall_payoff_average() const;

 private:
  SignalStructure structure_;
  BestResponseGrid grid_;
  Calibrator calibrator_;
  std::vector<SimplexVector> perturbed_;
  std::vector<std::vector<long>> action_counts_;
  std::vector<Vec> flag_sums_;
  Vec payoff_sums_;
  std::optional<Step> open_;
};

struct RegretReport {
  Vec per_type;          // weighted regret (N_l / n) * (sup - achieved), 0 for unused types
  double max_value = 0.0;
};

// Per-type internal regret against the valuation: how much better the best
// response-grid mixture would have done at that type's flag. With
// use_true_flags the simulator-side flag averages stand in for the
// estimated ones.
RegretReport internal_regret_report(const PartialMonitorSession& session, Valuation valuation,
                                    bool use_true_flags);

// Per-type regret against realized payoffs: (N_l/n)(sup_x W(x, flag avg) -
// payoff avg), always with the worst-case valuation.
RegretReport actual_payoff_regret_report(const PartialMonitorSession& session);

struct ExternalRegret {
  double regret = 0.0;  // sup_x W(x, overall flag average) - overall payoff average
  double bound = 0.0;   // sum of per-type terms; regret <= bound by convexity
};

// Overall external regret plus its per-type decomposition bound. Throws if
// the convexity inequality regret <= bound + 1e-6 fails, which would mean
// the bookkeeping or the evaluator is broken.
ExternalRegret external_regret_report(const PartialMonitorSession& session);

// Doubling wrapper: runs blocks of geometrically growing length
// (block k lasts block_base * 4^(k-1) stages) with a fresh grid built at
// epsilon_k = 2^-(k+3) and a fresh session each block. When a grid becomes
// infeasible under the budget the schedule stops advancing and the last
// feasible block simply keeps running; the trace metadata records the block
// at which that happened. Trace columns: cum_regret (stage-weighted average
// of per-block positive actual-payoff regret), block, epsilon_k, block_end.
MetricTrace run_doubling(const SignalStructure& structure, Valuation valuation,
                         const Adversary& adversary, long block_base, long total_steps,
                         std::uint64_t seed, long log_every = 0);

}  // namespace orthant
