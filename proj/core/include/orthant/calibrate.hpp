#pragma once

#include <optional>

#include "orthant/regret.hpp"
#include "orthant/rng.hpp"
#include "orthant/simplex.hpp"

namespace orthant {

// Calibrated forecasting against a finite grid of candidate forecasts.
// Wraps a regret engine over the grid indices ("types"): announcing type l
// and then seeing outcome s scores U = (-||s - mu(k)||^2)_k, so internal
// regret of the wrapped engine is exactly miscalibration.
//
// The forecast/observe handshake must alternate; it enforces the
// independence between the announced type and the incoming outcome.
class Calibrator {
 public:
  // outcome_bound is the radius of the outcome set; grid points must lie
  // within it.  The wrapped engine gets outcome bound 4 * outcome_bound^2.
  Calibrator(FiniteGrid grid, double outcome_bound);

  // Samples l from the engine's current mixed action and records it as
  // pending.  Throws "pending observation" when called twice in a row.
  int forecast(Rng& rng);
  // Deterministic variant: quantile in [0,1) replaces the random draw.
  int forecast_quantile(double quantile);

  // Feeds the outcome for the pending forecast.  Throws "no pending
  // forecast" / "outcome out of bound".
  void observe(const Vec& outcome);

  // Imports one recorded (type, outcome) pair, bypassing the sampler but
  // not the bookkeeping; lets tests and trace replays rebuild a state.
  void replay(int type, const Vec& outcome);

  long stage() const { return engine_.stage(); }
  int num_types() const { return grid_.size(); }
  bool pending() const { return pending_.has_value(); }

  // max over type pairs (l,k) of (N_l/n)(||avg(l)-mu(l)||^2-||avg(l)-mu(k)||^2);
  // equals the wrapped engine's max positive regret (streaming-average
  // identity).  Throws "empty history" at n=0.
  double calibration_score() const;

  // max over used types of (N_l/n)(||avg(l)-mu(l)||^2 - partition_mesh^2);
  // nonpositive once every conditional average sits within partition_mesh
  // of its announced forecast.
  double epsilon_calibration_score(double partition_mesh) const;

  const FiniteGrid& grid() const { return grid_; }
  const RegretEngine& engine() const { return engine_; }
  long count(int type) const { return engine_.count(type); }
  // Conditional outcome average over the stages announcing `type` (zeros if
  // the type is unused).
  Vec average_outcome(int type) const;

 private:
  void ingest(int type, const Vec& outcome);

  FiniteGrid grid_;
  double bound_;
  RegretEngine engine_;
  std::vector<Vec> outcome_sums_;
  std::optional<int> pending_;
};

}  // namespace orthant
