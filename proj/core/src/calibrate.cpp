#include "orthant/calibrate.hpp"

#include <cmath>

#include "orthant/errors.hpp"

namespace orthant {

Calibrator::Calibrator(FiniteGrid grid, double outcome_bound)
    : grid_(std::move(grid)),
      bound_(outcome_bound),
      engine_(grid_.size() > 0 ? grid_.size() : 1, 4.0 * outcome_bound * outcome_bound) {
  if (grid_.size() == 0) throw PreconditionError("Calibrator: empty forecast grid");
  if (!(bound_ > 0.0)) throw PreconditionError("Calibrator: outcome bound must be positive");
  for (const Vec& p : grid_.points)
    if (norm(p) > bound_ * (1.0 + 1e-12))
      throw PreconditionError("Calibrator: grid point outside the outcome bound");
  outcome_sums_.assign(grid_.size(), Vec(grid_.points[0].size(), 0.0));
}

int Calibrator::forecast(Rng& rng) {
  if (pending_) throw PreconditionError("pending observation");
  const int l = sample_index(engine_.next().weights(), rng);
  pending_ = l;
  return l;
}

int Calibrator::forecast_quantile(double quantile) {
  if (pending_) throw PreconditionError("pending observation");
  const int l = sample_index(engine_.next().weights(), quantile);
  pending_ = l;
  return l;
}

void Calibrator::ingest(int type, const Vec& outcome) {
  if (outcome.size() != grid_.points[0].size())
    throw PreconditionError("Calibrator: outcome dimension mismatch");
  if (norm(outcome) > bound_ * (1.0 + 1e-12))
    throw PreconditionError("outcome out of bound");
  Vec u(grid_.size());
  for (int l = 0; l < grid_.size(); ++l) u[l] = -dist2(outcome, grid_.points[l]);
  engine_.update(type, u);
  axpy(outcome_sums_[type], 1.0, outcome);
}

void Calibrator::observe(const Vec& outcome) {
  if (!pending_) throw PreconditionError("no pending forecast");
  const int l = *pending_;
  ingest(l, outcome);
  pending_.reset();
}

void Calibrator::replay(int type, const Vec& outcome) {
  if (pending_) throw PreconditionError("pending observation");
  if (type < 0 || type >= grid_.size()) throw PreconditionError("replay: type out of range");
  ingest(type, outcome);
}

double Calibrator::calibration_score() const {
  if (engine_.stage() == 0) throw PreconditionError("empty history");
  const double n = static_cast<double>(engine_.stage());
  double score = 0.0;  // the (l,l) pair contributes 0, so 0 is attainable
  for (int l = 0; l < grid_.size(); ++l) {
    const long nl = engine_.count(l);
    if (nl == 0) continue;
    Vec avg = outcome_sums_[l];
    scale(avg, 1.0 / nl);
    const double own = dist2(avg, grid_.points[l]);
    for (int k = 0; k < grid_.size(); ++k) {
      if (k == l) continue;
      const double v = (nl / n) * (own - dist2(avg, grid_.points[k]));
      score = std::max(score, v);
    }
  }
  return score;
}

double Calibrator::epsilon_calibration_score(double partition_mesh) const {
  if (engine_.stage() == 0) throw PreconditionError("empty history");
  const double n = static_cast<double>(engine_.stage());
  bool any = false;
  double score = 0.0;
  for (int l = 0; l < grid_.size(); ++l) {
    const long nl = engine_.count(l);
    if (nl == 0) continue;
    Vec avg = outcome_sums_[l];
    scale(avg, 1.0 / nl);
    const double v =
        (nl / n) * (dist2(avg, grid_.points[l]) - partition_mesh * partition_mesh);
    score = any ? std::max(score, v) : v;
    any = true;
  }
  return score;
}

Vec Calibrator::average_outcome(int type) const {
  if (type < 0 || type >= grid_.size())
    throw PreconditionError("average_outcome: type out of range");
  Vec avg = outcome_sums_[type];
  if (engine_.count(type) > 0) scale(avg, 1.0 / engine_.count(type));
  return avg;
}

}  // namespace orthant
