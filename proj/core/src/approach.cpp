#include "orthant/approach.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orthant/calibrate.hpp"
#include "orthant/errors.hpp"
#include "orthant/rng.hpp"

namespace orthant {

namespace {

// Exponential weights from accumulated losses, shifted so the largest
// exponent is zero before normalizing.
void softmin_weights(const Vec& losses, double eta, Vec& out) {
  double lo = *std::min_element(losses.begin(), losses.end());
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out[i] = std::exp(-eta * (losses[i] - lo));
    total += out[i];
  }
  for (double& w : out) w /= total;
}

}  // namespace

VectorPayoffGame::VectorPayoffGame(std::vector<std::vector<Vec>> payoff) : payoff_(std::move(payoff)) {
  if (payoff_.empty() || payoff_[0].empty()) throw PreconditionError("payoff tensor is empty");
  rows_ = static_cast<int>(payoff_.size());
  cols_ = static_cast<int>(payoff_[0].size());
  dim_ = static_cast<int>(payoff_[0][0].size());
  if (dim_ == 0) throw PreconditionError("payoff vectors are empty");
  for (const auto& row : payoff_) {
    if (static_cast<int>(row.size()) != cols_) throw PreconditionError("ragged payoff tensor");
    for (const Vec& entry : row) {
      if (static_cast<int>(entry.size()) != dim_) throw PreconditionError("payoff dimension mismatch");
      for (double v : entry) {
        if (!std::isfinite(v)) throw PreconditionError("payoff entries must be finite");
      }
      radius_sq_ = std::max(radius_sq_, norm2(entry));
    }
  }
}

Vec expected_payoff(const VectorPayoffGame& game, const SimplexVector& x, const SimplexVector& y) {
  if (x.dim() != game.rows() || y.dim() != game.cols()) {
    throw PreconditionError("mixed action dimension mismatch");
  }
  Vec out(static_cast<std::size_t>(game.dim()), 0.0);
  for (int i = 0; i < game.rows(); ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < game.cols(); ++j) {
      double w = x[i] * y[j];
      if (w == 0.0) continue;
      axpy(out, w, game.at(i, j));
    }
  }
  return out;
}

Vec expected_payoff_column(const VectorPayoffGame& game, const SimplexVector& x, int j) {
  if (x.dim() != game.rows()) throw PreconditionError("mixed action dimension mismatch");
  if (j < 0 || j >= game.cols()) throw PreconditionError("column index out of range");
  Vec out(static_cast<std::size_t>(game.dim()), 0.0);
  for (int i = 0; i < game.rows(); ++i) {
    if (x[i] != 0.0) axpy(out, x[i], game.at(i, j));
  }
  return out;
}

SimplexVector blackwell_step(const VectorPayoffGame& game, const ConvexTarget& target, const Vec& z) {
  if (static_cast<int>(z.size()) != game.dim()) throw PreconditionError("average payoff dimension mismatch");
  const int ni = game.rows();
  const int nj = game.cols();

  Vec p = target.project(z);
  Vec q = z;
  axpy(q, -1.0, p);
  double gap = norm(q);
  if (gap <= 1e-9) return SimplexVector::uniform(ni);

  double tolerance = 1e-3 * gap * std::sqrt(game.radius_sq());

  // Scalar game the separating mixture must win: row i against column j
  // pays <payoff(i,j) - p, z - p>.
  Matrix g(ni, nj);
  double pq = dot(p, q);
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nj; ++j) g(i, j) = dot(game.at(i, j), q) - pq;
  }

  const long max_rounds = 10000;
  const double ln_rows = std::log(static_cast<double>(ni));
  const double ln_cols = std::log(static_cast<double>(nj));
  Vec row_loss(static_cast<std::size_t>(ni), 0.0);
  Vec col_gain(static_cast<std::size_t>(nj), 0.0);
  Vec x(static_cast<std::size_t>(ni));
  Vec y(static_cast<std::size_t>(nj));
  Vec neg_col(static_cast<std::size_t>(nj));
  Vec x_sum(static_cast<std::size_t>(ni), 0.0);
  Vec x_avg(static_cast<std::size_t>(ni));

  double worst = 0.0;
  int worst_j = 0;
  for (long t = 1; t <= max_rounds; ++t) {
    double eta = std::sqrt(8.0 * std::max(ln_rows, 1e-12) / static_cast<double>(t));
    softmin_weights(row_loss, eta, x);
    double eta_col = std::sqrt(8.0 * std::max(ln_cols, 1e-12) / static_cast<double>(t));
    for (int j = 0; j < nj; ++j) neg_col[j] = -col_gain[j];
    softmin_weights(neg_col, eta_col, y);

    for (int i = 0; i < ni; ++i) x_sum[i] += x[i];
    for (int i = 0; i < ni; ++i) {
      double loss = 0.0;
      for (int j = 0; j < nj; ++j) loss += g(i, j) * y[j];
      row_loss[i] += loss;
    }
    for (int j = 0; j < nj; ++j) {
      double value = 0.0;
      for (int i = 0; i < ni; ++i) value += g(i, j) * x[i];
      col_gain[j] += value;
    }

    // The certificate only needs the running average, so test it
    // periodically and stop as soon as it clears the tolerance.
    if (t % 50 == 0 || t == max_rounds) {
      for (int i = 0; i < ni; ++i) x_avg[i] = x_sum[i] / static_cast<double>(t);
      worst = -1e300;
      for (int j = 0; j < nj; ++j) {
        double value = 0.0;
        for (int i = 0; i < ni; ++i) value += g(i, j) * x_avg[i];
        if (value > worst) {
          worst = value;
          worst_j = j;
        }
      }
      if (worst <= tolerance) return SimplexVector::normalized(x_avg);
    }
  }
  throw SeparationError("separation failed", worst_j, worst);
}

MetricTrace run_blackwell(const VectorPayoffGame& game, const ConvexTarget& target,
                          const Adversary& adversary, long steps, std::uint64_t seed,
                          long log_every) {
  if (steps < 1) throw PreconditionError("steps must be positive");
  MetricTrace trace = MetricTrace::start("approach-blackwell", "", seed);
  trace.columns = {"distance", "distance_sq"};

  Rng rng(seed);
  auto logged = log_stages(steps, log_every);
  std::size_t next_log = 0;

  Vec payoff_sum(static_cast<std::size_t>(game.dim()), 0.0);
  Vec average(static_cast<std::size_t>(game.dim()), 0.0);
  std::vector<long> own_counts(static_cast<std::size_t>(game.rows()), 0);

  for (long n = 1; n <= steps; ++n) {
    // The empty history enters as average zero.
    for (std::size_t k = 0; k < average.size(); ++k) {
      average[k] = n == 1 ? 0.0 : payoff_sum[k] / static_cast<double>(n - 1);
    }
    SimplexVector x = blackwell_step(game, target, average);
    int i = sample_index(x.weights(), rng);

    AdversaryView view;
    view.stage = n - 1;
    view.player_counts = &own_counts;
    view.average_payoff = n == 1 ? nullptr : &average;
    SimplexVector y = adversary(view, rng);
    if (y.dim() != game.cols()) throw PreconditionError("adversary mixture dimension mismatch");
    int j = sample_index(y.weights(), rng);

    own_counts[static_cast<std::size_t>(i)] += 1;
    axpy(payoff_sum, 1.0, game.at(i, j));

    if (next_log < logged.size() && logged[next_log] == n) {
      Vec avg = payoff_sum;
      scale(avg, 1.0 / static_cast<double>(n));
      double d = target.distance(avg);
      trace.append(n, {d, d * d});
      ++next_log;
    }
  }
  return trace;
}

BestResponseTable build_best_response_table(const VectorPayoffGame& game, const ConvexTarget& target,
                                            double forecast_mesh, double response_mesh) {
  BestResponseTable table;
  table.forecasts = simplex_grid(game.cols(), forecast_mesh);
  FiniteGrid responses = simplex_grid(game.rows(), response_mesh);
  table.epsilon = 2.0 * response_mesh;

  for (int l = 0; l < table.forecasts.size(); ++l) {
    SimplexVector y = SimplexVector::normalized(table.forecasts.points[static_cast<std::size_t>(l)]);
    double best = 1e300;
    int best_x = 0;
    for (int k = 0; k < responses.size(); ++k) {
      SimplexVector x = SimplexVector::normalized(responses.points[static_cast<std::size_t>(k)]);
      double d = target.distance(expected_payoff(game, x, y));
      if (d < best) {
        best = d;
        best_x = k;
      }
    }
    if (best > table.epsilon / 2.0) {
      throw ExcludabilityError("no response reaches the target at a forecast grid point",
                               y.weights(), best);
    }
    table.responses.push_back(SimplexVector::normalized(responses.points[static_cast<std::size_t>(best_x)]));
    table.achieved.push_back(best);
  }
  return table;
}

MetricTrace run_calibrated_approach(const VectorPayoffGame& game, const ConvexTarget& target,
                                    const BestResponseTable& table, const Adversary& adversary,
                                    long steps, std::uint64_t seed, long log_every) {
  if (steps < 1) throw PreconditionError("steps must be positive");
  if (table.responses.size() != static_cast<std::size_t>(table.forecasts.size())) {
    throw PreconditionError("best response table is incomplete");
  }
  const int types = table.forecasts.size();
  const int dim = game.dim();

  MetricTrace trace = MetricTrace::start("approach-calibrated", "", seed);
  trace.columns = {"distance", "decomp_bound"};
  for (int l = 0; l < types; ++l) trace.columns.push_back("freq_" + std::to_string(l));
  for (int l = 0; l < types; ++l) trace.columns.push_back("ferr_" + std::to_string(l));

  // Forecast the opponent's mixed action over its grid; outcomes fed back
  // are the realized pure columns as simplex vertices.
  Calibrator calibrator(table.forecasts, 1.0);
  Rng rng(seed);
  auto logged = log_stages(steps, log_every);
  std::size_t next_log = 0;

  std::vector<Vec> payoff_sums(static_cast<std::size_t>(types), Vec(static_cast<std::size_t>(dim), 0.0));
  Vec total(static_cast<std::size_t>(dim), 0.0);
  std::vector<long> own_counts(static_cast<std::size_t>(game.rows()), 0);
  Vec average(static_cast<std::size_t>(dim), 0.0);

  for (long n = 1; n <= steps; ++n) {
    int l = calibrator.forecast(rng);
    const SimplexVector& x = table.responses[static_cast<std::size_t>(l)];
    int i = sample_index(x.weights(), rng);

    AdversaryView view;
    view.stage = n - 1;
    view.player_counts = &own_counts;
    view.average_payoff = n == 1 ? nullptr : &average;
    SimplexVector y = adversary(view, rng);
    if (y.dim() != game.cols()) throw PreconditionError("adversary mixture dimension mismatch");
    int j = sample_index(y.weights(), rng);

    own_counts[static_cast<std::size_t>(i)] += 1;
    const Vec& payoff = game.at(i, j);
    axpy(payoff_sums[static_cast<std::size_t>(l)], 1.0, payoff);
    axpy(total, 1.0, payoff);
    for (std::size_t k = 0; k < average.size(); ++k) average[k] = total[k] / static_cast<double>(n);

    Vec vertex(static_cast<std::size_t>(game.cols()), 0.0);
    vertex[static_cast<std::size_t>(j)] = 1.0;
    calibrator.observe(vertex);

    if (next_log < logged.size() && logged[next_log] == n) {
      Vec row;
      row.reserve(static_cast<std::size_t>(2 + 2 * types));
      row.push_back(target.distance(average));

      double decomp = 0.0;
      Vec freqs(static_cast<std::size_t>(types), 0.0);
      Vec errs(static_cast<std::size_t>(types), 0.0);
      for (int t = 0; t < types; ++t) {
        long c = calibrator.count(t);
        if (c == 0) continue;
        double w = static_cast<double>(c) / static_cast<double>(n);
        Vec type_avg = payoff_sums[static_cast<std::size_t>(t)];
        scale(type_avg, 1.0 / static_cast<double>(c));
        decomp += w * target.distance(type_avg);
        freqs[static_cast<std::size_t>(t)] = w;
        errs[static_cast<std::size_t>(t)] =
            dist(calibrator.average_outcome(t), table.forecasts.points[static_cast<std::size_t>(t)]);
      }
      row.push_back(decomp);
      row.insert(row.end(), freqs.begin(), freqs.end());
      row.insert(row.end(), errs.begin(), errs.end());
      trace.append(n, std::move(row));
      ++next_log;
    }
  }
  return trace;
}

VectorPayoffGame halfspace_reduction(const VectorPayoffGame& game,
                                     const std::vector<Halfspace>& halfspaces) {
  if (halfspaces.empty()) throw PreconditionError("halfspace list is empty");
  for (const auto& h : halfspaces) {
    if (static_cast<int>(h.normal.size()) != game.dim()) {
      throw PreconditionError("halfspace dimension mismatch");
    }
  }
  std::vector<std::vector<Vec>> payoff(static_cast<std::size_t>(game.rows()));
  for (int i = 0; i < game.rows(); ++i) {
    payoff[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(game.cols()));
    for (int j = 0; j < game.cols(); ++j) {
      Vec slack;
      slack.reserve(halfspaces.size());
      for (const auto& h : halfspaces) slack.push_back(dot(game.at(i, j), h.normal) - h.offset);
      payoff[static_cast<std::size_t>(i)].push_back(std::move(slack));
    }
  }
  return VectorPayoffGame(std::move(payoff));
}

MetricTrace run_halfspace(const VectorPayoffGame& game, const std::vector<Halfspace>& halfspaces,
                          const Adversary& adversary, long steps, std::uint64_t seed,
                          long log_every) {
  if (steps < 1) throw PreconditionError("steps must be positive");
  VectorPayoffGame reduced = halfspace_reduction(game, halfspaces);
  ConvexTarget orthant = ConvexTarget::nonpositive_orthant(reduced.dim());

  MetricTrace trace = MetricTrace::start("halfspace", "", seed);
  trace.columns = {"distance_box", "aux_distance"};

  Rng rng(seed);
  auto logged = log_stages(steps, log_every);
  std::size_t next_log = 0;

  Vec original_sum(static_cast<std::size_t>(game.dim()), 0.0);
  Vec reduced_sum(static_cast<std::size_t>(reduced.dim()), 0.0);
  Vec original_avg(static_cast<std::size_t>(game.dim()), 0.0);
  Vec reduced_avg(static_cast<std::size_t>(reduced.dim()), 0.0);
  std::vector<long> own_counts(static_cast<std::size_t>(game.rows()), 0);

  for (long n = 1; n <= steps; ++n) {
    for (std::size_t k = 0; k < reduced_avg.size(); ++k) {
      reduced_avg[k] = n == 1 ? 0.0 : reduced_sum[k] / static_cast<double>(n - 1);
    }
    SimplexVector x = blackwell_step(reduced, orthant, reduced_avg);
    int i = sample_index(x.weights(), rng);

    AdversaryView view;
    view.stage = n - 1;
    view.player_counts = &own_counts;
    view.average_payoff = n == 1 ? nullptr : &original_avg;
    SimplexVector y = adversary(view, rng);
    if (y.dim() != game.cols()) throw PreconditionError("adversary mixture dimension mismatch");
    int j = sample_index(y.weights(), rng);

    own_counts[static_cast<std::size_t>(i)] += 1;
    axpy(original_sum, 1.0, game.at(i, j));
    axpy(reduced_sum, 1.0, reduced.at(i, j));
    for (std::size_t k = 0; k < original_avg.size(); ++k) {
      original_avg[k] = original_sum[k] / static_cast<double>(n);
    }

    if (next_log < logged.size() && logged[next_log] == n) {
      Vec box_point = project_halfspaces(original_avg, halfspaces);
      double d_box = dist(original_avg, box_point);
      Vec avg = reduced_sum;
      scale(avg, 1.0 / static_cast<double>(n));
      trace.append(n, {d_box, orthant.distance(avg)});
      ++next_log;
    }
  }
  return trace;
}

}  // namespace orthant
