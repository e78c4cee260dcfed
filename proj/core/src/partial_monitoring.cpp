#include "orthant/partial_monitoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "orthant/convex.hpp"
#include "orthant/errors.hpp"

namespace orthant {

namespace {

double gaussian(Rng& rng) {
  double u1 = rng.unit();
  double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(6.283185307179586 * u2);
}

SimplexVector random_simplex(int d, Rng& rng) {
  Vec w(static_cast<std::size_t>(d));
  for (double& x : w) x = -std::log(1.0 - rng.unit());
  return SimplexVector::normalized(std::move(w));
}

// Penalized evaluation of a flag: min (or max) over mixed columns of
// payoff(x, y) +/- K |flag_of(y) - mu|^2, solved by Frank-Wolfe with exact
// line search over the column simplex. The quadratic is expressed through
// the pure-flag columns, so each iteration costs O(cols * flag_dim).
class PenalizedValue {
 public:
  PenalizedValue(const SignalStructure& s, Valuation valuation)
      : s_(&s), maximize_(valuation == Valuation::optimistic) {
    K_ = 1e3 * s.payoff_radius;
    tol_ = 1e-11 * (1.0 + s.payoff_radius + K_);
    const int nj = s.cols();
    c_.resize(static_cast<std::size_t>(nj));
    y_.resize(static_cast<std::size_t>(nj));
    g_.resize(static_cast<std::size_t>(nj));
    dm_.resize(static_cast<std::size_t>(nj));
    ay_.resize(s.pure_flags()[0].size());
  }

  // mu is a flattened flag expected to lie in (or extremely near) the
  // reachable polytope. thorough additionally scans a mesh-0.01 grid of the
  // column simplex and restarts from any grid point that beats the solver;
  // for two columns the scan is always run (it collapses to evaluating the
  // segment quadratic at the integer points around its vertex).
  double eval(const SimplexVector& x, const Vec& mu, bool thorough = false) {
    const int nj = s_->cols();
    if (x.dim() != s_->rows()) throw PreconditionError("mixed action dimension mismatch");
    for (int j = 0; j < nj; ++j) {
      double v = 0.0;
      for (int i = 0; i < s_->rows(); ++i) v += x[i] * s_->payoff(i, j);
      c_[static_cast<std::size_t>(j)] = maximize_ ? -v : v;
    }
    double f = solve(mu, thorough);
    if (K_ > 0.0) {
      double residual = std::sqrt(std::max(0.0, penalty_));
      if (residual > std::sqrt(2.0 * s_->payoff_radius / K_) + 1e-6) {
        throw ConvergenceError("preimage empty", residual);
      }
    }
    return maximize_ ? -f : f;
  }

  const Vec& argument() const { return y_; }

 private:
  double objective(const Vec& mu) {
    const auto& cols = s_->pure_flags();
    // Rebuild the image from scratch so incremental drift cannot accumulate
    // into the reported value.
    std::fill(ay_.begin(), ay_.end(), 0.0);
    for (std::size_t j = 0; j < y_.size(); ++j) {
      if (y_[j] != 0.0) axpy(ay_, y_[j], cols[j]);
    }
    penalty_ = dist2(ay_, mu);
    return dot(c_, y_) + K_ * penalty_;
  }

  void descend(const Vec& mu, int max_iters) {
    const auto& cols = s_->pure_flags();
    const int nj = static_cast<int>(y_.size());
    for (int j = 0; j < nj; ++j) dm_[static_cast<std::size_t>(j)] = dot(cols[static_cast<std::size_t>(j)], mu);
    for (int t = 0; t < max_iters; ++t) {
      int best = 0;
      double best_g = 1e300;
      double along = 0.0;
      for (int j = 0; j < nj; ++j) {
        double gj = c_[static_cast<std::size_t>(j)] +
                    2.0 * K_ * (dot(cols[static_cast<std::size_t>(j)], ay_) - dm_[static_cast<std::size_t>(j)]);
        g_[static_cast<std::size_t>(j)] = gj;
        along += gj * y_[static_cast<std::size_t>(j)];
        if (gj < best_g) {
          best_g = gj;
          best = j;
        }
      }
      double gap = along - best_g;
      if (gap <= tol_) break;
      double denom = K_ * dist2(cols[static_cast<std::size_t>(best)], ay_);
      double step = denom > 0.0 ? std::min(1.0, gap / (2.0 * denom)) : 1.0;
      for (std::size_t j = 0; j < y_.size(); ++j) y_[j] *= 1.0 - step;
      y_[static_cast<std::size_t>(best)] += step;
      for (std::size_t k = 0; k < ay_.size(); ++k) {
        ay_[k] += step * (cols[static_cast<std::size_t>(best)][k] - ay_[k]);
      }
    }
  }

  double solve(const Vec& mu, bool thorough) {
    const auto& cols = s_->pure_flags();
    const int nj = s_->cols();

    int start = 0;
    double best_vertex = 1e300;
    for (int j = 0; j < nj; ++j) {
      double f = c_[static_cast<std::size_t>(j)] + K_ * dist2(cols[static_cast<std::size_t>(j)], mu);
      if (f < best_vertex) {
        best_vertex = f;
        start = j;
      }
    }
    std::fill(y_.begin(), y_.end(), 0.0);
    y_[static_cast<std::size_t>(start)] = 1.0;
    ay_ = cols[static_cast<std::size_t>(start)];
    if (nj > 1) descend(mu, 10000);
    double value = objective(mu);

    if (nj == 2) {
      value = segment_scan(mu, value);
    } else if (thorough && nj >= 3 && nj <= 4) {
      value = grid_scan(mu, value);
    }
    return value;
  }

  // Objective along (1-t, t) is a quadratic in t, so the exhaustive
  // mesh-0.01 grid scan reduces to the lattice points around its vertex
  // plus the endpoints.
  double segment_scan(const Vec& mu, double current) {
    const auto& cols = s_->pure_flags();
    const int m = static_cast<int>(std::ceil(std::sqrt(2.0) / 0.01));
    Vec d = cols[1];
    axpy(d, -1.0, cols[0]);
    Vec r0 = cols[0];
    axpy(r0, -1.0, mu);
    double alpha = c_[0] + K_ * norm2(r0);
    double beta = (c_[1] - c_[0]) + 2.0 * K_ * dot(r0, d);
    double quad = K_ * norm2(d);

    std::vector<int> candidates = {0, m};
    if (quad > 0.0) {
      double t_star = -beta / (2.0 * quad);
      int k0 = static_cast<int>(std::floor(t_star * m));
      for (int k = k0 - 1; k <= k0 + 2; ++k) candidates.push_back(std::clamp(k, 0, m));
    }
    double best = 1e300;
    int best_k = 0;
    for (int k : candidates) {
      double t = static_cast<double>(k) / m;
      double f = alpha + beta * t + quad * t * t;
      if (f < best) {
        best = f;
        best_k = k;
      }
    }
    if (best < current - 1e-12) {
      double t = static_cast<double>(best_k) / m;
      y_[0] = 1.0 - t;
      y_[1] = t;
      descend(mu, 100);
      double polished = objective(mu);
      return std::min(polished, current);
    }
    return current;
  }

  double grid_scan(const Vec& mu, double current) {
    const int nj = s_->cols();
    const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nj)) / 0.01));
    if (simplex_grid_count(nj, m) > 2e4) return current;  // scan would dominate the solve
    FiniteGrid grid = simplex_grid_denominator(nj, m, 1e7);
    const auto& cols = s_->pure_flags();
    double best = 1e300;
    int best_l = -1;
    Vec image(ay_.size());
    for (int l = 0; l < grid.size(); ++l) {
      const Vec& y = grid.points[static_cast<std::size_t>(l)];
      std::fill(image.begin(), image.end(), 0.0);
      double lin = 0.0;
      for (int j = 0; j < nj; ++j) {
        if (y[static_cast<std::size_t>(j)] == 0.0) continue;
        axpy(image, y[static_cast<std::size_t>(j)], cols[static_cast<std::size_t>(j)]);
        lin += y[static_cast<std::size_t>(j)] * c_[static_cast<std::size_t>(j)];
      }
      double f = lin + K_ * dist2(image, mu);
      if (f < best) {
        best = f;
        best_l = l;
      }
    }
    if (best_l >= 0 && best < current - 1e-12) {
      y_ = grid.points[static_cast<std::size_t>(best_l)];
      descend(mu, 1000);
      double polished = objective(mu);
      return std::min(polished, current);
    }
    return current;
  }

  const SignalStructure* s_;
  bool maximize_;
  double K_ = 0.0;
  double tol_ = 0.0;
  double penalty_ = 0.0;
  Vec c_, y_, g_, dm_, ay_;
};

// Operator norm of y -> flag_of(y) restricted to differences of simplex
// points (the sum-zero subspace), by power iteration. Overestimating is
// safe for the covering argument, underestimating is not, so the result
// gets a hair of headroom and is floored by the steepest pure-column pair.
double flag_gain(const SignalStructure& s) {
  const int nj = s.cols();
  if (nj < 2) return 0.0;
  const auto& cols = s.pure_flags();

  double pair_bound = 0.0;
  for (int a = 0; a < nj; ++a) {
    for (int b = a + 1; b < nj; ++b) {
      pair_bound = std::max(pair_bound, dist(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]) / std::sqrt(2.0));
    }
  }

  Vec v(static_cast<std::size_t>(nj));
  for (int j = 0; j < nj; ++j) v[static_cast<std::size_t>(j)] = static_cast<double>(j + 1);
  Vec image(cols[0].size());
  double sigma = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= nj;
    for (double& x : v) x -= mean;
    double nv = norm(v);
    if (nv < 1e-15) break;
    scale(v, 1.0 / nv);

    std::fill(image.begin(), image.end(), 0.0);
    for (int j = 0; j < nj; ++j) {
      if (v[static_cast<std::size_t>(j)] != 0.0) axpy(image, v[static_cast<std::size_t>(j)], cols[static_cast<std::size_t>(j)]);
    }
    sigma = norm(image);
    for (int j = 0; j < nj; ++j) v[static_cast<std::size_t>(j)] = dot(cols[static_cast<std::size_t>(j)], image);
  }
  return std::max(sigma, pair_bound) * (1.0 + 1e-9);
}

std::vector<SimplexVector> grid_mixtures(const FiniteGrid& grid) {
  std::vector<SimplexVector> out;
  out.reserve(grid.points.size());
  for (const Vec& p : grid.points) out.push_back(SimplexVector::normalized(p));
  return out;
}

}  // namespace

SignalStructure::SignalStructure(Matrix payoff_matrix, std::vector<std::vector<Vec>> signal_laws)
    : payoff(std::move(payoff_matrix)), signal(std::move(signal_laws)) {
  if (payoff.rows() < 1 || payoff.cols() < 1) throw PreconditionError("payoff matrix is empty");
  if (static_cast<int>(signal.size()) != payoff.rows()) {
    throw PreconditionError("signal law row count mismatch");
  }
  for (const auto& row : signal) {
    if (static_cast<int>(row.size()) != payoff.cols()) {
      throw PreconditionError("signal law column count mismatch");
    }
  }
  num_signals = static_cast<int>(signal[0][0].size());
  if (num_signals < 1) throw PreconditionError("signal alphabet is empty");
  for (int i = 0; i < rows(); ++i) {
    for (int j = 0; j < cols(); ++j) {
      if (!std::isfinite(payoff(i, j))) throw PreconditionError("payoff entries must be finite");
      payoff_radius = std::max(payoff_radius, std::abs(payoff(i, j)));
      const Vec& p = law(i, j);
      if (static_cast<int>(p.size()) != num_signals) throw PreconditionError("ragged signal alphabet");
      double total = 0.0;
      for (double v : p) {
        if (v < 0.0) throw PreconditionError("signal law has a negative entry");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("signal law does not sum to one");
    }
  }
  pure_flags_.reserve(static_cast<std::size_t>(cols()));
  for (int j = 0; j < cols(); ++j) {
    Vec flat(static_cast<std::size_t>(rows()) * static_cast<std::size_t>(num_signals));
    for (int i = 0; i < rows(); ++i) {
      for (int s = 0; s < num_signals; ++s) {
        flat[static_cast<std::size_t>(i) * num_signals + s] = law(i, j)[static_cast<std::size_t>(s)];
      }
    }
    pure_flags_.push_back(std::move(flat));
  }
}

Flag flag_of(const SignalStructure& structure, const SimplexVector& y) {
  if (y.dim() != structure.cols()) throw PreconditionError("mixed column dimension mismatch");
  Flag flag(structure.rows(), structure.num_signals);
  for (int j = 0; j < structure.cols(); ++j) {
    if (y[j] != 0.0) axpy(flag.data, y[j], structure.pure_flags()[static_cast<std::size_t>(j)]);
  }
  return flag;
}

Flag pure_flag(const SignalStructure& structure, int j) {
  if (j < 0 || j >= structure.cols()) throw PreconditionError("column index out of range");
  Flag flag(structure.rows(), structure.num_signals);
  flag.data = structure.pure_flags()[static_cast<std::size_t>(j)];
  return flag;
}

RangeProjection range_projection(const SignalStructure& structure, const Flag& mu) {
  if (mu.actions != structure.rows() || mu.signals != structure.num_signals) {
    throw PreconditionError("flag shape mismatch");
  }
  LinearImageProjection p = project_linear_image(mu.data, structure.pure_flags());
  RangeProjection out{Flag(structure.rows(), structure.num_signals), std::move(p.coefficients), p.gap};
  out.image.data = std::move(p.image);
  return out;
}

double flag_value(const SignalStructure& structure, Valuation valuation, const SimplexVector& x,
                  const Flag& mu, bool mu_in_range) {
  if (mu.actions != structure.rows() || mu.signals != structure.num_signals) {
    throw PreconditionError("flag shape mismatch");
  }
  PenalizedValue pv(structure, valuation);
  if (mu_in_range) return pv.eval(x, mu.data);
  RangeProjection projected = range_projection(structure, mu);
  return pv.eval(x, projected.image.data, true);
}

double worst_case_w(const SignalStructure& structure, const SimplexVector& x, const Flag& mu) {
  return flag_value(structure, Valuation::worst_case, x, mu, false);
}

double optimistic_o(const SignalStructure& structure, const SimplexVector& x, const Flag& mu) {
  return flag_value(structure, Valuation::optimistic, x, mu, false);
}

SimplexVector perturb(const SimplexVector& x, double eta) {
  if (!(eta > 0.0) || eta > 1.0) throw PreconditionError("perturbation weight must be in (0, 1]");
  Vec w = x.weights();
  const double floor_mass = eta / x.dim();
  for (double& v : w) v = (1.0 - eta) * v + floor_mass;
  return SimplexVector::normalized(std::move(w));
}

Vec estimator(int signal, int action, const SimplexVector& x_used, int num_signals) {
  if (num_signals < 1) throw PreconditionError("signal alphabet is empty");
  if (signal < 0 || signal >= num_signals) throw PreconditionError("signal index out of range");
  if (action < 0 || action >= x_used.dim()) throw PreconditionError("action index out of range");
  if (x_used[action] <= 0.0) throw PreconditionError("estimator undefined");
  Vec out(static_cast<std::size_t>(x_used.dim()) * static_cast<std::size_t>(num_signals), 0.0);
  out[static_cast<std::size_t>(action) * num_signals + signal] = 1.0 / x_used[action];
  return out;
}

BestResponseGrid build_br_grid(const SignalStructure& structure, Valuation valuation,
                               double epsilon, double budget) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  const int ni = structure.rows();
  const int nj = structure.cols();
  const double r = structure.payoff_radius;

  BestResponseGrid out;
  out.epsilon = epsilon;
  out.flag_gain = flag_gain(structure);

  // Lipschitz constant of the valuation in the flag, sampled along pairs of
  // reachable flags. Fixed seed: the grid is a function of the structure and
  // epsilon alone, never of the run seed.
  PenalizedValue pv(structure, valuation);
  Rng sampler(12345);
  double lhat = 0.0;
  if (nj >= 2 && out.flag_gain > 1e-12) {
    for (int it = 0; it < 1000; ++it) {
      SimplexVector x = random_simplex(ni, sampler);
      Flag m1 = flag_of(structure, random_simplex(nj, sampler));
      Flag m2 = flag_of(structure, random_simplex(nj, sampler));
      double dmu = dist(m1.data, m2.data);
      if (dmu < 1e-9) continue;
      double gap = std::abs(pv.eval(x, m1.data) - pv.eval(x, m2.data));
      lhat = std::max(lhat, gap / dmu);
    }
  }
  out.lipschitz_mu = lhat;

  // Column-simplex mesh that makes the pushed-forward grid a delta-cover of
  // the reachable flag polytope.
  int m_y = 1;
  if (lhat > 1e-12 && out.flag_gain > 1e-12) {
    double delta_target = epsilon / (4.0 * lhat);
    double y_mesh = delta_target / out.flag_gain;
    double m_needed = std::ceil(std::sqrt(static_cast<double>(nj)) / y_mesh);
    if (m_needed > 1e9) throw GridBudgetError("grid budget exceeded", simplex_grid_count(nj, 1000000000));
    m_y = std::max(1, static_cast<int>(m_needed));
  }
  if (simplex_grid_count(nj, m_y) > budget) {
    throw GridBudgetError("grid budget exceeded", simplex_grid_count(nj, m_y));
  }
  FiniteGrid column_grid = simplex_grid_denominator(nj, m_y, budget);

  for (const Vec& yw : column_grid.points) {
    Flag flag = flag_of(structure, SimplexVector::normalized(yw));
    bool fresh = true;
    for (const Vec& kept : out.flags.points) {
      if (max_abs_diff(kept, flag.data) <= 1e-12) {
        fresh = false;
        break;
      }
    }
    if (fresh) out.flags.points.push_back(std::move(flag.data));
  }
  out.flags.mesh = out.flag_gain * column_grid.mesh;
  out.delta = out.flags.mesh;

  out.eta = std::min(1.0, epsilon / (4.0 * std::max(r, 1.0)));
  out.response_grid = simplex_grid(ni, epsilon / (4.0 * std::max(r, 1.0)), budget);
  std::vector<SimplexVector> responses = grid_mixtures(out.response_grid);

  for (const Vec& mu : out.flags.points) {
    int best = 0;
    double best_v = -1e300;
    for (std::size_t k = 0; k < responses.size(); ++k) {
      double v = pv.eval(responses[k], mu);
      if (v > best_v) {
        best_v = v;
        best = static_cast<int>(k);
      }
    }
    out.responses.push_back(responses[static_cast<std::size_t>(best)]);
  }

  // Spot-check the near-best-response property on perturbed pairs around
  // every grid point. The sup over responses subsamples past 10^4 points to
  // keep the check affordable.
  Rng checker(98765);
  const std::size_t stride = responses.size() > 10000 ? responses.size() / 10000 + 1 : 1;
  const int flat = ni * structure.num_signals;
  for (int l = 0; l < out.flags.size(); ++l) {
    const Vec& mu = out.flags.points[static_cast<std::size_t>(l)];
    const SimplexVector& xl = out.responses[static_cast<std::size_t>(l)];
    for (int trial = 0; trial < 100; ++trial) {
      Vec xw = xl.weights();
      Vec dir(xw.size());
      for (double& v : dir) v = gaussian(checker);
      double nd = norm(dir);
      if (nd > 1e-12) {
        scale(dir, 2.0 * out.eta * checker.unit() / nd);
        axpy(xw, 1.0, dir);
      }
      xw = project_to_simplex(xw);

      Vec md = mu;
      if (out.delta > 0.0) {
        Vec mdir(static_cast<std::size_t>(flat));
        for (double& v : mdir) v = gaussian(checker);
        double nm = norm(mdir);
        if (nm > 1e-12) {
          scale(mdir, 2.0 * out.delta * checker.unit() / nm);
          axpy(md, 1.0, mdir);
        }
        for (int i = 0; i < ni; ++i) {
          Vec row(md.begin() + static_cast<std::ptrdiff_t>(i) * structure.num_signals,
                  md.begin() + static_cast<std::ptrdiff_t>(i + 1) * structure.num_signals);
          row = project_to_simplex(row);
          std::copy(row.begin(), row.end(), md.begin() + static_cast<std::ptrdiff_t>(i) * structure.num_signals);
        }
      }
      Flag perturbed(ni, structure.num_signals);
      perturbed.data = std::move(md);
      RangeProjection reachable = range_projection(structure, perturbed);

      double sup = -1e300;
      for (std::size_t k = 0; k < responses.size(); k += stride) {
        sup = std::max(sup, pv.eval(responses[k], reachable.image.data));
      }
      double mine = pv.eval(SimplexVector::normalized(xw), reachable.image.data);
      if (mine < sup - epsilon - 1e-6) {
        throw GridConstantsError("Assumption 1 constants too loose: sampled pair beats the stored response by " +
                                 std::to_string(sup - mine));
      }
    }
  }
  return out;
}

namespace {

double estimator_bound(const SignalStructure& s, const BestResponseGrid& g) {
  if (!(g.eta > 0.0) || g.eta > 1.0) {
    throw PreconditionError("grid perturbation weight must be in (0, 1]");
  }
  return static_cast<double>(s.rows()) / g.eta;
}

}  // namespace

PartialMonitorSession::PartialMonitorSession(SignalStructure structure, BestResponseGrid grid)
    : structure_(std::move(structure)),
      grid_(std::move(grid)),
      calibrator_(grid_.flags, estimator_bound(structure_, grid_)) {
  if (grid_.responses.size() != static_cast<std::size_t>(grid_.flags.size())) {
    throw PreconditionError("grid has no response for some flag");
  }
  const int flat = structure_.rows() * structure_.num_signals;
  for (const Vec& p : grid_.flags.points) {
    if (static_cast<int>(p.size()) != flat) throw PreconditionError("grid flag shape mismatch");
  }
  perturbed_.reserve(grid_.responses.size());
  for (const SimplexVector& x : grid_.responses) {
    if (x.dim() != structure_.rows()) throw PreconditionError("grid response shape mismatch");
    perturbed_.push_back(perturb(x, grid_.eta));
  }
  action_counts_.assign(grid_.responses.size(),
                        std::vector<long>(static_cast<std::size_t>(structure_.rows()), 0));
  flag_sums_.assign(grid_.responses.size(), Vec(static_cast<std::size_t>(flat), 0.0));
  payoff_sums_.assign(grid_.responses.size(), 0.0);
}

PartialMonitorSession::Step PartialMonitorSession::begin_stage(Rng& rng) {
  if (open_) throw PreconditionError("previous stage still open");
  Step step;
  step.type = calibrator_.forecast(rng);
  step.action = sample_index(perturbed_[static_cast<std::size_t>(step.type)].weights(), rng);
  open_ = step;
  return step;
}

void PartialMonitorSession::finish_stage(const Flag& true_flag, int signal, double payoff) {
  if (!open_) throw PreconditionError("no open stage");
  if (true_flag.actions != structure_.rows() || true_flag.signals != structure_.num_signals) {
    throw PreconditionError("flag shape mismatch");
  }
  if (signal < 0 || signal >= structure_.num_signals) throw PreconditionError("signal index out of range");
  if (std::abs(payoff) > structure_.payoff_radius + 1e-9) throw PreconditionError("payoff out of range");
  for (int i = 0; i < structure_.rows(); ++i) {
    double total = 0.0;
    for (int s = 0; s < structure_.num_signals; ++s) {
      double v = true_flag.at(i, s);
      if (v < -1e-12) throw PreconditionError("flag row has a negative entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("flag row does not sum to one");
  }

  const int l = open_->type;
  const int i = open_->action;
  Vec shat = estimator(signal, i, perturbed_[static_cast<std::size_t>(l)], structure_.num_signals);
  double bound = static_cast<double>(structure_.rows()) / grid_.eta;
  if (max_abs(shat) > bound + 1e-6) throw std::logic_error("estimator bound violated");
  calibrator_.observe(shat);

  action_counts_[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] += 1;
  axpy(flag_sums_[static_cast<std::size_t>(l)], 1.0, true_flag.data);
  payoff_sums_[static_cast<std::size_t>(l)] += payoff;
  open_.reset();
}

SimplexVector PartialMonitorSession::action_average(int l) const {
  long c = count(l);
  if (c == 0) throw PreconditionError("type has no stages");
  Vec w(action_counts_[static_cast<std::size_t>(l)].size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<double>(action_counts_[static_cast<std::size_t>(l)][i]) / static_cast<double>(c);
  }
  return SimplexVector::normalized(std::move(w));
}

Flag PartialMonitorSession::true_flag_average(int l) const {
  long c = count(l);
  if (c == 0) throw PreconditionError("type has no stages");
  Flag flag(structure_.rows(), structure_.num_signals);
  flag.data = flag_sums_[static_cast<std::size_t>(l)];
  scale(flag.data, 1.0 / static_cast<double>(c));
  return flag;
}

double PartialMonitorSession::payoff_average(int l) const {
  long c = count(l);
  if (c == 0) throw PreconditionError("type has no stages");
  return payoff_sums_[static_cast<std::size_t>(l)] / static_cast<double>(c);
}

Flag PartialMonitorSession::overall_flag_average() const {
  long n = stage();
  if (n == 0) throw PreconditionError("empty history");
  Flag flag(structure_.rows(), structure_.num_signals);
  for (const Vec& s : flag_sums_) axpy(flag.data, 1.0, s);
  scale(flag.data, 1.0 / static_cast<double>(n));
  return flag;
}

double PartialMonitorSession::overall_payoff_average() const {
  long n = stage();
  if (n == 0) throw PreconditionError("empty history");
  double total = 0.0;
  for (double s : payoff_sums_) total += s;
  return total / static_cast<double>(n);
}

RegretReport internal_regret_report(const PartialMonitorSession& session, Valuation valuation,
                                    bool use_true_flags) {
  const long n = session.stage();
  if (n == 0) throw PreconditionError("empty history");
  const auto& grid = session.grid();
  std::vector<SimplexVector> responses = grid_mixtures(grid.response_grid);
  PenalizedValue pv(session.structure(), valuation);

  RegretReport report;
  report.per_type.assign(static_cast<std::size_t>(session.num_types()), 0.0);
  report.max_value = -1e300;
  for (int l = 0; l < session.num_types(); ++l) {
    long c = session.count(l);
    if (c == 0) continue;
    Vec mu;
    if (use_true_flags) {
      mu = session.true_flag_average(l).data;
    } else {
      Flag estimated(session.structure().rows(), session.structure().num_signals);
      estimated.data = session.estimator_average(l);
      mu = range_projection(session.structure(), estimated).image.data;
    }
    double sup = -1e300;
    for (const SimplexVector& x : responses) sup = std::max(sup, pv.eval(x, mu));
    double mine = pv.eval(session.action_average(l), mu);
    double value = (static_cast<double>(c) / static_cast<double>(n)) * (sup - mine);
    report.per_type[static_cast<std::size_t>(l)] = value;
    report.max_value = std::max(report.max_value, value);
  }
  return report;
}

RegretReport actual_payoff_regret_report(const PartialMonitorSession& session) {
  const long n = session.stage();
  if (n == 0) throw PreconditionError("empty history");
  const auto& grid = session.grid();
  std::vector<SimplexVector> responses = grid_mixtures(grid.response_grid);
  PenalizedValue pv(session.structure(), Valuation::worst_case);

  RegretReport report;
  report.per_type.assign(static_cast<std::size_t>(session.num_types()), 0.0);
  report.max_value = -1e300;
  for (int l = 0; l < session.num_types(); ++l) {
    long c = session.count(l);
    if (c == 0) continue;
    Vec mu = session.true_flag_average(l).data;
    double sup = -1e300;
    for (const SimplexVector& x : responses) sup = std::max(sup, pv.eval(x, mu));
    double value = (static_cast<double>(c) / static_cast<double>(n)) * (sup - session.payoff_average(l));
    report.per_type[static_cast<std::size_t>(l)] = value;
    report.max_value = std::max(report.max_value, value);
  }
  return report;
}

ExternalRegret external_regret_report(const PartialMonitorSession& session) {
  const long n = session.stage();
  if (n == 0) throw PreconditionError("empty history");
  const auto& grid = session.grid();
  std::vector<SimplexVector> responses = grid_mixtures(grid.response_grid);
  PenalizedValue pv(session.structure(), Valuation::worst_case);

  double overall_payoff = session.overall_payoff_average();
  Vec overall_mu = session.overall_flag_average().data;

  double sup_overall = -1e300;
  for (const SimplexVector& x : responses) sup_overall = std::max(sup_overall, pv.eval(x, overall_mu));

  double weighted_sups = 0.0;
  for (int l = 0; l < session.num_types(); ++l) {
    long c = session.count(l);
    if (c == 0) continue;
    Vec mu = session.true_flag_average(l).data;
    double sup = -1e300;
    for (const SimplexVector& x : responses) sup = std::max(sup, pv.eval(x, mu));
    weighted_sups += (static_cast<double>(c) / static_cast<double>(n)) * sup;
  }

  ExternalRegret out;
  out.regret = sup_overall - overall_payoff;
  out.bound = weighted_sups - overall_payoff;
  if (out.regret > out.bound + 1e-6) {
    throw std::logic_error("external regret exceeded its decomposition bound");
  }
  return out;
}

namespace {

// Stage-weighted positive actual-payoff regret of one session, the quantity
// the doubling trace accumulates across blocks.
double block_regret(const PartialMonitorSession& session, PenalizedValue& pv,
                    const std::vector<SimplexVector>& responses) {
  const long n = session.stage();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (int l = 0; l < session.num_types(); ++l) {
    long c = session.count(l);
    if (c == 0) continue;
    Vec mu = session.true_flag_average(l).data;
    double sup = -1e300;
    for (const SimplexVector& x : responses) sup = std::max(sup, pv.eval(x, mu));
    double value = sup - session.payoff_average(l);
    if (value > 0.0) total += (static_cast<double>(c) / static_cast<double>(n)) * value;
  }
  return total;
}

}  // namespace

MetricTrace run_doubling(const SignalStructure& structure, Valuation valuation,
                         const Adversary& adversary, long block_base, long total_steps,
                         std::uint64_t seed, long log_every) {
  if (block_base < 1) throw PreconditionError("block base must be positive");
  if (total_steps < 1) throw PreconditionError("steps must be positive");

  MetricTrace trace = MetricTrace::start("doubling", "", seed);
  trace.columns = {"cum_regret", "block", "epsilon_k", "block_end"};

  // Geometric block schedule, clamped to the horizon.
  std::vector<long> block_ends;
  {
    long acc = 0;
    long len = block_base;
    while (acc < total_steps) {
      acc = acc > total_steps - len ? total_steps : acc + len;
      block_ends.push_back(std::min(acc, total_steps));
      if (len > total_steps) break;
      len *= 4;
    }
    block_ends.back() = total_steps;
  }

  std::set<long> log_set;
  for (long v : log_stages(total_steps, log_every)) log_set.insert(v);
  for (long v : block_ends) log_set.insert(v);

  Rng rng(seed);
  std::vector<long> global_counts(static_cast<std::size_t>(structure.rows()), 0);
  double payoff_total = 0.0;
  Vec payoff_avg(1, 0.0);

  double completed_weight = 0.0;  // sum over closed blocks of stages * block regret
  double last_contribution = 0.0;
  long done = 0;
  int block = 1;
  bool frozen = false;
  int truncated_at = 0;
  double eps_k = 0.0;
  std::optional<BestResponseGrid> grid;
  std::optional<PartialMonitorSession> session;
  std::vector<SimplexVector> responses;
  std::optional<PenalizedValue> evaluator;

  while (done < total_steps) {
    if (!frozen) {
      double eps_candidate = std::pow(2.0, -static_cast<double>(block + 3));
      try {
        grid = build_br_grid(structure, valuation, eps_candidate);
        eps_k = eps_candidate;
        session.emplace(structure, *grid);
        responses = grid_mixtures(grid->response_grid);
        evaluator.emplace(structure, Valuation::worst_case);
      } catch (const GridBudgetError&) {
        if (!session) throw;  // nothing feasible at all
        frozen = true;
        truncated_at = block;
        // The previous session keeps running, so its closed-block
        // contribution comes back out of the completed pile.
        completed_weight -= last_contribution;
        --block;
      }
    }
    const long end_target = frozen ? total_steps
                                   : std::min(block_ends[static_cast<std::size_t>(block - 1)], total_steps);
    while (done < end_target) {
      ++done;
      AdversaryView view;
      view.stage = done - 1;
      view.player_counts = &global_counts;
      view.average_payoff = done == 1 ? nullptr : &payoff_avg;
      SimplexVector y = adversary(view, rng);
      if (y.dim() != structure.cols()) throw PreconditionError("adversary mixture dimension mismatch");

      auto step = session->begin_stage(rng);
      int j = sample_index(y.weights(), rng);
      int s = sample_index(structure.law(step.action, j), rng);
      double pay = structure.payoff(step.action, j);
      session->finish_stage(flag_of(structure, y), s, pay);

      global_counts[static_cast<std::size_t>(step.action)] += 1;
      payoff_total += pay;
      payoff_avg[0] = payoff_total / static_cast<double>(done);

      if (log_set.count(done)) {
        double current = block_regret(*session, *evaluator, responses);
        double cum = (completed_weight + static_cast<double>(session->stage()) * current) /
                     static_cast<double>(done);
        trace.append(done, {cum, static_cast<double>(block), eps_k,
                            done == end_target ? 1.0 : 0.0});
      }
    }
    if (done >= total_steps) break;
    last_contribution = static_cast<double>(session->stage()) *
                        block_regret(*session, *evaluator, responses);
    completed_weight += last_contribution;
    ++block;
  }

  trace.params["blocks"] = std::to_string(block);
  if (truncated_at > 0) trace.params["truncated_at_block"] = std::to_string(truncated_at);
  return trace;
}

}  // namespace orthant
