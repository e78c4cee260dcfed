#include "orthant/regret.hpp"

#include <cmath>

#include "orthant/errors.hpp"

namespace orthant {

namespace {

// Residual of the defining equation for lambda on the source matrix A.
double defining_residual(const Vec& lambda, const Matrix& a) {
  const int c = a.rows();
  double worst = 0.0;
  for (int i = 0; i < c; ++i) {
    double in = 0.0, out = 0.0;
    for (int j = 0; j < c; ++j) {
      in += lambda[j] * a(j, i);
      out += a(i, j);
    }
    worst = std::max(worst, std::abs(in - lambda[i] * out));
  }
  return worst;
}

// Basis of the null space of a square matrix, by Gaussian elimination with
// partial pivoting.  Pivots below `piv_tol` count as zero.
std::vector<Vec> null_space(Matrix m, double piv_tol) {
  const int c = m.rows();
  std::vector<int> pivot_col_of_row(c, -1);
  std::vector<bool> is_pivot_col(c, false);
  int row = 0;
  for (int col = 0; col < c && row < c; ++col) {
    int best = row;
    for (int r = row + 1; r < c; ++r)
      if (std::abs(m(r, col)) > std::abs(m(best, col))) best = r;
    if (std::abs(m(best, col)) <= piv_tol) continue;  // free column
    if (best != row)
      for (int j = 0; j < c; ++j) std::swap(m(row, j), m(best, j));
    const double p = m(row, col);
    for (int r = 0; r < c; ++r) {
      if (r == row) continue;
      const double f = m(r, col) / p;
      if (f == 0.0) continue;
      for (int j = 0; j < c; ++j) m(r, j) -= f * m(row, j);
      m(r, col) = 0.0;
    }
    pivot_col_of_row[row] = col;
    is_pivot_col[col] = true;
    ++row;
  }

  std::vector<Vec> basis;
  for (int f = 0; f < c; ++f) {
    if (is_pivot_col[f]) continue;
    Vec v(c, 0.0);
    v[f] = 1.0;
    for (int r = 0; r < row; ++r) {
      const int pc = pivot_col_of_row[r];
      v[pc] = -m(r, f) / m(r, pc);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

InvariantProbability invariant_probability(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw PreconditionError("invariant_probability: matrix must be square and nonempty");
  const int c = a.rows();
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      if (a(i, j) < 0.0) throw PreconditionError("matrix not nonnegative");

  InvariantProbability out{SimplexVector::uniform(c), 0.0, false};

  // kappa: largest off-diagonal row mass.  Zero means no mass ever moves
  // between actions, and uniform satisfies the equation exactly.
  double kappa = 0.0;
  for (int i = 0; i < c; ++i) {
    double s = 0.0;
    for (int j = 0; j < c; ++j)
      if (j != i) s += a(i, j);
    kappa = std::max(kappa, s);
  }
  if (kappa == 0.0) {
    out.residual = defining_residual(out.distribution.weights(), a);
    return out;
  }

  // M = A/kappa off the diagonal, remainder on the diagonal; then the
  // invariant equation is lambda (M - I) = 0, i.e. (M - I)^T lambda = 0.
  Matrix mt(c, c);
  for (int i = 0; i < c; ++i) {
    double off = 0.0;
    for (int j = 0; j < c; ++j)
      if (j != i) off += a(i, j) / kappa;
    for (int j = 0; j < c; ++j)
      mt(j, i) = (i == j) ? -off : a(i, j) / kappa;  // transposed store
  }

  const std::vector<Vec> basis = null_space(mt, 1e-12);
  const double scale = a.max_abs();
  const SimplexVector* best = nullptr;
  SimplexVector candidate = SimplexVector::uniform(c);
  double best_norm = 0.0, best_res = 0.0;
  for (const Vec& v : basis) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (std::abs(sum) < 1e-12) continue;
    Vec lam(c);
    bool ok = true;
    for (int i = 0; i < c; ++i) {
      lam[i] = v[i] / sum;
      if (lam[i] < -1e-9) {
        ok = false;
        break;
      }
      lam[i] = std::max(lam[i], 0.0);
    }
    if (!ok) continue;
    const double res = defining_residual(lam, a);
    if (res > 1e-9 * std::max(scale, 1e-300)) continue;
    const double n2 = norm2(lam);
    if (!best || n2 < best_norm) {
      candidate = SimplexVector::normalized(std::move(lam));
      best = &candidate;
      best_norm = n2;
      best_res = res;
    }
  }
  if (best) {
    out.distribution = candidate;
    out.residual = best_res;
    return out;
  }

  // Elimination produced no usable distribution (heavily reducible or
  // ill-conditioned input): damped power iteration.  The damping
  // M' = 0.99 M + 0.01 I keeps the invariant set unchanged while making
  // every chain aperiodic.
  Vec lam(c, 1.0 / c);
  Vec next(c);
  for (int it = 0; it < 10000; ++it) {
    for (int i = 0; i < c; ++i) {
      // next = lam * M', using mt which stores (M - I)^T off-diagonal parts
      double s = 0.0;
      for (int j = 0; j < c; ++j) s += lam[j] * mt(i, j);
      next[i] = lam[i] + 0.99 * s;  // lam (I + 0.99 (M - I))
    }
    double total = 0.0;
    for (double x : next) total += x < 0 ? 0.0 : x;
    for (int i = 0; i < c; ++i) lam[i] = next[i] < 0 ? 0.0 : next[i] / total;
  }
  out.distribution = SimplexVector::normalized(lam);
  out.residual = defining_residual(out.distribution.weights(), a);
  out.used_power_iteration = true;
  return out;
}

Matrix instant_regret(int action, const OutcomeVector& outcome) {
  const int c = static_cast<int>(outcome.size());
  if (action < 0 || action >= c) throw PreconditionError("instant_regret: action out of range");
  Matrix r(c, c);
  for (int j = 0; j < c; ++j) r(action, j) = outcome[j] - outcome[action];
  return r;
}

RegretEngine::RegretEngine(int num_actions, double outcome_bound)
    : c_(num_actions), bound_(outcome_bound), cum_(num_actions, num_actions) {
  if (c_ <= 0) throw PreconditionError("RegretEngine: need at least one action");
  if (!(bound_ > 0.0)) throw PreconditionError("RegretEngine: outcome bound must be positive");
  counts_.assign(c_, 0);
  outcome_sums_.assign(c_, Vec(c_, 0.0));
}

const SimplexVector& RegretEngine::next() const {
  if (lambda_) return *lambda_;
  if (n_ == 0) {
    lambda_ = SimplexVector::uniform(c_);
    return *lambda_;
  }
  Matrix pos(c_, c_);
  bool any = false;
  for (int i = 0; i < c_; ++i)
    for (int j = 0; j < c_; ++j) {
      const double v = cum_(i, j);
      if (v > 0.0) {
        pos(i, j) = v / n_;
        any = true;
      }
    }
  lambda_ = any ? invariant_probability(pos).distribution : SimplexVector::uniform(c_);
  return *lambda_;
}

void RegretEngine::update(int action, const OutcomeVector& outcome) {
  if (action < 0 || action >= c_) throw PreconditionError("engine update: action out of range");
  if (static_cast<int>(outcome.size()) != c_)
    throw PreconditionError("engine update: outcome dimension mismatch");
  for (double u : outcome)
    if (std::abs(u) > bound_ * (1.0 + 1e-12) + 1e-12)
      throw PreconditionError("outcome out of range");

  ++n_;
  ++counts_[action];
  axpy(outcome_sums_[action], 1.0, outcome);
  double* row = cum_.row(action);
  const double base = outcome[action];
  for (int j = 0; j < c_; ++j) row[j] += outcome[j] - base;
  lambda_.reset();
}

double RegretEngine::max_positive_regret() const {
  if (n_ == 0) throw PreconditionError("empty history");
  double m = 0.0;
  for (double v : cum_.data()) m = std::max(m, v);
  return m / n_;
}

Matrix RegretEngine::average_regret() const {
  Matrix r(c_, c_);
  if (n_ == 0) return r;
  for (int i = 0; i < c_; ++i)
    for (int j = 0; j < c_; ++j) r(i, j) = cum_(i, j) / n_;
  return r;
}

long RegretEngine::count(int action) const {
  if (action < 0 || action >= c_) throw PreconditionError("count: action out of range");
  return counts_[action];
}

Vec RegretEngine::average_outcome(int action) const {
  if (action < 0 || action >= c_) throw PreconditionError("average_outcome: action out of range");
  Vec avg = outcome_sums_[action];
  if (counts_[action] > 0) scale(avg, 1.0 / counts_[action]);
  return avg;
}

}  // namespace orthant
