#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace orthant {

// Invalid arguments / misuse of a stateful protocol ("pending observation",
// "outcome out of range", ...).  Callers that feed garbage get this.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A combinatorial grid would exceed the point budget.
class GridBudgetError : public std::runtime_error {
 public:
  GridBudgetError(std::string what, double estimated_points)
      : std::runtime_error(std::move(what)), estimated_points(estimated_points) {}
  double estimated_points;
};

// An iterative solver ran out of iterations before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string what, double residual)
      : std::runtime_error(std::move(what)), residual(residual) {}
  double residual;
};

// The one-step zero-sum game of an approachability step has positive value:
// no mixed action keeps the payoff on the target side of the separating
// hyperplane.  Carries the violating opponent action.
class SeparationError : public std::runtime_error {
 public:
  SeparationError(std::string what, int witness_action, double margin)
      : std::runtime_error(std::move(what)),
        witness_action(witness_action),
        margin(margin) {}
  int witness_action;
  double margin;
};

// A forecast point has no response bringing the payoff close to the target:
// evidence that the target set is excludable.  Carries the witness point and
// the best distance any response achieved against it.
class ExcludabilityError : public std::runtime_error {
 public:
  ExcludabilityError(std::string what, std::vector<double> witness, double distance)
      : std::runtime_error(std::move(what)),
        witness(std::move(witness)),
        distance(distance) {}
  std::vector<double> witness;
  double distance;
};

// The sampled Lipschitz/mesh constants failed their spot verification.
class GridConstantsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace orthant
