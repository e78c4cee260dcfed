#pragma once

#include <functional>
#include <vector>

#include "orthant/rng.hpp"
#include "orthant/simplex.hpp"

namespace orthant {

// What an opponent policy may look at before choosing its mixed action.
// Pointers are null when the quantity does not exist yet (stage 0) or is
// not public in the protocol at hand.
struct AdversaryView {
  long stage = 0;                                  // completed stages
  const std::vector<long>* player_counts = nullptr;  // our action counts so far
  const Vec* average_payoff = nullptr;             // running average payoff vector
};

// Opponent policies return a mixed action over their column set; runners
// sample the realized column from it. Deterministic policies just return a
// vertex. Randomized ones draw from the shared run stream, which keeps a
// whole experiment reproducible from one seed.
using Adversary = std::function<SimplexVector(const AdversaryView&, Rng&)>;

}  // namespace orthant
