#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "orthant/adversary.hpp"
#include "orthant/approach.hpp"
#include "orthant/partial_monitoring.hpp"
#include "orthant/trace.hpp"

namespace orthant {

// One experiment, fully specified; mirrors the CLI flags one to one. The
// same config always reproduces the same trace byte for byte.
struct RunConfig {
  std::string command;            // internal-regret, calibrate, approach-blackwell,
                                  // approach-calibrated, halfspace, partial-monitor, doubling
  std::string scenario;           // empty picks the command's default scenario
  std::string adversary = "uniform";
  std::string out;                // empty = no file export
  std::string format = "csv";    // csv | jsonl
  long steps = 1000;
  std::uint64_t seed = 1;
  double mesh = 0.1;              // forecast / calibrator grid mesh
  double epsilon = 0.1;           // tolerance driving table and grid construction
  double eta = 0.0;               // perturbation override for partial monitoring; 0 = derived
  long log_every = 0;             // extra logging stride; 0 = steps / 100
  long block_base = 100;          // first block length of the doubling schedule
  Vec signal_a = {1.0, 0.0};      // label-efficient signal symbols over {s1, s2}
  Vec signal_b = {0.0, 1.0};
  Vec signal_c = {0.5, 0.5};
};

// The two-action game paying +1 on a match and -1 otherwise, as a
// one-dimensional vector game; the average payoff should approach {0}.
VectorPayoffGame matching_pennies_game();

// Three own actions (observe, guess-good, guess-bad) against two states.
// Observing pays nothing but reveals the state through the signal (symbol a
// under the first state, b under the second); guessing pays 1 on the wrong
// guess and 0 on the right one while the signal degenerates to c.
SignalStructure label_efficient_structure(const Vec& a, const Vec& b, const Vec& c);

// The matching game with every signal equal to c: payoffs stay +1/-1 but
// nothing about the opponent is ever observable.
SignalStructure matching_pennies_dark_structure(const Vec& c);

// Mixed-column adversary from a spec string: "uniform", "const:j",
// "iid:p1,...,pk", "periodic:j1,j2,...", or "adaptive". Adaptive play needs
// command context, so the caller passes the greedy column chooser; commands
// without one reject the spec.
Adversary make_column_adversary(const std::string& spec, int cols,
                                std::function<int(const AdversaryView&)> greedy = {});

// Validates the config, builds the scenario and adversary, runs the command,
// and returns the trace with scenario name and effective parameters filled
// in. Config mistakes throw PreconditionError with the offending field in
// the message.
MetricTrace run_experiment(const RunConfig& config);

// Serializes the trace as "csv" or "jsonl".
void write_trace(const MetricTrace& trace, const std::string& format, std::ostream& os);

// Same through a file; open and write failures throw std::runtime_error
// naming the path.
void export_trace(const MetricTrace& trace, const std::string& path, const std::string& format);

}  // namespace orthant
