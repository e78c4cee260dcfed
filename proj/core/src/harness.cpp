#include "orthant/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "orthant/calibrate.hpp"
#include "orthant/convex.hpp"
#include "orthant/errors.hpp"
#include "orthant/regret.hpp"
#include "orthant/rng.hpp"

namespace orthant {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt17(v[i]);
  }
  return out;
}

struct AdversarySpec {
  std::string kind;
  std::vector<double> numbers;
};

AdversarySpec parse_spec(const std::string& spec) {
  AdversarySpec out;
  auto colon = spec.find(':');
  out.kind = spec.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::string rest = spec.substr(colon + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    auto comma = rest.find(',', pos);
    std::string token = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      out.numbers.push_back(v);
    } catch (const std::exception&) {
      throw PreconditionError("adversary: cannot parse number '" + token + "' in '" + spec + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.numbers.empty()) {
    throw PreconditionError("adversary: '" + spec + "' names parameters but carries none");
  }
  return out;
}

int parse_index(double v, int limit, const std::string& spec) {
  if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(limit)) {
    throw PreconditionError("adversary: index " + fmt17(v) + " out of range in '" + spec + "'");
  }
  return static_cast<int>(v);
}

// Empirical mixture of the opponent-visible action counts, uniform before
// any stage has been played.
SimplexVector empirical_mixture(const std::vector<long>* counts, int dim) {
  Vec w(static_cast<std::size_t>(dim), 1.0);
  if (counts) {
    long total = 0;
    for (long c : *counts) total += c;
    if (total > 0) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = static_cast<double>((*counts)[i]);
      }
    }
  }
  return SimplexVector::normalized(std::move(w));
}

// Greedy column against a vector game: pick the column pushing the updated
// running average farthest from the target.
std::function<int(const AdversaryView&)> approach_greedy(VectorPayoffGame game, ConvexTarget target) {
  return [game = std::move(game), target = std::move(target)](const AdversaryView& view) {
    SimplexVector x = empirical_mixture(view.player_counts, game.rows());
    const double n = static_cast<double>(view.stage);
    int best = 0;
    double best_d = -1.0;
    for (int j = 0; j < game.cols(); ++j) {
      Vec upd = expected_payoff_column(game, x, j);
      if (view.average_payoff) {
        for (std::size_t k = 0; k < upd.size(); ++k) {
          upd[k] = (n * (*view.average_payoff)[k] + upd[k]) / (n + 1.0);
        }
      }
      double d = target.distance(upd);
      if (d > best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  };
}

// Greedy column against a signal structure: minimize the learner's expected
// payoff under the empirical action mixture.
std::function<int(const AdversaryView&)> monitor_greedy(SignalStructure s) {
  return [s = std::move(s)](const AdversaryView& view) {
    SimplexVector x = empirical_mixture(view.player_counts, s.rows());
    int best = 0;
    double best_v = 1e300;
    for (int j = 0; j < s.cols(); ++j) {
      double v = 0.0;
      for (int i = 0; i < s.rows(); ++i) v += x[i] * s.payoff(i, j);
      if (v < best_v) {
        best_v = v;
        best = j;
      }
    }
    return best;
  };
}

// Outcome generators for the commands whose opponent emits a point of the
// outcome space rather than a game column.
struct OutcomeView {
  long stage = 0;
  const Vec* average_outcome = nullptr;
};
using OutcomeAdversary = std::function<Vec(const OutcomeView&, Rng&)>;

// Outcomes in the cube [-1, 1]^dim, for the bare regret engine.
OutcomeAdversary make_cube_adversary(const std::string& spec, int dim) {
  AdversarySpec parsed = parse_spec(spec);
  if (parsed.kind == "uniform") {
    return [dim](const OutcomeView&, Rng& rng) {
      Vec u(static_cast<std::size_t>(dim));
      for (double& v : u) v = 2.0 * rng.unit() - 1.0;
      return u;
    };
  }
  if (parsed.kind == "const") {
    if (static_cast<int>(parsed.numbers.size()) != dim) {
      throw PreconditionError("adversary: const wants " + std::to_string(dim) + " coordinates");
    }
    for (double v : parsed.numbers) {
      if (std::abs(v) > 1.0) throw PreconditionError("adversary: const coordinate outside [-1, 1]");
    }
    return [u = parsed.numbers](const OutcomeView&, Rng&) { return u; };
  }
  if (parsed.kind == "periodic") {
    // indices select cube corners by bit pattern
    const int corners = 1 << dim;
    std::vector<Vec> seq;
    for (double v : parsed.numbers) {
      int k = parse_index(v, corners, spec);
      Vec corner(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i) corner[static_cast<std::size_t>(i)] = (k >> i) & 1 ? 1.0 : -1.0;
      seq.push_back(std::move(corner));
    }
    return [seq](const OutcomeView& view, Rng&) {
      return seq[static_cast<std::size_t>(view.stage % static_cast<long>(seq.size()))];
    };
  }
  if (parsed.kind == "adaptive") {
    // corner opposite the running average outcome
    return [dim](const OutcomeView& view, Rng&) {
      Vec u(static_cast<std::size_t>(dim), 1.0);
      if (view.average_outcome) {
        for (std::size_t i = 0; i < u.size(); ++i) {
          u[i] = (*view.average_outcome)[i] > 0.0 ? -1.0 : 1.0;
        }
      }
      return u;
    };
  }
  throw PreconditionError("unknown adversary '" + parsed.kind +
                          "'; valid here: uniform, const:<coords>, periodic:<corners>, adaptive");
}

// Outcomes in the simplex Delta(S), for the calibrator.
OutcomeAdversary make_vertex_adversary(const std::string& spec, int outcomes) {
  AdversarySpec parsed = parse_spec(spec);
  if (parsed.kind == "uniform") {
    return [outcomes](const OutcomeView&, Rng& rng) {
      return SimplexVector::vertex(outcomes, sample_index(Vec(static_cast<std::size_t>(outcomes), 1.0), rng)).weights();
    };
  }
  if (parsed.kind == "iid") {
    if (static_cast<int>(parsed.numbers.size()) != outcomes) {
      throw PreconditionError("adversary: iid wants " + std::to_string(outcomes) + " probabilities");
    }
    SimplexVector p{Vec(parsed.numbers)};
    return [p, outcomes](const OutcomeView&, Rng& rng) {
      return SimplexVector::vertex(outcomes, sample_index(p.weights(), rng)).weights();
    };
  }
  if (parsed.kind == "const") {
    if (parsed.numbers.size() == 1) {
      Vec v = SimplexVector::vertex(outcomes, parse_index(parsed.numbers[0], outcomes, spec)).weights();
      return [v](const OutcomeView&, Rng&) { return v; };
    }
    if (static_cast<int>(parsed.numbers.size()) == outcomes) {
      Vec v = SimplexVector{Vec(parsed.numbers)}.weights();
      return [v](const OutcomeView&, Rng&) { return v; };
    }
    throw PreconditionError("adversary: const wants a vertex index or " + std::to_string(outcomes) +
                            " probabilities");
  }
  if (parsed.kind == "periodic") {
    std::vector<Vec> seq;
    for (double v : parsed.numbers) {
      seq.push_back(SimplexVector::vertex(outcomes, parse_index(v, outcomes, spec)).weights());
    }
    return [seq](const OutcomeView& view, Rng&) {
      return seq[static_cast<std::size_t>(view.stage % static_cast<long>(seq.size()))];
    };
  }
  if (parsed.kind == "adaptive") {
    // vertex the forecaster's running average likes least
    return [outcomes](const OutcomeView& view, Rng&) {
      int k = 0;
      if (view.average_outcome) {
        for (int i = 1; i < outcomes; ++i) {
          if ((*view.average_outcome)[static_cast<std::size_t>(i)] <
              (*view.average_outcome)[static_cast<std::size_t>(k)]) {
            k = i;
          }
        }
      }
      return SimplexVector::vertex(outcomes, k).weights();
    };
  }
  throw PreconditionError("unknown adversary '" + parsed.kind +
                          "'; valid here: uniform, iid:<p>, const:<k|p>, periodic:<k...>, adaptive");
}

std::string pick_scenario(const RunConfig& cfg, const std::vector<std::string>& valid) {
  std::string s = cfg.scenario.empty() ? valid.front() : cfg.scenario;
  for (const auto& v : valid) {
    if (s == v) return s;
  }
  std::string msg = "unknown scenario '" + s + "' for " + cfg.command + "; valid:";
  for (const auto& v : valid) msg += " " + v;
  throw PreconditionError(msg);
}

void stamp_common(MetricTrace& trace, const RunConfig& cfg) {
  trace.params["adversary"] = cfg.adversary;
  trace.params["steps"] = std::to_string(cfg.steps);
  trace.params["log_every"] = std::to_string(cfg.log_every);
}

MetricTrace run_internal_regret(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"cube3"});
  const int actions = 3;
  OutcomeAdversary adv = make_cube_adversary(cfg.adversary, actions);

  RegretEngine engine(actions, 1.0);
  Rng rng(cfg.seed);
  std::set<long> logs;
  for (long v : log_stages(cfg.steps, cfg.log_every)) logs.insert(v);

  MetricTrace trace = MetricTrace::start("internal-regret", scenario, cfg.seed);
  trace.columns = {"max_positive_regret"};

  Vec outcome_sum(static_cast<std::size_t>(actions), 0.0);
  Vec outcome_avg(static_cast<std::size_t>(actions), 0.0);
  for (long n = 1; n <= cfg.steps; ++n) {
    int action = sample_index(engine.next().weights(), rng);
    OutcomeView view{n - 1, n == 1 ? nullptr : &outcome_avg};
    Vec u = adv(view, rng);
    engine.update(action, u);
    axpy(outcome_sum, 1.0, u);
    for (std::size_t k = 0; k < outcome_avg.size(); ++k) {
      outcome_avg[k] = outcome_sum[k] / static_cast<double>(n);
    }
    if (logs.count(n)) trace.append(n, {engine.max_positive_regret()});
  }
  trace.params["actions"] = std::to_string(actions);
  return trace;
}

MetricTrace run_calibrate(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"simplex2", "simplex3"});
  const int outcomes = scenario == "simplex2" ? 2 : 3;
  OutcomeAdversary adv = make_vertex_adversary(cfg.adversary, outcomes);

  FiniteGrid grid = simplex_grid(outcomes, cfg.mesh);
  Calibrator cal(grid, 1.0);
  Rng rng(cfg.seed);
  std::set<long> logs;
  for (long v : log_stages(cfg.steps, cfg.log_every)) logs.insert(v);

  MetricTrace trace = MetricTrace::start("calibrate", scenario, cfg.seed);
  trace.columns = {"calibration_score", "epsilon_score", "identity_gap"};

  Vec outcome_sum(static_cast<std::size_t>(outcomes), 0.0);
  Vec outcome_avg(static_cast<std::size_t>(outcomes), 0.0);
  for (long n = 1; n <= cfg.steps; ++n) {
    cal.forecast(rng);
    OutcomeView view{n - 1, n == 1 ? nullptr : &outcome_avg};
    Vec s = adv(view, rng);
    cal.observe(s);
    axpy(outcome_sum, 1.0, s);
    for (std::size_t k = 0; k < outcome_avg.size(); ++k) {
      outcome_avg[k] = outcome_sum[k] / static_cast<double>(n);
    }
    if (logs.count(n)) {
      double score = cal.calibration_score();
      double eps_score = cal.epsilon_calibration_score(grid.mesh);
      double gap = std::abs(score - cal.engine().max_positive_regret());
      trace.append(n, {score, eps_score, gap});
    }
  }
  trace.params["mesh"] = fmt17(cfg.mesh);
  trace.params["grid_points"] = std::to_string(grid.size());
  return trace;
}

MetricTrace run_approach_blackwell(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"matching-pennies"});
  VectorPayoffGame game = matching_pennies_game();
  ConvexTarget target = ConvexTarget::point(Vec{0.0});
  Adversary adv = make_column_adversary(cfg.adversary, game.cols(), approach_greedy(game, target));
  MetricTrace trace = run_blackwell(game, target, adv, cfg.steps, cfg.seed, cfg.log_every);
  trace.scenario = scenario;
  return trace;
}

MetricTrace run_approach_calibrated(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"matching-pennies"});
  VectorPayoffGame game = matching_pennies_game();
  ConvexTarget target = ConvexTarget::point(Vec{0.0});
  BestResponseTable table = build_best_response_table(game, target, cfg.mesh, cfg.epsilon / 2.0);
  Adversary adv = make_column_adversary(cfg.adversary, game.cols(), approach_greedy(game, target));
  MetricTrace trace = run_calibrated_approach(game, target, table, adv, cfg.steps, cfg.seed, cfg.log_every);
  trace.scenario = scenario;
  trace.params["mesh"] = fmt17(cfg.mesh);
  trace.params["epsilon"] = fmt17(cfg.epsilon);
  trace.params["forecast_points"] = std::to_string(table.forecasts.size());
  return trace;
}

MetricTrace run_halfspace_cmd(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"matching-pennies"});
  VectorPayoffGame game = matching_pennies_game();
  std::vector<Halfspace> box{{Vec{1.0}, 0.0}};
  Adversary adv = make_column_adversary(cfg.adversary, game.cols(),
                                        approach_greedy(game, ConvexTarget::from_halfspaces(box)));
  MetricTrace trace = run_halfspace(game, box, adv, cfg.steps, cfg.seed, cfg.log_every);
  trace.scenario = scenario;
  return trace;
}

SignalStructure make_structure(const RunConfig& cfg, const std::string& scenario) {
  if (scenario == "label-efficient") {
    return label_efficient_structure(cfg.signal_a, cfg.signal_b, cfg.signal_c);
  }
  return matching_pennies_dark_structure(cfg.signal_c);
}

void stamp_signals(MetricTrace& trace, const RunConfig& cfg, const std::string& scenario) {
  if (scenario == "label-efficient") {
    trace.params["signal_a"] = join(cfg.signal_a);
    trace.params["signal_b"] = join(cfg.signal_b);
  }
  trace.params["signal_c"] = join(cfg.signal_c);
}

MetricTrace run_partial_monitor(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"label-efficient", "matching-pennies-dark"});
  SignalStructure structure = make_structure(cfg, scenario);
  Adversary adv = make_column_adversary(cfg.adversary, structure.cols(), monitor_greedy(structure));

  BestResponseGrid grid = build_br_grid(structure, Valuation::worst_case, cfg.epsilon);
  if (cfg.eta > 0.0) grid.eta = cfg.eta;
  PartialMonitorSession session(structure, grid);

  Rng rng(cfg.seed);
  std::set<long> logs;
  for (long v : log_stages(cfg.steps, cfg.log_every)) logs.insert(v);

  MetricTrace trace = MetricTrace::start("partial-monitor", scenario, cfg.seed);
  trace.columns = {"external", "external_bound", "actual_max", "int_true_max", "int_est_max", "types_used"};

  std::vector<long> counts(static_cast<std::size_t>(structure.rows()), 0);
  double payoff_total = 0.0;
  Vec payoff_avg(1, 0.0);
  for (long n = 1; n <= cfg.steps; ++n) {
    AdversaryView view;
    view.stage = n - 1;
    view.player_counts = &counts;
    view.average_payoff = n == 1 ? nullptr : &payoff_avg;
    SimplexVector y = adv(view, rng);
    if (y.dim() != structure.cols()) throw PreconditionError("adversary mixture dimension mismatch");

    auto step = session.begin_stage(rng);
    int j = sample_index(y.weights(), rng);
    int s = sample_index(structure.law(step.action, j), rng);
    double pay = structure.payoff(step.action, j);
    session.finish_stage(flag_of(structure, y), s, pay);

    counts[static_cast<std::size_t>(step.action)] += 1;
    payoff_total += pay;
    payoff_avg[0] = payoff_total / static_cast<double>(n);

    if (logs.count(n)) {
      ExternalRegret ext = external_regret_report(session);
      RegretReport actual = actual_payoff_regret_report(session);
      RegretReport int_true = internal_regret_report(session, Valuation::worst_case, true);
      RegretReport int_est = internal_regret_report(session, Valuation::worst_case, false);
      long used = 0;
      for (int l = 0; l < session.num_types(); ++l) {
        if (session.count(l) > 0) ++used;
      }
      trace.append(n, {ext.regret, ext.bound, actual.max_value, int_true.max_value,
                       int_est.max_value, static_cast<double>(used)});
    }
  }
  trace.params["epsilon"] = fmt17(cfg.epsilon);
  trace.params["eta"] = fmt17(grid.eta);
  trace.params["types"] = std::to_string(session.num_types());
  stamp_signals(trace, cfg, scenario);
  return trace;
}

MetricTrace run_doubling_cmd(const RunConfig& cfg) {
  std::string scenario = pick_scenario(cfg, {"matching-pennies-dark", "label-efficient"});
  SignalStructure structure = make_structure(cfg, scenario);
  Adversary adv = make_column_adversary(cfg.adversary, structure.cols(), monitor_greedy(structure));
  MetricTrace trace = run_doubling(structure, Valuation::worst_case, adv, cfg.block_base,
                                   cfg.steps, cfg.seed, cfg.log_every);
  trace.scenario = scenario;
  trace.params["block_base"] = std::to_string(cfg.block_base);
  stamp_signals(trace, cfg, scenario);
  return trace;
}

}  // namespace

VectorPayoffGame matching_pennies_game() {
  std::vector<std::vector<Vec>> payoff{{Vec{1.0}, Vec{-1.0}}, {Vec{-1.0}, Vec{1.0}}};
  return VectorPayoffGame(std::move(payoff));
}

SignalStructure label_efficient_structure(const Vec& a, const Vec& b, const Vec& c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw PreconditionError("signal symbols must share one alphabet");
  }
  Matrix payoff(3, 2);
  payoff(0, 0) = 0.0;
  payoff(0, 1) = 0.0;
  payoff(1, 0) = 0.0;
  payoff(1, 1) = 1.0;
  payoff(2, 0) = 1.0;
  payoff(2, 1) = 0.0;
  std::vector<std::vector<Vec>> laws{{a, b}, {c, c}, {c, c}};
  return SignalStructure(std::move(payoff), std::move(laws));
}

SignalStructure matching_pennies_dark_structure(const Vec& c) {
  Matrix payoff(2, 2);
  payoff(0, 0) = 1.0;
  payoff(0, 1) = -1.0;
  payoff(1, 0) = -1.0;
  payoff(1, 1) = 1.0;
  std::vector<std::vector<Vec>> laws{{c, c}, {c, c}};
  return SignalStructure(std::move(payoff), std::move(laws));
}

Adversary make_column_adversary(const std::string& spec, int cols,
                                std::function<int(const AdversaryView&)> greedy) {
  AdversarySpec parsed = parse_spec(spec);
  if (parsed.kind == "uniform") {
    return [cols](const AdversaryView&, Rng&) { return SimplexVector::uniform(cols); };
  }
  if (parsed.kind == "iid") {
    if (static_cast<int>(parsed.numbers.size()) != cols) {
      throw PreconditionError("adversary: iid wants " + std::to_string(cols) + " probabilities");
    }
    SimplexVector p{Vec(parsed.numbers)};
    return [p](const AdversaryView&, Rng&) { return p; };
  }
  if (parsed.kind == "const") {
    if (parsed.numbers.size() == 1) {
      SimplexVector v = SimplexVector::vertex(cols, parse_index(parsed.numbers[0], cols, spec));
      return [v](const AdversaryView&, Rng&) { return v; };
    }
    if (static_cast<int>(parsed.numbers.size()) == cols) {
      SimplexVector v{Vec(parsed.numbers)};
      return [v](const AdversaryView&, Rng&) { return v; };
    }
    throw PreconditionError("adversary: const wants a column index or " + std::to_string(cols) +
                            " probabilities");
  }
  if (parsed.kind == "periodic") {
    std::vector<SimplexVector> seq;
    for (double v : parsed.numbers) {
      seq.push_back(SimplexVector::vertex(cols, parse_index(v, cols, spec)));
    }
    return [seq](const AdversaryView& view, Rng&) {
      return seq[static_cast<std::size_t>(view.stage % static_cast<long>(seq.size()))];
    };
  }
  if (parsed.kind == "adaptive") {
    if (!greedy) throw PreconditionError("adversary 'adaptive' is not available for this command");
    return [greedy = std::move(greedy), cols](const AdversaryView& view, Rng&) {
      return SimplexVector::vertex(cols, greedy(view));
    };
  }
  throw PreconditionError("unknown adversary '" + parsed.kind +
                          "'; valid: uniform, const:<j|p>, iid:<p>, periodic:<j...>, adaptive");
}

MetricTrace run_experiment(const RunConfig& cfg) {
  if (cfg.steps < 1) throw PreconditionError("steps must be positive");
  if (cfg.log_every < 0) throw PreconditionError("log-every must be nonnegative");
  if (cfg.format != "csv" && cfg.format != "jsonl") {
    throw PreconditionError("unknown format '" + cfg.format + "'; valid: csv, jsonl");
  }
  if (!(cfg.mesh > 0.0)) throw PreconditionError("mesh must be positive");
  if (!(cfg.epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  if (cfg.eta < 0.0 || cfg.eta > 1.0) throw PreconditionError("eta must be in [0, 1]");
  if (cfg.block_base < 1) throw PreconditionError("block-base must be positive");

  MetricTrace trace = [&] {
    if (cfg.command == "internal-regret") return run_internal_regret(cfg);
    if (cfg.command == "calibrate") return run_calibrate(cfg);
    if (cfg.command == "approach-blackwell") return run_approach_blackwell(cfg);
    if (cfg.command == "approach-calibrated") return run_approach_calibrated(cfg);
    if (cfg.command == "halfspace") return run_halfspace_cmd(cfg);
    if (cfg.command == "partial-monitor") return run_partial_monitor(cfg);
    if (cfg.command == "doubling") return run_doubling_cmd(cfg);
    throw PreconditionError(
        "unknown command '" + cfg.command +
        "'; valid: internal-regret, calibrate, approach-blackwell, approach-calibrated, "
        "halfspace, partial-monitor, doubling");
  }();

  stamp_common(trace, cfg);

  if (!cfg.out.empty()) export_trace(trace, cfg.out, cfg.format);
  return trace;
}

void write_trace(const MetricTrace& trace, const std::string& format, std::ostream& os) {
  if (format == "csv") {
    trace.write_csv(os);
  } else if (format == "jsonl") {
    trace.write_jsonl(os);
  } else {
    throw PreconditionError("unknown format '" + format + "'; valid: csv, jsonl");
  }
}

void export_trace(const MetricTrace& trace, const std::string& path, const std::string& format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trace(trace, format, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace orthant
