#include "orthant/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "orthant/errors.hpp"

#ifndef ORTHANT_GIT_DESCRIBE
#define ORTHANT_GIT_DESCRIBE "unknown"
#endif

namespace orthant {

namespace {

// %.17g round-trips doubles exactly, so reruns with equal results produce
// byte-identical files.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MetricTrace MetricTrace::start(std::string command, std::string scenario, std::uint64_t seed) {
  MetricTrace t;
  t.command = std::move(command);
  t.scenario = std::move(scenario);
  t.seed = seed;
  t.build = ORTHANT_GIT_DESCRIBE;
  return t;
}

void MetricTrace::append(long n, Vec values) {
  if (!rows.empty() && n <= rows.back().n) {
    throw PreconditionError("trace stages must increase");
  }
  if (values.size() != columns.size()) {
    throw PreconditionError("trace row width does not match columns");
  }
  rows.push_back(Row{n, std::move(values)});
}

double MetricTrace::value(std::size_t row, const std::string& column) const {
  if (row >= rows.size()) throw PreconditionError("trace row out of range");
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw PreconditionError("unknown trace column: " + column);
  return rows[row].values[static_cast<std::size_t>(it - columns.begin())];
}

const MetricTrace::Row& MetricTrace::last() const {
  if (rows.empty()) throw PreconditionError("empty trace");
  return rows.back();
}

void MetricTrace::write_csv(std::ostream& os) const {
  os << "n";
  for (const auto& c : columns) os << "," << c;
  os << "\n";
  for (const auto& row : rows) {
    os << row.n;
    for (double v : row.values) os << "," << format_double(v);
    os << "\n";
  }
}

void MetricTrace::write_jsonl(std::ostream& os) const {
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["scenario"] = scenario;
  meta["seed"] = seed;
  meta["build"] = build;
  meta["params"] = params;
  meta["columns"] = columns;
  os << meta.dump() << "\n";
  for (const auto& row : rows) {
    nlohmann::ordered_json line;
    line["n"] = row.n;
    for (std::size_t c = 0; c < columns.size(); ++c) line[columns[c]] = row.values[c];
    os << line.dump() << "\n";
  }
}

MetricTrace MetricTrace::read_jsonl(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw PreconditionError("empty jsonl stream");
  MetricTrace t;
  try {
    auto meta = nlohmann::json::parse(line);
    t.command = meta.at("command").get<std::string>();
    t.scenario = meta.at("scenario").get<std::string>();
    t.seed = meta.at("seed").get<std::uint64_t>();
    t.build = meta.at("build").get<std::string>();
    t.params = meta.at("params").get<std::map<std::string, std::string>>();
    t.columns = meta.at("columns").get<std::vector<std::string>>();
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      auto obj = nlohmann::json::parse(line);
      Row row;
      row.n = obj.at("n").get<long>();
      row.values.reserve(t.columns.size());
      for (const auto& c : t.columns) row.values.push_back(obj.at(c).get<double>());
      t.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed trace jsonl: ") + e.what());
  }
  return t;
}

std::vector<long> log_stages(long steps, long every) {
  if (steps < 1) throw PreconditionError("steps must be positive");
  std::set<long> at;
  for (long p = 1; p <= steps; p *= 2) {
    at.insert(p);
    if (p > steps / 2) break;
  }
  long stride = every > 0 ? every : std::max<long>(1, steps / 100);
  for (long n = stride; n <= steps; n += stride) at.insert(n);
  at.insert(steps);
  return {at.begin(), at.end()};
}

}  // namespace orthant
