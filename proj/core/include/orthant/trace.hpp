#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "orthant/linalg.hpp"

namespace orthant {

// Metric log of one experiment run: metadata plus one row of named values
// per logged stage, with stage numbers strictly increasing.
struct MetricTrace {
  std::string command;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string build;  // git describe of the producing binary
  std::map<std::string, std::string> params;
  std::vector<std::string> columns;

  struct Row {
    long n = 0;
    Vec values;
    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;

  // Stamps command/scenario/seed and the build id.
  static MetricTrace start(std::string command, std::string scenario, std::uint64_t seed);

  // Throws unless n exceeds the previous row's stage and the value count
  // matches the column count.
  void append(long n, Vec values);

  // Value lookup by column name (tests and the CLI summary use it).
  double value(std::size_t row, const std::string& column) const;
  const Row& last() const;

  // "n,<col>,..." header plus one line per row, printed with %.17g so
  // identical runs serialize byte-identically.
  void write_csv(std::ostream& os) const;

  // First a metadata object, then one flat object per row.
  void write_jsonl(std::ostream& os) const;
  static MetricTrace read_jsonl(std::istream& is);

  bool operator==(const MetricTrace&) const = default;
};

// Stages at which run operations log: powers of two, multiples of `every`
// (default: steps/100 rounded up), and the final stage.
std::vector<long> log_stages(long steps, long every = 0);

}  // namespace orthant
