#pragma once

// Result envelope: config echo, tool version, seed, wall clock and the
// payload tables, with JSON, CSV and SVG emitters.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nillab/cli/config.hpp"
#include "nillab/cli/json.hpp"

namespace nillab::cli {

/// A table cell. Non-finite doubles are written as JSON null / empty CSV fields.
using Value = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  /// Appends a row; throws std::invalid_argument on a column-count mismatch.
  void add(std::vector<Value> row);
  /// Index of a column; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
  /// Numeric cell (int or double) by row and column name.
  double number(std::size_t row, std::string_view column) const;
};

struct ResultEnvelope {
  RunConfig config;
  std::string tool_version;
  std::string command;
  std::uint64_t seed = 0;
  double wall_clock_seconds = 0.0;
  std::vector<Table> tables;

  /// Throws std::out_of_range when no table has this name.
  const Table& table(std::string_view name) const;
};

std::string_view tool_version();

json to_json(const Value& v);
json to_json(const Table& t);
json to_json(const ResultEnvelope& env);
/// Only the tables, keyed by name; what reruns must reproduce.
json payload_json(const ResultEnvelope& env);

/// Inverse of to_json. Throws std::invalid_argument on a malformed document.
ResultEnvelope envelope_from_json(const json& j);

/// Same config, version, command, seed, wall clock and byte-identical payload.
bool operator==(const ResultEnvelope& a, const ResultEnvelope& b);

/// Number formatting shared by the JSON and CSV writers (shortest round-trip).
std::string format_number(double v);

/// RFC 4180: header row, CRLF line ends, fields quoted when needed.
std::string to_csv(const Table& t);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string name;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log2_x = false;
  std::vector<Series> series;
};

/// Standalone SVG 1.1 document with one polyline per series.
std::string to_svg(const Chart& c);

}  // namespace nillab::cli
