#include "nillab/cli/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nillab::cli {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Value value_from_json(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw std::invalid_argument("table cells must be scalars");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

void Table::add(std::vector<Value> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("table '" + name + "': row has " + std::to_string(row.size()) +
                                " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw std::out_of_range("table '" + name + "' has no column '" + std::string(col) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double Table::number(std::size_t row, std::string_view col) const {
  const Value& v = rows.at(row).at(column(col));
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw std::invalid_argument("cell '" + std::string(col) + "' is not numeric");
}

const Table& ResultEnvelope::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no table named '" + std::string(name) + "'");
}

std::string_view tool_version() { return NILLAB_VERSION; }

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  return json(v).dump();
}

json to_json(const Value& v) {
  return std::visit(Overloaded{
                        [](std::int64_t i) { return json(i); },
                        [](double d) { return std::isfinite(d) ? json(d) : json(nullptr); },
                        [](const std::string& s) { return json(s); },
                        [](bool b) { return json(b); },
                    },
                    v);
}

json to_json(const Table& t) {
  json j;
  j["columns"] = t.columns;
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (const auto& c : r) row.push_back(to_json(c));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

json payload_json(const ResultEnvelope& env) {
  json p = json::object();
  for (const auto& t : env.tables) p[t.name] = to_json(t);
  return p;
}

json to_json(const ResultEnvelope& env) {
  json j;
  j["tool"] = "nillab";
  j["tool_version"] = env.tool_version;
  j["command"] = env.command;
  j["seed"] = env.seed;
  j["wall_clock_seconds"] = env.wall_clock_seconds;
  j["config"] = to_json(env.config);
  j["payload"] = payload_json(env);
  return j;
}

ResultEnvelope envelope_from_json(const json& j) {
  try {
    ResultEnvelope env;
    env.tool_version = j.at("tool_version").get<std::string>();
    env.command = j.at("command").get<std::string>();
    env.seed = j.at("seed").get<std::uint64_t>();
    env.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    env.config = config_from_json(j.at("config"));
    for (const auto& [name, body] : j.at("payload").items()) {
      Table t;
      t.name = name;
      t.columns = body.at("columns").get<std::vector<std::string>>();
      for (const auto& row : body.at("rows")) {
        std::vector<Value> cells;
        for (const auto& c : row) cells.push_back(value_from_json(c));
        t.add(std::move(cells));
      }
      env.tables.push_back(std::move(t));
    }
    return env;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result envelope: ") + e.what());
  }
}

bool operator==(const ResultEnvelope& a, const ResultEnvelope& b) {
  return a.config == b.config && a.tool_version == b.tool_version && a.command == b.command &&
         a.seed == b.seed && a.wall_clock_seconds == b.wall_clock_seconds &&
         payload_json(a).dump() == payload_json(b).dump();
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(t.columns[i]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += std::visit(Overloaded{
                            [](std::int64_t v) { return std::to_string(v); },
                            [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); },
                            [](const std::string& s) { return csv_field(s); },
                            [](bool b) { return std::string(b ? "true" : "false"); },
                        },
                        row[i]);
    }
    out += "\r\n";
  }
  return out;
}

std::string to_svg(const Chart& c) {
  constexpr double W = 640, H = 400, left = 70, right = 150, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  auto xv = [&](double x) { return c.log2_x ? std::log2(x) : x; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = -x0;
  for (const auto& s : c.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (c.log2_x && !(s.x[i] > 0.0))) continue;
      x0 = std::min(x0, xv(s.x[i]));
      x1 = std::max(x1, xv(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double x) { return left + (xv(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << xml_escape(c.title) << "</text>\n"
     << "<g stroke=\"black\" stroke-width=\"1\">\n"
     << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
     << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double sx = left + pw * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double sy = top + ph * (1.0 - i / 4.0);
    os << "<line x1=\"" << fixed(sx) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(sx) << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fixed(sx) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << xml_escape(c.log2_x ? "2^" + tick_label(fx) : tick_label(fx)) << "</text>\n"
       << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(sy) << "\" x2=\"" << left << "\" y2=\"" << fixed(sy)
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy + 4) << "\" text-anchor=\"end\">" << tick_label(fy)
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
     << xml_escape(c.x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << top + ph / 2 << ")\">" << xml_escape(c.y_label) << "</text>\n</g>\n";

  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const auto& s = c.series[k];
    const char* color = colors[k % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (c.log2_x && !(s.x[i] > 0.0))) continue;
      os << (first ? "" : " ") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << W - right + 35 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace nillab::cli
