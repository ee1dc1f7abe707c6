#pragma once

// Tabular output: CSV (RFC-4180-style quoting) and JSON (rows array plus a
// meta block echoing the config hash, seed and version). Doubles print with
// round-trip precision so identical runs produce byte-identical files.

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "uavmeta/version.hpp"

namespace uavmeta {

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // ordered

  void add_meta(const std::string& k, const std::string& v) {
    meta.emplace_back(k, v);
  }
};

namespace detail_out {

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string cell_to_string(const Cell& c) {
  if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
  if (std::holds_alternative<long>(c)) return std::to_string(std::get<long>(c));
  return std::get<std::string>(c);
}

}  // namespace detail_out

inline void write_csv(const Table& t, std::ostream& out) {
  for (const auto& [k, v] : t.meta)
    out << "# " << k << ": " << v << "\n";
  for (size_t i = 0; i < t.columns.size(); ++i)
    out << (i ? "," : "") << detail_out::csv_escape(t.columns[i]);
  out << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "")
          << detail_out::csv_escape(detail_out::cell_to_string(row[i]));
    out << "\n";
  }
}

inline void write_json(const Table& t, std::ostream& out) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json meta;
  meta["version"] = kVersion;
  for (const auto& [k, v] : t.meta) meta[k] = v;
  j["meta"] = meta;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (size_t i = 0; i < row.size() && i < t.columns.size(); ++i) {
      const Cell& c = row[i];
      if (std::holds_alternative<double>(c))
        obj[t.columns[i]] = std::get<double>(c);
      else if (std::holds_alternative<long>(c))
        obj[t.columns[i]] = std::get<long>(c);
      else
        obj[t.columns[i]] = std::get<std::string>(c);
    }
    rows.push_back(obj);
  }
  j["rows"] = rows;
  out << j.dump(2) << "\n";
}

}  // namespace uavmeta
