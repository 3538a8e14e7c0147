#pragma once

// Minimal numeric CSV: a header row, comma separators, '.' decimals, LF line
// ends.  Lines starting with '#' are comments.  Numbers are written in the
// shortest form that parses back to the same double.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "ghssm/random.hpp"

namespace ghssm::io {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return {buf, res.ptr};
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Strict decimal parse; `where` prefixes the error message.
inline double parse_double(std::string_view text, const std::string& where) {
  const auto s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last)
    throw ParseError(where + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
  [[nodiscard]] bool has_column(std::string_view name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
};

/// Reads a numeric table.  Errors carry "<source>:<line>".
inline CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_fields(view);
    const std::string where = source + ":" + std::to_string(lineno);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw ParseError(where + ": empty column name");
        t.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f, where));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(source + ": missing header row");
  return t;
}

inline void write_provenance(std::ostream& out, std::uint64_t seed) {
  out << "# ghssm seed=" << seed << " generator=" << kGeneratorName << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw std::invalid_argument("write_csv: row width does not match header");
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

/// Scalar time series (time in seconds, value).
struct SeriesFile {
  std::vector<double> time;
  std::vector<double> value;

  [[nodiscard]] std::size_t size() const { return time.size(); }
  bool operator==(const SeriesFile&) const = default;
};

/// Picks "time" (or the first column) and "y"/"value"/"price" (or the second).
inline SeriesFile series_from_table(const CsvTable& t) {
  if (t.header.size() < 2) throw ParseError("series needs at least two columns");
  const std::size_t tc = t.has_column("time") ? t.column("time") : 0;
  std::size_t vc = tc == 0 ? 1 : 0;
  for (const char* name : {"y", "value", "price"})
    if (t.has_column(name)) {
      vc = t.column(name);
      break;
    }
  SeriesFile s;
  s.time.reserve(t.rows.size());
  s.value.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    s.time.push_back(r[tc]);
    s.value.push_back(r[vc]);
  }
  return s;
}

struct NormalizeReport {
  std::size_t out_of_order = 0;  // rows that arrived earlier than their predecessor
  std::size_t duplicates = 0;    // rows dropped for repeating a time stamp
};

/// Stable sort by time, then drop repeated time stamps (first one wins).
inline NormalizeReport normalize_series(SeriesFile& s) {
  NormalizeReport rep;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s.time[i] < s.time[i - 1]) ++rep.out_of_order;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.time[a] < s.time[b]; });
  SeriesFile out;
  for (std::size_t i : idx) {
    if (!out.time.empty() && s.time[i] == out.time.back()) {
      ++rep.duplicates;
      continue;
    }
    out.time.push_back(s.time[i]);
    out.value.push_back(s.value[i]);
  }
  s = std::move(out);
  return rep;
}

/// Rows 0, k, 2k, ... with times shifted so the first kept row is at 0.
inline SeriesFile downsample(const SeriesFile& s, std::size_t k) {
  if (k == 0) throw std::invalid_argument("downsample: k must be at least 1");
  SeriesFile out;
  if (s.size() == 0) return out;
  const double t0 = s.time.front();
  for (std::size_t i = 0; i < s.size(); i += k) {
    out.time.push_back(s.time[i] - t0);
    out.value.push_back(s.value[i]);
  }
  return out;
}

}  // namespace ghssm::io
