#include "mirrornoise/table.hpp"

#include <cmath>
#include <cstdio>

#include "mirrornoise/error.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

int Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> Table::column(std::string_view name) const {
  const int idx = column_index(name);
  if (idx < 0) throw Error(ErrorKind::Usage, "no column '" + std::string(name) + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(idx)]);
  return out;
}

std::string write_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  char buf[64];
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12e", r[i]);
      if (i) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Table read_csv(std::string_view text) {
  Table t;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.columns.empty()) {
      for (auto c : cells) {
        if (c.empty()) throw Error(ErrorKind::Parse, "csv line 1: empty column name");
        t.columns.emplace_back(c);
      }
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(t.columns.size()) + " fields");
    }
    std::vector<double> row;
    for (auto c : cells) {
      auto v = parse_eng(c);
      if (!v && (c == "nan" || c == "inf" || c == "-inf")) v = c == "nan" ? NAN : (c == "inf" ? INFINITY : -INFINITY);
      if (!v) throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": bad number '" + std::string(c) + "'");
      row.push_back(*v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw Error(ErrorKind::Parse, "csv: missing header");
  return t;
}

}  // namespace mirrornoise
