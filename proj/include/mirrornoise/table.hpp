#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mirrornoise {

// Column-major numeric table; the unit of exchange between analyses,
// CSV files and plots.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(std::string_view name) const;  // -1 if absent
  std::vector<double> column(std::string_view name) const;  // throws Usage if absent
};

// Header row, then one row per record with every value as %.12e.
std::string write_csv(const Table& t);
// Strict reader for the format above (any numeric text accepted).
Table read_csv(std::string_view text);

}  // namespace mirrornoise
