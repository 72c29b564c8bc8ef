#pragma once

#include <string>
#include <vector>

#include "mirrornoise/table.hpp"

namespace mirrornoise {

struct PlotSpec {
  std::string x;
  std::vector<std::string> y;
  bool log_x = false;
  bool log_y = false;
  std::string title;
  int width = 640;
  int height = 420;
};

// Self-contained SVG: axes, ticks (decades on log axes), one polyline per
// y column, legend. Identical input gives identical bytes.
std::string emit_svg(const Table& t, const PlotSpec& spec);

}  // namespace mirrornoise
