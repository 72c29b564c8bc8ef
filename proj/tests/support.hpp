#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "mirrornoise/netlist.hpp"
#include "mirrornoise/oracles.hpp"
#include "mirrornoise/units.hpp"

namespace mntest {

inline double rel(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline mirrornoise::Circuit parse_ok(const std::string& text) {
  auto r = mirrornoise::parse_netlist(text);
  if (!r.circuit) {
    std::string msg = "netlist failed to parse:";
    for (const auto& d : r.diagnostics) msg += "\n  " + mirrornoise::format_diagnostic(d, "<test>");
    throw std::runtime_error(msg);
  }
  return *r.circuit;
}

// Mirrored branch written by hand: a device sized to the requested gm at a
// moderate inversion level, its degeneration resistor, and the load. The
// diode side is left out of the noise count by the directive.
inline std::string mirror_netlist(double gm, double r_de, double r_d) {
  const auto s = mirrornoise::size_for_gm(gm, 0.5, 1e-6, {});
  const std::string w = num(s.width), id = num(s.id);
  std::string t = "* hand mirror\n";
  t += "IREF vdd g DC=" + id + " AC=1\n";
  t += "VDD vdd 0 DC=0.8\n";
  if (r_de > 0) {
    t += "M3M g g sm sm W=" + w + " L=1u ID=" + id + "\n";
    t += "RDEM sm 0 " + num(r_de) + "\n";
    t += "M3 d g s3 s3 W=" + w + " L=1u ID=" + id + "\n";
    t += "RDE s3 0 " + num(r_de) + "\n";
  } else {
    t += "M3M g g 0 0 W=" + w + " L=1u ID=" + id + "\n";
    t += "M3 d g 0 0 W=" + w + " L=1u ID=" + id + "\n";
  }
  t += "RD vdd d " + num(r_d) + "\n";
  t += r_de > 0 ? ".noise out=d in=IREF exclude=M3M,RDEM\n" : ".noise out=d in=IREF exclude=M3M\n";
  t += ".end\n";
  return t;
}

}  // namespace mntest
