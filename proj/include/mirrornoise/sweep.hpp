#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/parallel.hpp"
#include "mirrornoise/table.hpp"

namespace mirrornoise {

// One-dimensional parameter sweep over a built-in topology.
//
// Swept variables:
//   W3         mirror device width; the diode width follows at the same ratio
//   W3m        diode width alone
//   L3         mirror and diode length together
//   r_de       degeneration resistance (SDCM only)
//   W1         input device width (tc_half only)
//   frequency  evaluation frequency for the MNA observables
//   vsb        source-bulk bias of the observed device (device observables only)
//
// Device observables (gm, gmb, vth) refer to M3 on the mirror and M1 on the
// TC half circuit. Gm_eff is always the degenerated mirror device.
struct SweepSpec {
  std::string topology = "mirror";  // mirror | tc_half
  std::vector<std::pair<std::string, std::string>> params;  // topology key=value overrides
  ProcessParams process{};
  std::string variable;
  std::vector<double> values;
  std::vector<std::string> observables;
  double spot_hz = 1e5;
  bool flicker = false;

  void validate() const;
};

std::vector<std::string> sweep_variables();
std::vector<std::string> sweep_observables();

// JSON fields: topology, params {key: value}, process {key: value},
// variable, values (array, or {start, stop, points, scale: "log"|"lin"}),
// observables, spot_hz, flicker. Throws Error(Parse) on malformed text.
SweepSpec parse_sweep_spec(std::string_view json_text);

// First column is the swept variable, then one column per observable in
// the requested order. Errors carry the offending swept value.
Table run_sweep(const SweepSpec& spec, Exec exec = Exec::Parallel);

}  // namespace mirrornoise
