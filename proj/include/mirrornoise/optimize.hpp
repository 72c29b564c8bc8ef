#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/parallel.hpp"
#include "mirrornoise/topologies.hpp"

namespace mirrornoise {

// Mirror co-design problem. Diode and mirror devices share (W3, L3) and the
// branch current, so V_DIO = V_GS3 + I_D R_DE.
//
// Default objective: minimize the IA input-referred thermal noise with the
// mirror term taken from the exact SDCM current PSD. With max_noise set the
// objective flips to maximizing headroom_diode under noise <= max_noise.
struct DesignSpec {
  double vdd = 0.8;
  std::optional<double> min_headroom_diode;  // vdd / 2 when unset
  double max_v_de = 0.1;
  double branch_current = 1e-6;
  std::vector<double> w3;
  std::vector<double> l3;
  std::vector<double> r_de;
  bool refine = false;  // golden-section pass over r_de around the grid optimum
  double spot_hz = 1e5;
  double r_in = 4e3;
  double r_d = 1e6;              // load used by the MNA spot check
  std::optional<double> gm1;     // default: the built-in M1 at 1 uA
  std::optional<double> max_noise;  // V/sqrt(Hz)
  ProcessParams process{};

  double headroom_floor() const { return min_headroom_diode.value_or(vdd / 2.0); }
  void validate() const;
};

struct DesignPoint {
  double w3 = 0.0;
  double l3 = 0.0;
  double r_de = 0.0;
  double gm3 = 0.0;
  double current_psd = 0.0;  // mirror output current PSD, A^2/Hz
  double noise = 0.0;        // input-referred, V/sqrt(Hz)
  HeadroomReport headroom;
  bool feasible = false;
  std::vector<std::string> violated;
};

struct Optimum {
  DesignPoint best;
  std::optional<DesignPoint> baseline;  // conventional mirror, same constraints
  std::optional<double> noise_ratio;    // best / baseline
  std::optional<double> headroom_delta; // best - baseline, V
  int evaluated = 0;
  int feasible = 0;
  double spot_check_rel_error = 0.0;    // MNA vs closed form at the optimum
};

// Same JSON conventions as the sweep spec; ranges are arrays or
// {start, stop, points, scale}.
DesignSpec parse_design_spec(std::string_view json_text);

DesignPoint evaluate_design(const DesignSpec& spec, double w3, double l3, double r_de);

// Throws Error(Infeasible) naming the binding constraint when nothing fits.
Optimum optimize(const DesignSpec& spec, Exec exec = Exec::Parallel);

std::string optimum_to_json(const Optimum& o);

}  // namespace mirrornoise
