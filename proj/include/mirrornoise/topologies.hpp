#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/netlist.hpp"

namespace mirrornoise {

enum class MirrorKind { Conventional, Sdcm };

// Diode branch (M3M, optional RDEM) fed by IREF, mirrored device M3 with
// optional RDE, load RD to VDD. Noise input is IREF, output the M3 drain.
struct MirrorTopoParams {
  MirrorKind kind = MirrorKind::Sdcm;
  MosGeometry mirror{20e-6, 1e-6, 1};  // M3
  MosGeometry diode{20e-6, 1e-6, 1};   // M3M
  double r_de = 100e3;
  double r_d = 1e6;
  double id = 1e-6;
  double vdd = 0.8;
  std::optional<double> v_out;  // M3 drain DC level; vdd/2 when unset
  double min_headroom = 0.0;
  void validate() const;
};

// FVF transconductance half circuit. M1 (PMOS input) drains into the
// high-impedance node d1, whose load R_FVF stands for the gain-boosted
// M4-M6 stack; A_G closes the FVF loop onto M2. The tail mirror M3 sinks
// from the FVF node x, and M11 (m * W2) copies M2's current through the
// drain-regulated cascode M13 into R_OUT/2.
struct TcHalfParams {
  MosGeometry m1{500e-6, 0.25e-6, 1};
  double i_main = 1e-6;
  bool dtmos = false;
  MosGeometry m2{30e-6, 0.5e-6, 1};
  MirrorKind mirror_kind = MirrorKind::Sdcm;
  MosGeometry m3{20e-6, 1e-6, 1};
  MosGeometry m3m{2e-6, 1e-6, 1};
  double r_de = 50e3;
  double i_tail = 0.25e-6;
  double i_diode = 0.25e-6;
  double r_in = 4e3;
  double r_fvf = 100e6;
  double a_g = 30.0;
  double pole_g = 10e3;
  double a_r = 100.0;
  double m_ratio = 0.2;
  MosGeometry m13{0.5e-6, 0.5e-6, 1};
  double out_ratio = 250.0;  // R_OUT / R_IN
  double c_lc = 750e-15;
  double c_r = 20e-15;
  double c_par_in = 50e-15;
  double v_r = 0.1;  // M11 source-drain drop held by the regulation loop
  double v_l = 0.25;
  double vin_dc = 0.3;
  double vdd = 0.8;
  double min_headroom = 0.0;

  double r_out() const { return out_ratio * r_in; }
  double i_m2() const { return i_main + i_tail; }
  MosGeometry m11() const { return {m_ratio * m2.width, m2.length, m2.series_stack}; }
  void validate() const;
};

// True differential IA: two TC halves sharing R_IN between the FVF nodes,
// TI outputs across R_OUT, and a common-mode loop (unity sense buffers,
// resistive averager, A_C, M12 sinks). Output is EOUT = outp - outn.
struct FullIaParams {
  TcHalfParams tc{};
  double v_ref = 0.4;
  double a_c = 100.0;
  MosGeometry m12{1e-6, 0.25e-6, 1};
  double c_c = 5e-15;
  double r_cm = 1e6;
  void validate() const;
};

Circuit build_mirror(const MirrorTopoParams& p);
// The M1 gate-source capacitance (2/3) C_ox W L is taken from proc.
Circuit build_tc_half(const TcHalfParams& p, const ProcessParams& proc = {});
Circuit build_full_ia(const FullIaParams& p, const ProcessParams& proc = {});

// Ideal closed-loop gain m * R_OUT / R_IN.
double ideal_ia_gain(const TcHalfParams& p);

struct HeadroomReport {
  double v_dio = 0.0;
  double headroom_diode = 0.0;
  double v_de = 0.0;
  std::vector<std::pair<std::string, double>> sat_margin;  // label -> V_DS - V_Dsat
  bool pass = false;
};

HeadroomReport headroom(const MirrorTopoParams& p, const ProcessParams& proc = {});
HeadroomReport headroom(const TcHalfParams& p, const ProcessParams& proc = {});

// key=value parameter files; keys are listed by the *_param_keys functions.
void set_param(MirrorTopoParams& p, std::string_view key, std::string_view value);
void set_param(TcHalfParams& p, std::string_view key, std::string_view value);
void set_param(FullIaParams& p, std::string_view key, std::string_view value);
std::vector<std::string> mirror_param_keys();
std::vector<std::string> tc_half_param_keys();
std::vector<std::string> full_ia_param_keys();

MirrorTopoParams parse_mirror_params(std::string_view text);
TcHalfParams parse_tc_half_params(std::string_view text);
FullIaParams parse_full_ia_params(std::string_view text);

std::optional<MirrorKind> parse_mirror_kind(std::string_view s);
const char* mirror_kind_name(MirrorKind k);

}  // namespace mirrornoise
