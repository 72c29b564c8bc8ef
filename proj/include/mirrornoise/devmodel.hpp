#pragma once

#include <string>
#include <string_view>

namespace mirrornoise {

// Physical process constants. All SI.
struct ProcessParams {
  double mu_cox = 300e-6;      // A/V^2
  double n_slope = 1.3;        // subthreshold slope factor
  double vth0 = 0.3;           // V
  double lambda_body = 0.4;    // body-effect coefficient, V^0.5
  double phi_f2 = 0.7;         // 2*Phi_F, V
  double gamma_noise = 1.0;    // channel thermal-noise excess factor
  double kf = 1e-25;           // flicker coefficient, J
  double cox_area = 10e-3;     // F/m^2
  double cj_bulk = 3e-3;       // DTMOS bulk-gate capacitance per gate area, F/m^2
  double temperature = 300.0;  // K

  double ut() const;  // kT/q
  void validate() const;
};

struct MosGeometry {
  double width = 1e-6;
  double length = 1e-6;
  int series_stack = 1;

  double effective_length() const { return length * series_stack; }
  double aspect() const { return width / effective_length(); }
  void validate() const;
};

struct MosBias {
  double id = 1e-6;   // drain current magnitude, A
  double vsb = 0.0;   // NMOS-equivalent source-bulk voltage, V
  double vds = 0.0;   // V, used only for saturation checks
  void validate(const ProcessParams& p) const;
};

struct SmallSignal {
  double gm = 0.0;
  double gmb = 0.0;
  double gds = 0.0;
  double vgs = 0.0;
  double vth = 0.0;
  double vdsat = 0.0;
  double ic = 0.0;
};

// --- Static I-V (EKV charge form) ------------------------------------------
//
// With ic = I_D / I_spec, I_spec = 2 n muCox (W/L_eff) U_T^2 and the
// normalized channel charge q = sqrt(0.25 + ic) - 0.5 (so ic = q^2 + q):
//
//     (V_GS - V_TH(V_SB)) / (n U_T) = 2 q + ln q
//
// Differentiating gives gm = I_D / (n U_T (0.5 + sqrt(0.25 + ic))) in every
// region; the current depends on V_SB only through V_TH.

double specific_current(const MosGeometry& geom, const ProcessParams& p);
double inversion_coefficient(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p);
double gm_of_bias(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p);

// Drain current at a gate-source voltage in [0, 2] V.
double id_of_vgs(const MosGeometry& geom, double vgs, double vsb, const ProcessParams& p);
// Gate-source voltage that carries bias.id. Closed-form inverse of id_of_vgs.
double vgs_of_id(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p);

double threshold_voltage(double vsb, const ProcessParams& p);
double body_transconductance(double gm, double vsb, const ProcessParams& p);

// Saturation voltage used only for headroom checks, clipped below at 3 U_T.
double saturation_voltage(double ic, const ProcessParams& p);

// DTMOS: bulk tied to gate, so V_SB = -V_GS in the NMOS-equivalent
// convention. Solves V_GS = V_TH(-V_GS) + n U_T (2q + ln q) by bisection.
double dtmos_vgs(const MosGeometry& geom, double id, const ProcessParams& p);

// Full operating point for a device at its declared bias.
SmallSignal small_signal(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p,
                         bool dtmos = false);

// --- Noise -----------------------------------------------------------------

double channel_thermal_psd(double gm, const ProcessParams& p);        // A^2/Hz
double channel_thermal_psd_gate(double gm, const ProcessParams& p);   // V^2/Hz, 4kT gamma / gm

struct ResistorNoise {
  double si;  // A^2/Hz
  double sv;  // V^2/Hz
};
ResistorNoise resistor_noise(double r, const ProcessParams& p);

double flicker_psd(const MosGeometry& geom, double gm, double f, const ProcessParams& p);

// --- Parameter files ---------------------------------------------------------
//
// Flat key=value text, one pair per line, '#' or '*' comments, SI values
// with optional engineering suffixes. Keys are the ProcessParams field
// names; unknown keys are an error.
ProcessParams parse_process_params(std::string_view text, ProcessParams base = {});
std::string serialize_process_params(const ProcessParams& p);

}  // namespace mirrornoise
