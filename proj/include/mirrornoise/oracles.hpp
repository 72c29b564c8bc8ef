#pragma once

#include <optional>

#include "mirrornoise/devmodel.hpp"

namespace mirrornoise {

// Closed-form references. Every function is pure and evaluates the textbook
// expression directly, with no shared code path to the MNA engine.

struct MirrorParams {
  double gm3 = 10e-6;
  double r_de = 0.0;
  double r_d = 1e6;
  double gamma_noise = 1.0;
  double temperature = 300.0;
  void validate() const;
};

struct IaNoiseParams {
  double gm1 = 29.75e-6;  // gm1 + gmb1 for a DTMOS input
  double gm3 = 10e-6;     // effective mirror transconductance
  double r_in = 4e3;
  double gamma_noise = 1.0;
  double temperature = 300.0;
  void validate() const;
};

// Conventional mirror at the load: 4kT gamma gm3 R_D^2 + 4kT R_D (V^2/Hz).
double cm_output_noise(const MirrorParams& p);

struct EffectiveGm {
  double exact = 0.0;                 // gm3 / (1 + gm3 R_DE)
  std::optional<double> approx;       // 1 / R_DE, absent at R_DE = 0
  std::optional<double> rel_error;    // (approx - exact) / exact = 1 / (gm3 R_DE)
};
EffectiveGm sdcm_effective_gm(double gm3, double r_de);

// Drain current PSD of the degenerated mirror device (A^2/Hz):
// [4kT gamma gm3 + (gm3 R_DE)^2 4kT/R_DE] / (1 + gm3 R_DE)^2.
double sdcm_current_psd(const MirrorParams& p);

struct SdcmNoise {
  double exact = 0.0;            // V^2/Hz at the load, incl. 4kT R_D
  std::optional<double> approx;  // (4kT/R_DE)(gamma/(gm3 R_DE) + 1) R_D^2 + 4kT R_D
};
SdcmNoise sdcm_output_noise(const MirrorParams& p);

// Input-referred IA thermal noise. The R_IN/2 current-noise term is the
// conductance form 4kT/(R_IN/2).
double ia_input_noise(const IaNoiseParams& p);

// RMS input-device noise ratio DTMOS / plain: gm / (gm + gmb).
double dtmos_noise_ratio(double gm, double gmb);

struct AppendixTransfers {
  double h_rde = 0.0;  // gm3 R_DE / (1 + gm3 R_DE)
  double h_m3 = 1.0;   // 1 / (1 + gm3 R_DE)
};
AppendixTransfers appendix_transfers(double gm3, double r_de);

// Iso-noise power scaling: RMS noise ~ 1/sqrt(I), so matching a noise
// ratio r at equal noise needs r^2 of the current.
double iso_noise_power_ratio(double noise_ratio);

// Noise efficiency factor V_rms * sqrt(2 I_tot / (pi U_T 4kT BW)).
double nef(double v_rms_in, double i_total, double bandwidth, const ProcessParams& p);

// gm/ID sizing: device current and width that realize gm at the given
// inversion coefficient and length.
struct GmSizing {
  double id = 0.0;
  double width = 0.0;
};
GmSizing size_for_gm(double gm, double ic, double length, const ProcessParams& p);

}  // namespace mirrornoise
