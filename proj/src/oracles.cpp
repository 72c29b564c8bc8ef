#include "mirrornoise/oracles.hpp"

#include <cmath>

#include "mirrornoise/error.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidInput, what);
}

}  // namespace

void MirrorParams::validate() const {
  require(gm3 > 0, "gm3 must be positive");
  require(r_de >= 0, "r_de must be non-negative");
  require(r_d > 0, "r_d must be positive");
  require(gamma_noise >= 0 && temperature > 0, "gamma must be >= 0 and temperature > 0");
}

void IaNoiseParams::validate() const {
  require(gm1 > 0, "gm1 must be positive");
  require(gm3 >= 0 && r_in >= 0, "gm3 and r_in must be non-negative");
  require(gamma_noise >= 0 && temperature > 0, "gamma must be >= 0 and temperature > 0");
}

double cm_output_noise(const MirrorParams& p) {
  p.validate();
  const double fkt = four_kt(p.temperature);
  return fkt * p.gamma_noise * p.gm3 * p.r_d * p.r_d + fkt * p.r_d;
}

EffectiveGm sdcm_effective_gm(double gm3, double r_de) {
  require(gm3 > 0 && r_de >= 0, "need gm3 > 0 and r_de >= 0");
  EffectiveGm g;
  g.exact = gm3 / (1.0 + gm3 * r_de);
  if (r_de > 0) {
    g.approx = 1.0 / r_de;
    g.rel_error = 1.0 / (gm3 * r_de);
  }
  return g;
}

double sdcm_current_psd(const MirrorParams& p) {
  p.validate();
  const double fkt = four_kt(p.temperature);
  const double loop = p.gm3 * p.r_de;
  const double resistor = p.r_de > 0 ? loop * loop * fkt / p.r_de : 0.0;
  return (fkt * p.gamma_noise * p.gm3 + resistor) / ((1.0 + loop) * (1.0 + loop));
}

SdcmNoise sdcm_output_noise(const MirrorParams& p) {
  const double fkt = four_kt(p.temperature);
  SdcmNoise n;
  n.exact = sdcm_current_psd(p) * p.r_d * p.r_d + fkt * p.r_d;
  if (p.r_de > 0) {
    const double si = fkt / p.r_de * (p.gamma_noise / (p.gm3 * p.r_de) + 1.0);
    n.approx = si * p.r_d * p.r_d + fkt * p.r_d;
  }
  return n;
}

double ia_input_noise(const IaNoiseParams& p) {
  p.validate();
  const double fkt = four_kt(p.temperature);
  const double half = p.r_in / 2.0;
  const double input = fkt * p.gamma_noise / p.gm1;
  if (half == 0.0) return input;
  return input + (fkt * p.gamma_noise * p.gm3 + fkt / half) * half * half;
}

double dtmos_noise_ratio(double gm, double gmb) {
  require(gm > 0 && gmb >= 0, "need gm > 0 and gmb >= 0");
  return gm / (gm + gmb);
}

AppendixTransfers appendix_transfers(double gm3, double r_de) {
  require(gm3 > 0 && r_de >= 0, "need gm3 > 0 and r_de >= 0");
  const double loop = gm3 * r_de;
  return {loop / (1.0 + loop), 1.0 / (1.0 + loop)};
}

double iso_noise_power_ratio(double noise_ratio) {
  require(noise_ratio > 0 && noise_ratio <= 1, "noise ratio must be in (0, 1]");
  return noise_ratio * noise_ratio;
}

double nef(double v_rms_in, double i_total, double bandwidth, const ProcessParams& p) {
  require(v_rms_in > 0 && i_total > 0 && bandwidth > 0, "NEF inputs must be positive");
  return v_rms_in * std::sqrt(2.0 * i_total / (kPi * p.ut() * four_kt(p.temperature) * bandwidth));
}

GmSizing size_for_gm(double gm, double ic, double length, const ProcessParams& p) {
  require(gm > 0 && ic > 0 && length > 0, "need gm, ic, length > 0");
  const double ut = p.ut();
  GmSizing s;
  s.id = gm * p.n_slope * ut * (0.5 + std::sqrt(0.25 + ic));
  const double ispec_per_aspect = 2.0 * p.n_slope * p.mu_cox * ut * ut;
  s.width = length * s.id / (ic * ispec_per_aspect);
  return s;
}

}  // namespace mirrornoise
