#include <gtest/gtest.h>

#include <cmath>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/error.hpp"
#include "support.hpp"

using namespace mirrornoise;
using mntest::rel;

namespace {

const ProcessParams kProc{};
const MosGeometry kM1{500e-6, 0.25e-6, 1};

// A higher threshold keeps V_GS inside [0, 2] V down to ic = 1e-4.
ProcessParams high_vth() {
  ProcessParams p;
  p.vth0 = 0.45;
  return p;
}

// Geometry that puts 1 uA at the requested inversion coefficient.
MosGeometry at_ic(double ic, const ProcessParams& p) {
  const double ut = p.ut();
  const double aspect = 1e-6 / (ic * 2.0 * p.n_slope * p.mu_cox * ut * ut);
  return {aspect * 1e-6, 1e-6, 1};
}

}  // namespace

TEST(InversionCoefficient, InputDeviceValue) {
  EXPECT_LT(rel(inversion_coefficient(kM1, {1e-6, 0, 0}, kProc), 9.5915e-4), 1e-4);
}

TEST(InversionCoefficient, Proportionality) {
  const double base = inversion_coefficient(kM1, {1e-6, 0, 0}, kProc);
  MosGeometry wide = kM1;
  wide.width *= 2;
  EXPECT_DOUBLE_EQ(inversion_coefficient(wide, {1e-6, 0, 0}, kProc), base / 2);
  MosGeometry stacked = kM1;
  stacked.series_stack = 4;
  EXPECT_DOUBLE_EQ(inversion_coefficient(stacked, {1e-6, 0, 0}, kProc), base * 4);
  EXPECT_LT(inversion_coefficient(kM1, {1e-15, 0, 0}, kProc), 1e-11);
}

TEST(Transconductance, WeakInversionLimit) {
  const double limit = 1e-6 / (kProc.n_slope * kProc.ut());
  EXPECT_LT(rel(limit, 29.755e-6), 1e-4);
  const double gm = gm_of_bias({1.0, 1e-6, 1}, {1e-6, 0, 0}, kProc);  // ic ~ 2e-6
  EXPECT_LT(rel(gm, limit), 1e-5);
  EXPECT_LT(gm_of_bias(kM1, {1e-6, 0, 0}, kProc), limit);
}

TEST(Transconductance, MatchesFiniteDifferenceAcrossRegions) {
  const ProcessParams p = high_vth();
  for (double ic : {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
    const MosGeometry g = at_ic(ic, p);
    const double vgs = vgs_of_id(g, {1e-6, 0, 0}, p);
    const double h = 1e-6;
    const double fd = (id_of_vgs(g, vgs + h, 0, p) - id_of_vgs(g, vgs - h, 0, p)) / (2 * h);
    EXPECT_LT(rel(gm_of_bias(g, {1e-6, 0, 0}, p), fd), 1e-6) << "ic=" << ic;
  }
}

TEST(Transconductance, StrongInversionSquareLawLimit) {
  // ic >> 1: gm -> sqrt(2 muCox (W/L) I_D / n), the square law with the
  // slope factor in the denominator.
  const MosGeometry g = at_ic(1e6, kProc);
  const double id = 1e-6;
  const double square = std::sqrt(2.0 * kProc.mu_cox * g.aspect() * id / kProc.n_slope);
  EXPECT_LT(rel(gm_of_bias(g, {id, 0, 0}, kProc), square), 1e-3);
}

TEST(Threshold, Values) {
  EXPECT_DOUBLE_EQ(threshold_voltage(0.0, kProc), kProc.vth0);
  EXPECT_NEAR(threshold_voltage(0.2, kProc), 0.344809, 1e-6);
  EXPECT_NEAR(threshold_voltage(-0.2, kProc), 0.248179, 1e-6);
  EXPECT_THROW(threshold_voltage(-0.71, kProc), Error);
  double prev = threshold_voltage(-0.6, kProc);
  for (double v = -0.5; v <= 1.0; v += 0.1) {
    const double cur = threshold_voltage(v, kProc);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(BodyTransconductance, ValueAndIdentity) {
  const double gm = 29.75e-6;
  const double gmb = body_transconductance(gm, 0.2, kProc);
  EXPECT_NEAR(gmb / gm, 0.210819, 1e-6);
  EXPECT_NEAR(gmb, 6.272e-6, 1e-9);
  ProcessParams flat = kProc;
  flat.lambda_body = 0.0;
  EXPECT_EQ(body_transconductance(gm, 0.2, flat), 0.0);
  for (double vsb : {-0.5, 0.0, 0.3, 1.0}) {
    EXPECT_DOUBLE_EQ(body_transconductance(gm, vsb, kProc) / gm,
                     kProc.lambda_body / (2 * std::sqrt(kProc.phi_f2 + vsb)));
  }
  EXPECT_THROW(body_transconductance(gm, -0.7, kProc), Error);
}

TEST(BodyTransconductance, MatchesFiniteDifference) {
  const ProcessParams p = high_vth();
  const MosGeometry g = at_ic(0.5, p);
  for (double vsb : {0.0, 0.1, 0.2, 0.3, 0.4}) {
    const double vgs = vgs_of_id(g, {1e-6, vsb, 0}, p);
    const double h = 1e-5;
    const double fd = (id_of_vgs(g, vgs, vsb - h, p) - id_of_vgs(g, vgs, vsb + h, p)) / (2 * h);
    const double gm = gm_of_bias(g, {1e-6, vsb, 0}, p);
    EXPECT_LT(rel(body_transconductance(gm, vsb, p), fd), 1e-4) << "vsb=" << vsb;
  }
}

TEST(IV, RoundTripAndMonotonicity) {
  for (double x : {0.2, 0.4, 0.6}) {
    const double id = id_of_vgs(kM1, x, 0, kProc);
    EXPECT_NEAR(vgs_of_id(kM1, {id, 0, 0}, kProc), x, 1e-6);
  }
  double prev = 0;
  for (double v = 0.0; v <= 2.0; v += 0.05) {
    const double id = id_of_vgs(kM1, v, 0, kProc);
    EXPECT_GT(id, prev);
    prev = id;
  }
  const MosGeometry narrow{20e-6, 1e-6, 1}, wide{40e-6, 1e-6, 1};
  EXPECT_LT(vgs_of_id(wide, {1e-6, 0, 0}, kProc), vgs_of_id(narrow, {1e-6, 0, 0}, kProc));
  EXPECT_GT(vgs_of_id(narrow, {2e-6, 0, 0}, kProc), vgs_of_id(narrow, {1e-6, 0, 0}, kProc));
  EXPECT_THROW(id_of_vgs(kM1, 2.5, 0, kProc), Error);
  EXPECT_THROW(id_of_vgs(kM1, -0.1, 0, kProc), Error);
}

TEST(SmallSignal, Invariants) {
  for (double ic : {1e-3, 0.1, 1.0, 10.0, 100.0}) {
    const SmallSignal s = small_signal(at_ic(ic, kProc), {1e-6, 0.1, 0}, kProc);
    EXPECT_GT(s.gm, 0);
    EXPECT_GE(s.gmb, 0);
    EXPECT_LT(s.gmb, s.gm);
    EXPECT_GE(s.vdsat, 3 * kProc.ut());
    EXPECT_EQ(s.gds, 0.0);
    EXPECT_LT(rel(s.ic, ic), 1e-12);
  }
}

TEST(SmallSignal, Dtmos) {
  const SmallSignal plain = small_signal(kM1, {1e-6, 0, 0}, kProc);
  const SmallSignal dt = small_signal(kM1, {1e-6, 0, 0}, kProc, true);
  // Bulk at the gate: V_SB = -V_GS, threshold lowered, V_GS lowered.
  EXPECT_NEAR(dt.vth, threshold_voltage(-dt.vgs, kProc), 1e-12);
  EXPECT_LT(dt.vgs, plain.vgs);
  EXPECT_GT(dt.gmb, plain.gmb);
  // The solved V_GS carries the declared current.
  EXPECT_LT(rel(id_of_vgs(kM1, dt.vgs, -dt.vgs, kProc), 1e-6), 1e-9);
}

TEST(Noise, ChannelThermal) {
  EXPECT_LT(rel(channel_thermal_psd(3e-6, kProc), 4.9703e-26), 1e-4);
  EXPECT_LT(rel(channel_thermal_psd_gate(29.75e-6, kProc), 5.5690e-16), 1e-4);
  EXPECT_NEAR(std::sqrt(channel_thermal_psd_gate(29.75e-6, kProc)), 23.6e-9, 0.05e-9);
  ProcessParams quiet = kProc;
  quiet.gamma_noise = 0.0;
  EXPECT_EQ(channel_thermal_psd(3e-6, quiet), 0.0);
}

TEST(Noise, Resistor) {
  const auto r50 = resistor_noise(50e3, kProc);
  EXPECT_LT(rel(r50.si, 3.3136e-25), 1e-4);
  const auto r4 = resistor_noise(4e3, kProc);
  EXPECT_LT(rel(r4.sv, 6.6271e-17), 1e-4);
  EXPECT_NEAR(std::sqrt(r4.sv), 8.14e-9, 0.01e-9);
  for (double r : {1.0, 4e3, 1e6}) {
    const auto n = resistor_noise(r, kProc);
    EXPECT_LT(rel(n.sv / n.si, r * r), 1e-14);
  }
  EXPECT_THROW(resistor_noise(0.0, kProc), Error);
}

TEST(Noise, Flicker) {
  const MosGeometry g{20e-6, 1e-6, 1};
  const double s = flicker_psd(g, 10e-6, 1e3, kProc);
  EXPECT_LT(rel(s, 5e-26), 1e-12);
  MosGeometry big = g;
  big.width *= 2;
  EXPECT_DOUBLE_EQ(flicker_psd(big, 10e-6, 1e3, kProc), s / 2);
  EXPECT_DOUBLE_EQ(flicker_psd(g, 10e-6, 2e3, kProc), s / 2);
  EXPECT_DOUBLE_EQ(flicker_psd(g, 10e-6, 10.0, kProc) * 10.0, flicker_psd(g, 10e-6, 1e5, kProc) * 1e5);
  EXPECT_THROW(flicker_psd(g, 10e-6, 0.0, kProc), Error);
}

TEST(ProcessFile, ParseAndSerialize) {
  const ProcessParams p = parse_process_params("mu_cox=250u\nn_slope=1.4\ntemperature=310\n");
  EXPECT_EQ(p.mu_cox, 250e-6);
  EXPECT_EQ(p.n_slope, 1.4);
  EXPECT_EQ(p.temperature, 310.0);
  EXPECT_EQ(p.vth0, 0.3);
  const ProcessParams back = parse_process_params(serialize_process_params(p));
  EXPECT_EQ(back.mu_cox, p.mu_cox);
  EXPECT_EQ(back.temperature, p.temperature);
  EXPECT_THROW(parse_process_params("bogus=1\n"), Error);
  EXPECT_THROW(parse_process_params("temperature=500\n"), Error);
  EXPECT_THROW(parse_process_params("mu_cox=-1\n"), Error);
}
