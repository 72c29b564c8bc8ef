#include "mirrornoise/devmodel.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mirrornoise/error.hpp"
#include "mirrornoise/kvfile.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidInput, what);
}

// Charge from inversion coefficient without cancellation at small ic.
double charge_of_ic(double ic) { return ic / (std::sqrt(0.25 + ic) + 0.5); }

// Solves 2q + ln q = v for q > 0 with Newton on u = ln q. The function
// 2e^u + u is convex and increasing, so starting right of the root the
// iteration decreases monotonically.
double charge_of_overdrive(double v) {
  double u = v < 2.0 ? v : std::log(v / 2.0);
  for (int iter = 0; iter < 200; ++iter) {
    const double eu = std::exp(u);
    const double step = (2.0 * eu + u - v) / (2.0 * eu + 1.0);
    u -= step;
    if (std::fabs(step) <= 4e-16 * std::max(1.0, std::fabs(u))) return std::exp(u);
  }
  throw Error(ErrorKind::NoConvergence, "charge root find did not converge");
}

}  // namespace

double ProcessParams::ut() const { return thermal_voltage(temperature); }

void ProcessParams::validate() const {
  require(mu_cox > 0 && n_slope > 0 && vth0 > 0 && lambda_body > 0 && phi_f2 > 0 &&
              gamma_noise > 0 && kf > 0 && cox_area > 0 && cj_bulk > 0 && temperature > 0,
          "process parameters must be strictly positive");
  require(temperature >= 200.0 && temperature <= 400.0, "temperature outside [200, 400] K");
}

void MosGeometry::validate() const {
  require(width > 0 && length > 0, "device width and length must be positive");
  require(series_stack >= 1, "series_stack must be >= 1");
}

void MosBias::validate(const ProcessParams& p) const {
  require(id > 0, "drain current must be positive");
  require(vsb >= -p.phi_f2, "V_SB below -2PhiF");
}

double specific_current(const MosGeometry& geom, const ProcessParams& p) {
  const double ut = p.ut();
  return 2.0 * p.n_slope * p.mu_cox * geom.aspect() * ut * ut;
}

double inversion_coefficient(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p) {
  geom.validate();
  bias.validate(p);
  return bias.id / specific_current(geom, p);
}

double gm_of_bias(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p) {
  const double ic = inversion_coefficient(geom, bias, p);
  return (bias.id / (p.n_slope * p.ut())) / (0.5 + std::sqrt(0.25 + ic));
}

double threshold_voltage(double vsb, const ProcessParams& p) {
  if (vsb < -p.phi_f2) throw Error(ErrorKind::Domain, "V_SB below -2PhiF");
  return p.vth0 + p.lambda_body * (std::sqrt(p.phi_f2 + vsb) - std::sqrt(p.phi_f2));
}

double body_transconductance(double gm, double vsb, const ProcessParams& p) {
  if (!(gm > 0)) throw Error(ErrorKind::InvalidInput, "gm must be positive");
  const double arg = p.phi_f2 + vsb;
  if (!(arg > 1e-9)) throw Error(ErrorKind::Domain, "gmb singular: V_SB at or below -2PhiF");
  return gm * p.lambda_body / (2.0 * std::sqrt(arg));
}

double id_of_vgs(const MosGeometry& geom, double vgs, double vsb, const ProcessParams& p) {
  geom.validate();
  if (!(vgs >= 0.0 && vgs <= 2.0)) throw Error(ErrorKind::OutOfRange, "V_GS outside [0, 2] V");
  const double v = (vgs - threshold_voltage(vsb, p)) / (p.n_slope * p.ut());
  const double q = charge_of_overdrive(v);
  return specific_current(geom, p) * (q * q + q);
}

double vgs_of_id(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p) {
  const double q = charge_of_ic(inversion_coefficient(geom, bias, p));
  return threshold_voltage(bias.vsb, p) + p.n_slope * p.ut() * (2.0 * q + std::log(q));
}

double saturation_voltage(double ic, const ProcessParams& p) {
  const double ut = p.ut();
  return std::max(2.0 * p.n_slope * ut * (std::sqrt(0.25 + ic) + 0.5), 3.0 * ut);
}

double dtmos_vgs(const MosGeometry& geom, double id, const ProcessParams& p) {
  const MosBias zero{id, 0.0, 0.0};
  const double q = charge_of_ic(inversion_coefficient(geom, zero, p));
  const double overdrive = p.n_slope * p.ut() * (2.0 * q + std::log(q));
  auto residual = [&](double vgs) { return vgs - threshold_voltage(-vgs, p) - overdrive; };
  double lo = -2.0;
  double hi = p.phi_f2;
  if (residual(hi) < 0.0) {
    throw Error(ErrorKind::Domain, "DTMOS bias needs forward V_SB beyond 2PhiF");
  }
  if (residual(lo) > 0.0) throw Error(ErrorKind::OutOfRange, "DTMOS V_GS below -2 V");
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SmallSignal small_signal(const MosGeometry& geom, const MosBias& bias, const ProcessParams& p,
                         bool dtmos) {
  SmallSignal s;
  MosBias b = bias;
  if (dtmos) {
    b.vsb = 0.0;
    s.vgs = dtmos_vgs(geom, bias.id, p);
    b.vsb = -s.vgs;
  }
  s.ic = inversion_coefficient(geom, b, p);
  s.gm = gm_of_bias(geom, b, p);
  s.gmb = body_transconductance(s.gm, b.vsb, p);
  s.vth = threshold_voltage(b.vsb, p);
  if (!dtmos) s.vgs = vgs_of_id(geom, b, p);
  s.vdsat = saturation_voltage(s.ic, p);
  return s;
}

double channel_thermal_psd(double gm, const ProcessParams& p) {
  return four_kt(p.temperature) * p.gamma_noise * gm;
}

double channel_thermal_psd_gate(double gm, const ProcessParams& p) {
  if (!(gm > 0)) throw Error(ErrorKind::InvalidInput, "gm must be positive");
  return four_kt(p.temperature) * p.gamma_noise / gm;
}

ResistorNoise resistor_noise(double r, const ProcessParams& p) {
  if (!(r > 0)) throw Error(ErrorKind::InvalidInput, "resistance must be positive");
  const double fkt = four_kt(p.temperature);
  return {fkt / r, fkt * r};
}

double flicker_psd(const MosGeometry& geom, double gm, double f, const ProcessParams& p) {
  if (!(f > 0)) throw Error(ErrorKind::InvalidInput, "flicker frequency must be positive");
  const double area = geom.width * geom.effective_length();
  return gm * gm * p.kf / (p.cox_area * area * f);
}

ProcessParams parse_process_params(std::string_view text, ProcessParams base) {
  ProcessParams p = base;
  for (const auto& kv : parse_key_values(text)) {
    const double v = parse_eng_or_throw(kv.value, kv.key);
    if (kv.key == "mu_cox") p.mu_cox = v;
    else if (kv.key == "n_slope") p.n_slope = v;
    else if (kv.key == "vth0") p.vth0 = v;
    else if (kv.key == "lambda_body") p.lambda_body = v;
    else if (kv.key == "phi_f2") p.phi_f2 = v;
    else if (kv.key == "gamma_noise") p.gamma_noise = v;
    else if (kv.key == "kf") p.kf = v;
    else if (kv.key == "cox_area") p.cox_area = v;
    else if (kv.key == "cj_bulk") p.cj_bulk = v;
    else if (kv.key == "temperature") p.temperature = v;
    else
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(kv.line) + ": unknown process key '" + kv.key + "'");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("process parameters: ") + e.what());
  }
  return p;
}

std::string serialize_process_params(const ProcessParams& p) {
  std::ostringstream os;
  os << "mu_cox=" << format_exact(p.mu_cox) << '\n'
     << "n_slope=" << format_exact(p.n_slope) << '\n'
     << "vth0=" << format_exact(p.vth0) << '\n'
     << "lambda_body=" << format_exact(p.lambda_body) << '\n'
     << "phi_f2=" << format_exact(p.phi_f2) << '\n'
     << "gamma_noise=" << format_exact(p.gamma_noise) << '\n'
     << "kf=" << format_exact(p.kf) << '\n'
     << "cox_area=" << format_exact(p.cox_area) << '\n'
     << "cj_bulk=" << format_exact(p.cj_bulk) << '\n'
     << "temperature=" << format_exact(p.temperature) << '\n';
  return os.str();
}

}  // namespace mirrornoise
