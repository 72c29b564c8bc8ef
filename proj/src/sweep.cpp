#include "mirrornoise/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mirrornoise/error.hpp"
#include "mirrornoise/mna.hpp"
#include "mirrornoise/oracles.hpp"
#include "mirrornoise/topologies.hpp"
#include "mirrornoise/units.hpp"
#include "spec_json.hpp"

namespace mirrornoise {

namespace {

const std::vector<std::string> kVariables = {"W3", "W3m", "L3", "r_de", "W1", "frequency", "vsb"};
const std::vector<std::string> kObservables = {"gm",           "gmb",
                                               "vth",          "Gm_eff",
                                               "output_noise_psd", "input_referred_noise",
                                               "headroom_diode", "v_de",
                                               "zin",          "loop_gain"};
const std::set<std::string> kDeviceObservables = {"gm", "gmb", "vth"};

bool is_one_of(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Topology parameters with the swept value applied.
struct Point {
  bool mirror = true;
  MirrorTopoParams mp;
  TcHalfParams tp;
  double freq = 1e5;
  double vsb = 0.0;
};

void scale_width(MosGeometry& target, MosGeometry& follower, double w) {
  follower.width *= w / target.width;
  target.width = w;
}

Point make_point(const SweepSpec& s, double v) {
  Point pt;
  pt.mirror = s.topology == "mirror";
  pt.freq = s.spot_hz;
  for (const auto& [k, val] : s.params) {
    if (pt.mirror) {
      set_param(pt.mp, k, val);
    } else {
      set_param(pt.tp, k, val);
    }
  }
  MosGeometry& m3 = pt.mirror ? pt.mp.mirror : pt.tp.m3;
  MosGeometry& m3m = pt.mirror ? pt.mp.diode : pt.tp.m3m;
  const std::string& var = s.variable;
  if (var == "W3") {
    scale_width(m3, m3m, v);
  } else if (var == "W3m") {
    m3m.width = v;
  } else if (var == "L3") {
    m3.length = v;
    m3m.length = v;
  } else if (var == "r_de") {
    (pt.mirror ? pt.mp.r_de : pt.tp.r_de) = v;
  } else if (var == "W1") {
    pt.tp.m1.width = v;
  } else if (var == "frequency") {
    pt.freq = v;
  } else if (var == "vsb") {
    pt.vsb = v;
  }
  return pt;
}

Circuit build(const Point& pt, const ProcessParams& proc) {
  return pt.mirror ? build_mirror(pt.mp) : build_tc_half(pt.tp, proc);
}

SmallSignal observed_device(const Point& pt, const ProcessParams& proc) {
  if (pt.mirror) return small_signal(pt.mp.mirror, {pt.mp.id, pt.vsb, 0.0}, proc);
  return small_signal(pt.tp.m1, {pt.tp.i_main, pt.vsb, 0.0}, proc, pt.tp.dtmos);
}

std::vector<double> evaluate(const SweepSpec& s, double v) {
  const Point pt = make_point(s, v);
  const ProcessParams& proc = s.process;
  std::vector<double> row;
  row.push_back(v);

  std::optional<NoiseReport> noise;
  auto noise_report = [&]() -> const NoiseReport& {
    if (!noise) {
      NoiseOptions opts;
      opts.flicker = s.flicker;
      noise = noise_at_output(build(pt, proc), {pt.freq}, proc, opts, Exec::Serial);
    }
    return *noise;
  };
  std::optional<HeadroomReport> hr;
  auto head = [&]() -> const HeadroomReport& {
    if (!hr) hr = pt.mirror ? headroom(pt.mp, proc) : headroom(pt.tp, proc);
    return *hr;
  };

  for (const auto& obs : s.observables) {
    if (obs == "gm") {
      row.push_back(observed_device(pt, proc).gm);
    } else if (obs == "gmb") {
      row.push_back(observed_device(pt, proc).gmb);
    } else if (obs == "vth") {
      row.push_back(observed_device(pt, proc).vth);
    } else if (obs == "Gm_eff") {
      const MosGeometry& g = pt.mirror ? pt.mp.mirror : pt.tp.m3;
      const double id = pt.mirror ? pt.mp.id : pt.tp.i_tail;
      const double r_de = pt.mirror ? pt.mp.r_de : pt.tp.r_de;
      row.push_back(sdcm_effective_gm(small_signal(g, {id, 0.0, 0.0}, proc).gm, r_de).exact);
    } else if (obs == "output_noise_psd") {
      row.push_back(noise_report().total.front());
    } else if (obs == "input_referred_noise") {
      const auto& n = noise_report();
      if (!n.input_referred) throw Error(ErrorKind::ZeroGain, "zero gain, input referral undefined");
      row.push_back(n.input_referred->front());
    } else if (obs == "headroom_diode") {
      row.push_back(head().headroom_diode);
    } else if (obs == "v_de") {
      row.push_back(head().v_de);
    } else if (obs == "zin") {
      const auto port = pt.mirror ? std::pair<std::string, std::string>{"d", "0"}
                                  : std::pair<std::string, std::string>{"in", "0"};
      row.push_back(input_impedance(build(pt, proc), port, {pt.freq}, proc, Exec::Serial).magnitude().front());
    } else if (obs == "loop_gain") {
      row.push_back(loop_gain(build(pt, proc), {pt.freq}, proc, Exec::Serial).magnitude().front());
    }
  }
  return row;
}

}  // namespace

std::vector<std::string> sweep_variables() { return kVariables; }
std::vector<std::string> sweep_observables() { return kObservables; }

void SweepSpec::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidInput, m); };
  if (topology != "mirror" && topology != "tc_half") bad("topology must be mirror or tc_half");
  if (!is_one_of(kVariables, variable)) bad("unknown sweep variable '" + variable + "'");
  if (values.empty()) bad("value list is empty");
  for (double v : values) {
    if (!std::isfinite(v)) bad("sweep values must be finite");
  }
  if (values.size() > 1) {
    const bool up = values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1])) bad("sweep values must be strictly monotone");
    }
  }
  if (observables.empty()) bad("no observables requested");
  std::set<std::string> seen;
  for (const auto& o : observables) {
    if (!is_one_of(kObservables, o)) bad("unknown observable '" + o + "'");
    if (!seen.insert(o).second) bad("observable '" + o + "' listed twice");
    if (o == "loop_gain" && topology != "tc_half") bad("loop_gain needs the tc_half topology");
    if (variable == "vsb" && !kDeviceObservables.count(o)) bad("a vsb sweep only supports gm, gmb and vth");
  }
  if (variable == "W1" && topology != "tc_half") bad("W1 is only defined on tc_half");
  if (!(spot_hz > 0)) bad("spot_hz must be positive");
  if (variable == "frequency" || variable == "W3" || variable == "W3m" || variable == "L3" || variable == "W1") {
    for (double v : values) {
      if (!(v > 0)) bad(variable + " values must be positive");
    }
  }
  if (variable == "r_de") {
    for (double v : values) {
      if (v < 0) bad("r_de values must be non-negative");
    }
  }
  process.validate();
}

SweepSpec parse_sweep_spec(std::string_view text) {
  using detail::json;
  const json j = detail::parse_json_object(
      text, {"topology", "params", "process", "variable", "values", "observables", "spot_hz", "flicker"});
  SweepSpec s;
  if (j.contains("topology")) s.topology = detail::scalar_text(j["topology"], "topology");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw Error(ErrorKind::Parse, "params: expected an object");
    for (const auto& [k, v] : j["params"].items()) s.params.emplace_back(k, detail::scalar_text(v, "params." + k));
  }
  if (j.contains("process")) s.process = detail::process_from(j["process"]);
  if (!j.contains("variable") || !j.contains("values") || !j.contains("observables")) {
    throw Error(ErrorKind::Parse, "spec needs variable, values and observables");
  }
  s.variable = detail::scalar_text(j["variable"], "variable");
  s.values = detail::value_list(j["values"], "values");
  if (!j["observables"].is_array()) throw Error(ErrorKind::Parse, "observables: expected an array");
  for (const auto& o : j["observables"]) s.observables.push_back(detail::scalar_text(o, "observables"));
  if (j.contains("spot_hz")) s.spot_hz = detail::number(j["spot_hz"], "spot_hz");
  if (j.contains("flicker")) s.flicker = detail::flag(j["flicker"], "flicker");

  // Parameter keys are checked here so a typo is a parse error, not a
  // failure at the first sweep point.
  for (const auto& [k, v] : s.params) {
    try {
      if (s.topology == "tc_half") {
        TcHalfParams p;
        set_param(p, k, v);
      } else {
        MirrorTopoParams p;
        set_param(p, k, v);
      }
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "params." + k + ": " + e.what());
    }
  }
  return s;
}

Table run_sweep(const SweepSpec& spec, Exec exec) {
  spec.validate();
  Table t;
  t.columns.push_back(spec.variable);
  t.columns.insert(t.columns.end(), spec.observables.begin(), spec.observables.end());
  t.rows.resize(spec.values.size());
  parallel_for(spec.values.size(), exec, [&](std::size_t i) {
    const double v = spec.values[i];
    try {
      t.rows[i] = evaluate(spec, v);
    } catch (const Error& e) {
      throw Error(e.kind(), spec.variable + "=" + format_exact(v) + ": " + e.what());
    }
  });
  return t;
}

}  // namespace mirrornoise
