#include "mirrornoise/topologies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>

#include "mirrornoise/error.hpp"
#include "mirrornoise/kvfile.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidInput, what);
}

void check_geom(const MosGeometry& g, const char* name) {
  require(g.width > 0 && g.length > 0 && g.series_stack >= 1, std::string(name) + ": invalid geometry");
}

Mosfet mos(const MosGeometry& g, double id, Polarity pol = Polarity::N, bool dtmos = false) {
  Mosfet m;
  m.geometry = g;
  m.bias.id = id;
  m.polarity = pol;
  m.dtmos = dtmos;
  return m;
}

MacroAmp amp(double gain, std::optional<double> pole = std::nullopt) {
  MacroAmp a;
  a.dc_gain = gain;
  a.pole_hz = pole;
  return a;
}

// Adds the degenerated tail device and returns the name of its source node.
std::string degenerated(Circuit& c, const std::string& suffix, const std::string& drain, const std::string& gate,
                        const MosGeometry& g, double id, double r_de) {
  const std::string src = r_de > 0 ? "s3" + suffix : "0";
  c.add("M3" + suffix, mos(g, id), {drain, gate, src, src});
  if (r_de > 0) c.add("RDE" + suffix, Resistor{r_de}, {src, "0"});
  return src;
}

NoiseDirective noise_directive(const std::string& out, const std::string& in, double r_de) {
  NoiseDirective nd;
  nd.out_node = out;
  nd.in_source = in;
  nd.exclude = {"M3M"};
  if (r_de > 0) nd.exclude.push_back("RDEM");
  return nd;
}

}  // namespace

void MirrorTopoParams::validate() const {
  check_geom(mirror, "M3");
  check_geom(diode, "M3M");
  require(r_de >= 0, "r_de must be non-negative");
  require(kind == MirrorKind::Sdcm || r_de == 0, "conventional mirror requires r_de = 0");
  require(r_d > 0 && id > 0 && vdd > 0, "r_d, id and vdd must be positive");
  require(!v_out || (*v_out > 0 && *v_out < vdd), "v_out must lie in (0, vdd)");
  require(min_headroom >= 0 && min_headroom < vdd, "min_headroom must lie in [0, vdd)");
}

void TcHalfParams::validate() const {
  check_geom(m1, "M1");
  check_geom(m2, "M2");
  check_geom(m3, "M3");
  check_geom(m3m, "M3M");
  check_geom(m13, "M13");
  require(i_main > 0 && i_tail > 0 && i_diode > 0, "branch currents must be positive");
  require(r_de >= 0, "r_de must be non-negative");
  require(mirror_kind == MirrorKind::Sdcm || r_de == 0, "conventional mirror requires r_de = 0");
  require(r_in > 0 && r_fvf > 0 && out_ratio > 0 && m_ratio > 0, "resistances and ratios must be positive");
  require(a_g > 0 && pole_g > 0 && a_r > 0, "amplifier gains and poles must be positive");
  require(c_lc >= 0 && c_r >= 0 && c_par_in >= 0, "capacitances must be non-negative");
  require(vdd > 0 && v_r > 0 && v_l > 0 && vin_dc >= 0, "bias voltages must be positive");
  require(vdd > std::max({v_r, v_l, vin_dc}), "vdd must exceed every bias voltage");
  require(min_headroom >= 0 && min_headroom < vdd, "min_headroom must lie in [0, vdd)");
}

void FullIaParams::validate() const {
  tc.validate();
  check_geom(m12, "M12");
  require(a_c > 0 && r_cm > 0 && c_c >= 0, "CMFB parameters must be positive");
  require(v_ref > 0 && v_ref < tc.vdd, "v_ref must lie in (0, vdd)");
}

Circuit build_mirror(const MirrorTopoParams& p) {
  p.validate();
  Circuit c;
  c.title = "* current mirror";
  c.add("IREF", ISource{p.id, 1.0}, {"vdd", "g"});
  c.add("VDD", VSource{p.vdd, 0.0}, {"vdd", "0"});
  const std::string sm = p.r_de > 0 ? "sm" : "0";
  c.add("M3M", mos(p.diode, p.id), {"g", "g", sm, sm});
  if (p.r_de > 0) c.add("RDEM", Resistor{p.r_de}, {"sm", "0"});
  degenerated(c, "", "d", "g", p.mirror, p.id, p.r_de);
  c.add("RD", Resistor{p.r_d}, {"vdd", "d"});
  c.noise = noise_directive("d", "IREF", p.r_de);
  return c;
}

namespace {

// One TC half plus its TI output branch. Node and label names carry the
// suffix; shared nodes (vdd, vl, vr, bn) do not.
void add_tc_side(Circuit& c, const TcHalfParams& p, const std::string& sfx, const std::string& in,
                 const std::string& out) {
  const std::string d1 = "d1" + sfx, x = "x" + sfx, g2 = "g2" + sfx;
  const std::string s13 = "s13" + sfx, gr = "gr" + sfx;
  const std::string bulk1 = p.dtmos ? in : x;
  c.add("M1" + sfx, mos(p.m1, p.i_main, Polarity::P, p.dtmos), {d1, in, x, bulk1});
  c.add("RFVF" + sfx, Resistor{p.r_fvf}, {d1, "0"});
  c.add("EAG" + sfx, amp(p.a_g, p.pole_g), {g2, d1, "vl"});
  c.add("M2" + sfx, mos(p.m2, p.i_m2(), Polarity::P), {x, g2, "vdd", "vdd"});
  degenerated(c, sfx, x, "bn", p.m3, p.i_tail, p.r_de);
  c.add("M11" + sfx, mos(p.m11(), p.m_ratio * p.i_m2(), Polarity::P), {s13, g2, "vdd", "vdd"});
  c.add("M13" + sfx, mos(p.m13, p.m_ratio * p.i_m2(), Polarity::P), {out, gr, s13, s13});
  c.add("EAR" + sfx, amp(p.a_r), {gr, "vr", s13});
  if (p.c_lc > 0) c.add("CLC" + sfx, Capacitor{p.c_lc}, {g2, x});
  if (p.c_par_in > 0) c.add("CPAR" + sfx, Capacitor{p.c_par_in}, {in, "0"});
  if (p.c_r > 0) c.add("CR" + sfx, Capacitor{p.c_r}, {out, "0"});
}

void add_gate_cap(Circuit& c, const TcHalfParams& p, const ProcessParams& proc, const std::string& sfx,
                  const std::string& in) {
  const double cgs = 2.0 / 3.0 * proc.cox_area * p.m1.width * p.m1.effective_length();
  c.add("CGS1" + sfx, Capacitor{cgs}, {in, "x" + sfx});
}

void add_bias(Circuit& c, const TcHalfParams& p) {
  c.add("VDD", VSource{p.vdd, 0.0}, {"vdd", "0"});
  c.add("VL", VSource{p.v_l, 0.0}, {"vl", "0"});
  c.add("VR", VSource{p.v_r, 0.0}, {"vr", "0"});
  c.add("IBIAS", ISource{p.i_diode, 0.0}, {"vdd", "bn"});
  const std::string sm = p.r_de > 0 ? "s3m" : "0";
  c.add("M3M", mos(p.m3m, p.i_diode), {"bn", "bn", sm, sm});
  if (p.r_de > 0) c.add("RDEM", Resistor{p.r_de}, {"s3m", "0"});
}

}  // namespace

Circuit build_tc_half(const TcHalfParams& p, const ProcessParams& proc) {
  p.validate();
  Circuit c;
  c.title = std::string("* FVF transconductance half circuit (") + mirror_kind_name(p.mirror_kind) +
            (p.dtmos ? ", DTMOS input)" : ")");
  c.add("VIN", VSource{p.vin_dc, 1.0}, {"in", "0"});
  add_bias(c, p);
  add_tc_side(c, p, "", "in", "out");
  add_gate_cap(c, p, proc, "", "in");
  c.add("RIN", Resistor{p.r_in / 2.0}, {"x", "0"});
  c.add("ROUT", Resistor{p.r_out() / 2.0}, {"out", "0"});
  c.loopgain = {"EAG"};
  c.noise = noise_directive("out", "VIN", p.r_de);
  return c;
}

Circuit build_full_ia(const FullIaParams& p, const ProcessParams& proc) {
  p.validate();
  const TcHalfParams& t = p.tc;
  Circuit c;
  c.title = std::string("* differential instrumentation amplifier (") + mirror_kind_name(t.mirror_kind) +
            (t.dtmos ? ", DTMOS input)" : ")");
  c.add("VIN", VSource{0.0, 1.0}, {"vid", "0"});
  c.add("EINP", amp(0.5), {"inp", "vid", "0"});
  c.add("EINN", amp(0.5), {"inn", "0", "vid"});
  add_bias(c, t);
  c.add("VREF", VSource{p.v_ref, 0.0}, {"vref", "0"});
  for (const std::string lower : {"p", "n"}) {
    add_tc_side(c, t, lower, "in" + lower, "out" + lower);
    add_gate_cap(c, t, proc, lower, "in" + lower);
    c.add("M12" + lower, mos(p.m12, t.m_ratio * t.i_m2()), {"out" + lower, "gc", "0", "0"});
    if (p.c_c > 0) c.add("CC" + lower, Capacitor{p.c_c}, {"gr" + lower, "out" + lower});
  }
  c.add("RIN", Resistor{t.r_in}, {"xp", "xn"});
  c.add("ROUT", Resistor{t.r_out()}, {"outp", "outn"});
  c.add("EBP", amp(1.0), {"bufp", "outp", "0"});
  c.add("EBN", amp(1.0), {"bufn", "outn", "0"});
  c.add("RCMP", Resistor{p.r_cm}, {"bufp", "cm"});
  c.add("RCMN", Resistor{p.r_cm}, {"bufn", "cm"});
  c.add("EAC", amp(p.a_c), {"gc", "cm", "vref"});
  c.add("EOUT", amp(1.0), {"vod", "outp", "outn"});
  c.loopgain = {"EAGP", "EAGN"};
  c.noise = noise_directive("vod", "VIN", t.r_de);
  return c;
}

double ideal_ia_gain(const TcHalfParams& p) { return p.m_ratio * p.r_out() / p.r_in; }

HeadroomReport headroom(const MirrorTopoParams& p, const ProcessParams& proc) {
  p.validate();
  HeadroomReport r;
  const SmallSignal dio = small_signal(p.diode, {p.id, 0.0, 0.0}, proc);
  const SmallSignal m3 = small_signal(p.mirror, {p.id, 0.0, 0.0}, proc);
  r.v_de = p.id * p.r_de;
  r.v_dio = dio.vgs + r.v_de;
  r.headroom_diode = p.vdd - r.v_dio;
  const double v_out = p.v_out.value_or(p.vdd / 2.0);
  r.sat_margin = {{"M3M", dio.vgs - dio.vdsat}, {"M3", v_out - r.v_de - m3.vdsat}};
  r.pass = r.headroom_diode >= p.min_headroom &&
           std::all_of(r.sat_margin.begin(), r.sat_margin.end(), [](const auto& m) { return m.second >= 0; });
  return r;
}

HeadroomReport headroom(const TcHalfParams& p, const ProcessParams& proc) {
  p.validate();
  HeadroomReport r;
  const SmallSignal dio = small_signal(p.m3m, {p.i_diode, 0.0, 0.0}, proc);
  const SmallSignal m1 = small_signal(p.m1, {p.i_main, 0.0, 0.0}, proc, p.dtmos);
  const SmallSignal m2 = small_signal(p.m2, {p.i_m2(), 0.0, 0.0}, proc);
  const SmallSignal m3 = small_signal(p.m3, {p.i_tail, 0.0, 0.0}, proc);
  const SmallSignal m11 = small_signal(p.m11(), {p.m_ratio * p.i_m2(), 0.0, 0.0}, proc);
  const SmallSignal m13 = small_signal(p.m13, {p.m_ratio * p.i_m2(), 0.0, 0.0}, proc);
  r.v_de = p.i_tail * p.r_de;
  r.v_dio = dio.vgs + p.i_diode * p.r_de;
  r.headroom_diode = p.vdd - r.v_dio;
  // DC levels: x sits one V_SG above the input, d1 is held at V_L by A_G,
  // the output common mode is V_DD/2.
  const double x = p.vin_dc + m1.vgs;
  const double s13 = p.vdd - p.v_r;
  const double out = p.vdd / 2.0;
  r.sat_margin = {{"M1", x - p.v_l - m1.vdsat},       {"M2", p.vdd - x - m2.vdsat},
                  {"M3", x - r.v_de - m3.vdsat},      {"M3M", dio.vgs - dio.vdsat},
                  {"M11", p.v_r - m11.vdsat},         {"M13", s13 - out - m13.vdsat}};
  r.pass = r.headroom_diode >= p.min_headroom &&
           std::all_of(r.sat_margin.begin(), r.sat_margin.end(), [](const auto& m) { return m.second >= 0; });
  return r;
}

std::optional<MirrorKind> parse_mirror_kind(std::string_view s) {
  std::string l(s);
  for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (l == "conventional" || l == "cm") return MirrorKind::Conventional;
  if (l == "sdcm") return MirrorKind::Sdcm;
  return std::nullopt;
}

const char* mirror_kind_name(MirrorKind k) { return k == MirrorKind::Sdcm ? "sdcm" : "conventional"; }

namespace {

// Name -> setter table shared by the three parameter records.
using Setter = std::function<void(std::string_view)>;

double real_value(std::string_view key, std::string_view v) { return parse_eng_or_throw(v, key); }

int int_value(std::string_view key, std::string_view v) {
  const double d = real_value(key, v);
  if (d != std::floor(d) || d < 1 || d > 1e6) {
    throw Error(ErrorKind::Parse, std::string(key) + ": expected a positive integer");
  }
  return static_cast<int>(d);
}

bool flag_value(std::string_view key, std::string_view v) {
  std::string l(v);
  for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
  if (l == "0" || l == "false" || l == "no" || l == "off") return false;
  throw Error(ErrorKind::Parse, std::string(key) + ": expected a boolean");
}

MirrorKind kind_value(std::string_view key, std::string_view v) {
  auto k = parse_mirror_kind(v);
  if (!k) throw Error(ErrorKind::Parse, std::string(key) + ": expected conventional or sdcm");
  return *k;
}

template <class T>
std::map<std::string, Setter> setters(T& p);

#define MN_REAL(name, field) t[name] = [&p](std::string_view v) { p.field = real_value(name, v); }
#define MN_INT(name, field) t[name] = [&p](std::string_view v) { p.field = int_value(name, v); }

template <>
std::map<std::string, Setter> setters(MirrorTopoParams& p) {
  std::map<std::string, Setter> t;
  t["kind"] = [&p](std::string_view v) { p.kind = kind_value("kind", v); };
  MN_REAL("w3", mirror.width);
  MN_REAL("l3", mirror.length);
  MN_INT("stack3", mirror.series_stack);
  MN_REAL("w3m", diode.width);
  MN_REAL("l3m", diode.length);
  MN_INT("stack3m", diode.series_stack);
  MN_REAL("r_de", r_de);
  MN_REAL("r_d", r_d);
  MN_REAL("id", id);
  MN_REAL("vdd", vdd);
  t["v_out"] = [&p](std::string_view v) { p.v_out = real_value("v_out", v); };
  MN_REAL("min_headroom", min_headroom);
  return t;
}

template <>
std::map<std::string, Setter> setters(TcHalfParams& p) {
  std::map<std::string, Setter> t;
  MN_REAL("w1", m1.width);
  MN_REAL("l1", m1.length);
  MN_REAL("i_main", i_main);
  t["dtmos"] = [&p](std::string_view v) { p.dtmos = flag_value("dtmos", v); };
  MN_REAL("w2", m2.width);
  MN_REAL("l2", m2.length);
  t["mirror"] = [&p](std::string_view v) { p.mirror_kind = kind_value("mirror", v); };
  MN_REAL("w3", m3.width);
  MN_REAL("l3", m3.length);
  MN_INT("stack3", m3.series_stack);
  MN_REAL("w3m", m3m.width);
  MN_REAL("l3m", m3m.length);
  MN_INT("stack3m", m3m.series_stack);
  MN_REAL("r_de", r_de);
  MN_REAL("i_tail", i_tail);
  MN_REAL("i_diode", i_diode);
  MN_REAL("r_in", r_in);
  MN_REAL("r_fvf", r_fvf);
  MN_REAL("a_g", a_g);
  MN_REAL("pole_g", pole_g);
  MN_REAL("a_r", a_r);
  MN_REAL("m_ratio", m_ratio);
  MN_REAL("w13", m13.width);
  MN_REAL("l13", m13.length);
  MN_REAL("out_ratio", out_ratio);
  MN_REAL("c_lc", c_lc);
  MN_REAL("c_r", c_r);
  MN_REAL("c_par_in", c_par_in);
  MN_REAL("v_r", v_r);
  MN_REAL("v_l", v_l);
  MN_REAL("vin_dc", vin_dc);
  MN_REAL("vdd", vdd);
  MN_REAL("min_headroom", min_headroom);
  return t;
}

template <>
std::map<std::string, Setter> setters(FullIaParams& p) {
  auto t = setters(p.tc);
  MN_REAL("v_ref", v_ref);
  MN_REAL("a_c", a_c);
  MN_REAL("w12", m12.width);
  MN_REAL("l12", m12.length);
  MN_REAL("c_c", c_c);
  MN_REAL("r_cm", r_cm);
  return t;
}

#undef MN_REAL
#undef MN_INT

template <class T>
void apply(T& p, std::string_view key, std::string_view value) {
  std::string k(key);
  for (auto& ch : k) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  auto t = setters(p);
  auto it = t.find(k);
  if (it == t.end()) throw Error(ErrorKind::Parse, "unknown parameter '" + k + "'");
  it->second(value);
}

template <class T>
std::vector<std::string> keys() {
  T p;
  std::vector<std::string> out;
  for (const auto& [k, _] : setters(p)) out.push_back(k);
  return out;
}

template <class T>
T parse_params(std::string_view text) {
  T p;
  for (const auto& kv : parse_key_values(text)) {
    try {
      apply(p, kv.key, kv.value);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(kv.line) + ": " + e.what());
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("invalid parameters: ") + e.what());
  }
  return p;
}

}  // namespace

void set_param(MirrorTopoParams& p, std::string_view key, std::string_view value) { apply(p, key, value); }
void set_param(TcHalfParams& p, std::string_view key, std::string_view value) { apply(p, key, value); }
void set_param(FullIaParams& p, std::string_view key, std::string_view value) { apply(p, key, value); }

std::vector<std::string> mirror_param_keys() { return keys<MirrorTopoParams>(); }
std::vector<std::string> tc_half_param_keys() { return keys<TcHalfParams>(); }
std::vector<std::string> full_ia_param_keys() { return keys<FullIaParams>(); }

MirrorTopoParams parse_mirror_params(std::string_view text) { return parse_params<MirrorTopoParams>(text); }
TcHalfParams parse_tc_half_params(std::string_view text) { return parse_params<TcHalfParams>(text); }
FullIaParams parse_full_ia_params(std::string_view text) { return parse_params<FullIaParams>(text); }

}  // namespace mirrornoise
