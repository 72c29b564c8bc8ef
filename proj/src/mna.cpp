#include "mirrornoise/mna.hpp"

#include <algorithm>
#include <cmath>

#include "mirrornoise/error.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

int break_position(const std::vector<std::string>& v, const std::string& s) {
  const auto it = std::find(v.begin(), v.end(), s);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

double break_sign(int position) { return position % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

std::vector<double> log_grid(double fstart, double fstop, int points) {
  if (!(fstart > 0 && fstop >= fstart) || points < 1) {
    throw Error(ErrorKind::InvalidInput, "log grid needs 0 < fstart <= fstop and points >= 1");
  }
  if (points == 1) return {fstart};
  std::vector<double> g(static_cast<std::size_t>(points));
  const double a = std::log10(fstart);
  const double b = std::log10(fstop);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
  g.front() = fstart;
  g.back() = fstop;
  return g;
}

std::vector<double> linear_grid(double start, double stop, int points) {
  if (!(stop >= start) || points < 1) throw Error(ErrorKind::InvalidInput, "linear grid needs start <= stop");
  if (points == 1) return {start};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = start + (stop - start) * i / (points - 1);
  g.back() = stop;
  return g;
}

const char* mechanism_name(NoiseMechanism m) {
  switch (m) {
    case NoiseMechanism::Thermal:
      return "thermal";
    case NoiseMechanism::Flicker:
      return "flicker";
    case NoiseMechanism::InputVoltage:
      return "vnoise";
  }
  return "?";
}

std::optional<NoiseMechanism> parse_mechanism(std::string_view s) {
  if (s == "thermal") return NoiseMechanism::Thermal;
  if (s == "flicker") return NoiseMechanism::Flicker;
  if (s == "vnoise") return NoiseMechanism::InputVoltage;
  return std::nullopt;
}

MnaSystem::MnaSystem(const Circuit& c, const ProcessParams& p, MnaOptions opts)
    : circuit_(c), process_(p), opts_(std::move(opts)) {
  p.validate();
  for (const auto& d : validate(c)) {
    if (d.severity == Severity::Error) {
      throw Error(ErrorKind::InvalidInput, (d.label.empty() ? "" : d.label + ": ") + d.message);
    }
  }
  for (const auto& lbl : opts_.removed) {
    if (!c.find(lbl)) throw Error(ErrorKind::Usage, "no element '" + lbl + "' to remove");
  }
  for (const auto& lbl : opts_.loop_break) {
    const Element* e = c.find(lbl);
    if (!e) throw Error(ErrorKind::Usage, "loop-break target '" + lbl + "' not found");
    if (!e->as<MacroAmp>() && !e->as<Mosfet>()) {
      throw Error(ErrorKind::Usage, "loop-break target '" + lbl + "' is not a controlled source");
    }
  }

  node_row_.assign(static_cast<std::size_t>(c.node_count()), -1);
  for (int n = 1; n < c.node_count(); ++n) node_row_[static_cast<std::size_t>(n)] = dim_++;
  for (const auto& e : circuit_.elements) {
    if (opts_.removed.count(e.label)) continue;
    if (e.as<VSource>() || e.as<MacroAmp>()) branch_row_[e.label] = dim_++;
    if (const auto* m = e.as<Mosfet>()) {
      Device d;
      d.ss = small_signal(m->geometry, m->bias, p, m->dtmos);
      d.gds = m->gds.value_or(0.0);
      d.ss.gds = d.gds;
      devices_[e.label] = d;
    }
  }
}

const Element& MnaSystem::element(std::string_view label) const {
  const Element* e = circuit_.find(label);
  if (!e) throw Error(ErrorKind::Usage, "no element '" + std::string(label) + "'");
  return *e;
}

int MnaSystem::node_index(std::string_view node) const {
  auto idx = circuit_.find_node(node);
  if (!idx) throw Error(ErrorKind::Usage, "no node '" + std::string(node) + "'");
  return node_row_[static_cast<std::size_t>(*idx)];
}

const SmallSignal& MnaSystem::operating_point(std::string_view label) const {
  auto it = devices_.find(canonical_label(label));
  if (it == devices_.end()) throw Error(ErrorKind::Usage, "no MOSFET '" + std::string(label) + "'");
  return it->second.ss;
}

double MnaSystem::gds(std::string_view label) const { return operating_point(label).gds; }

cplx MnaSystem::macro_gain(const MacroAmp& a, double f) const {
  if (!a.pole_hz) return {a.dc_gain, 0.0};
  return a.dc_gain / cplx(1.0, f / *a.pole_hz);
}

ComplexMatrix MnaSystem::matrix(double f) const {
  ComplexMatrix a(dim_);
  auto row = [&](int node) { return node_row_[static_cast<std::size_t>(node)]; };
  auto add = [&](int r, int c, cplx v) {
    if (r >= 0 && c >= 0) a(r, c) += v;
  };
  auto admittance = [&](int n1, int n2, cplx y) {
    const int r1 = row(n1), r2 = row(n2);
    add(r1, r1, y);
    add(r2, r2, y);
    add(r1, r2, -y);
    add(r2, r1, -y);
  };
  // Current g*(v_cp - v_cn) leaving node p, entering node n.
  auto vccs = [&](int p, int n, int cp, int cn, double g) {
    const int rp = row(p), rn = row(n), rcp = row(cp), rcn = row(cn);
    add(rp, rcp, g);
    add(rp, rcn, -g);
    add(rn, rcp, -g);
    add(rn, rcn, g);
  };
  const double w = 2.0 * kPi * f;

  for (const auto& e : circuit_.elements) {
    if (opts_.removed.count(e.label)) continue;
    const auto& n = e.nodes;
    if (const auto* r = e.as<Resistor>()) {
      admittance(n[0], n[1], 1.0 / r->r);
    } else if (const auto* c = e.as<Capacitor>()) {
      admittance(n[0], n[1], cplx(0.0, w * c->c));
    } else if (const auto* m = e.as<Mosfet>()) {
      const Device& d = devices_.at(e.label);
      if (!contains(opts_.loop_break, e.label)) {
        vccs(n[0], n[2], n[1], n[2], d.ss.gm);
        vccs(n[0], n[2], n[3], n[2], d.ss.gmb);
      }
      if (d.gds > 0) admittance(n[0], n[2], d.gds);
      if (m->dtmos) {
        const double cb = process_.cj_bulk * m->geometry.width * m->geometry.effective_length();
        admittance(n[1], kGround, cplx(0.0, w * cb));
      }
    } else if (e.as<VSource>()) {
      const int k = branch_row_.at(e.label);
      add(row(n[0]), k, 1.0);
      add(row(n[1]), k, -1.0);
      add(k, row(n[0]), 1.0);
      add(k, row(n[1]), -1.0);
    } else if (const auto* amp = e.as<MacroAmp>()) {
      const int k = branch_row_.at(e.label);
      add(row(n[0]), k, 1.0);
      add(k, row(n[0]), 1.0);
      if (!contains(opts_.loop_break, e.label)) {
        const cplx g = macro_gain(*amp, f);
        add(k, row(n[1]), -g);
        add(k, row(n[2]), g);
      }
    }
  }
  return a;
}

std::vector<cplx> MnaSystem::current_rhs(int node_a, int node_b) const {
  std::vector<cplx> b(static_cast<std::size_t>(dim_));
  const int ra = node_row_.at(static_cast<std::size_t>(node_a));
  const int rb = node_row_.at(static_cast<std::size_t>(node_b));
  if (ra >= 0) b[static_cast<std::size_t>(ra)] += 1.0;
  if (rb >= 0) b[static_cast<std::size_t>(rb)] -= 1.0;
  return b;
}

std::vector<cplx> MnaSystem::source_rhs() const {
  std::vector<cplx> b(static_cast<std::size_t>(dim_));
  for (const auto& e : circuit_.elements) {
    if (opts_.removed.count(e.label)) continue;
    if (const auto* v = e.as<VSource>()) {
      b[static_cast<std::size_t>(branch_row_.at(e.label))] += v->ac_mag;
    } else if (const auto* i = e.as<ISource>()) {
      // Positive current flows from n+ through the source to n-.
      auto inj = current_rhs(e.nodes[1], e.nodes[0]);
      for (std::size_t k = 0; k < b.size(); ++k) b[k] += i->ac_mag * inj[k];
    }
  }
  return b;
}

std::vector<cplx> MnaSystem::unit_source_rhs(std::string_view label) const {
  const Element& e = element(label);
  if (opts_.removed.count(e.label)) throw Error(ErrorKind::Usage, "source '" + e.label + "' is removed");
  if (e.as<VSource>()) {
    std::vector<cplx> b(static_cast<std::size_t>(dim_));
    b[static_cast<std::size_t>(branch_row_.at(e.label))] = 1.0;
    return b;
  }
  if (e.as<ISource>()) return current_rhs(e.nodes[1], e.nodes[0]);
  throw Error(ErrorKind::Usage, "'" + e.label + "' is not an independent source");
}

std::vector<cplx> MnaSystem::noise_rhs(const NoiseSourceInfo& src, double f) const {
  const Element& e = element(src.label);
  if (e.as<Resistor>() && src.mechanism == NoiseMechanism::Thermal) return current_rhs(e.nodes[0], e.nodes[1]);
  if (e.as<Mosfet>() && src.mechanism != NoiseMechanism::InputVoltage) {
    // Channel noise flows drain to source inside the device.
    return current_rhs(e.nodes[2], e.nodes[0]);
  }
  if (const auto* amp = e.as<MacroAmp>(); amp && src.mechanism == NoiseMechanism::InputVoltage) {
    std::vector<cplx> b(static_cast<std::size_t>(dim_));
    b[static_cast<std::size_t>(branch_row_.at(e.label))] = macro_gain(*amp, f);
    return b;
  }
  throw Error(ErrorKind::Usage,
              "element '" + e.label + "' has no " + mechanism_name(src.mechanism) + " noise source");
}

double MnaSystem::noise_psd(const NoiseSourceInfo& src, double f) const {
  const Element& e = element(src.label);
  if (const auto* r = e.as<Resistor>()) return resistor_noise(r->r, process_).si;
  if (const auto* m = e.as<Mosfet>()) {
    const double gm = devices_.at(e.label).ss.gm;
    if (src.mechanism == NoiseMechanism::Flicker) return flicker_psd(m->geometry, gm, f, process_);
    return channel_thermal_psd(gm, process_);
  }
  if (const auto* amp = e.as<MacroAmp>()) return amp->input_noise_psd;
  return 0.0;
}

std::vector<NoiseSourceInfo> MnaSystem::noise_sources(bool flicker) const {
  std::vector<NoiseSourceInfo> out;
  for (const auto& e : circuit_.elements) {
    if (opts_.removed.count(e.label)) continue;
    if (e.as<Resistor>()) {
      out.push_back({e.label, NoiseMechanism::Thermal});
    } else if (e.as<Mosfet>()) {
      out.push_back({e.label, NoiseMechanism::Thermal});
      if (flicker) out.push_back({e.label, NoiseMechanism::Flicker});
    } else if (const auto* amp = e.as<MacroAmp>(); amp && amp->input_noise_psd > 0) {
      out.push_back({e.label, NoiseMechanism::InputVoltage});
    }
  }
  return out;
}

std::vector<cplx> MnaSystem::loop_rhs() const {
  std::vector<cplx> b(static_cast<std::size_t>(dim_));
  for (std::size_t k = 0; k < opts_.loop_break.size(); ++k) {
    const Element& e = element(opts_.loop_break[k]);
    const double s = break_sign(static_cast<int>(k));
    if (e.as<MacroAmp>()) {
      b[static_cast<std::size_t>(branch_row_.at(e.label))] += s;
    } else {
      auto inj = current_rhs(e.nodes[2], e.nodes[0]);
      for (std::size_t i = 0; i < b.size(); ++i) b[i] += s * inj[i];
    }
  }
  return b;
}

cplx MnaSystem::voltage(const std::vector<cplx>& x, int node) const {
  const int r = node_row_[static_cast<std::size_t>(node)];
  return r < 0 ? cplx{} : x[static_cast<std::size_t>(r)];
}

cplx MnaSystem::return_ratio(const std::vector<cplx>& x, double f) const {
  cplx num{};
  double den = 0.0;
  for (const auto& lbl : opts_.loop_break) {
    const Element& e = element(lbl);
    const double s = break_sign(break_position(opts_.loop_break, lbl));
    cplx ret;
    if (const auto* amp = e.as<MacroAmp>()) {
      ret = macro_gain(*amp, f) * (voltage(x, e.nodes[1]) - voltage(x, e.nodes[2]));
    } else {
      const auto& ss = devices_.at(e.label).ss;
      const cplx vs = voltage(x, e.nodes[2]);
      ret = ss.gm * (voltage(x, e.nodes[1]) - vs) + ss.gmb * (voltage(x, e.nodes[3]) - vs);
    }
    num += s * ret;
    den += s * s;
  }
  return -num / den;
}

SystemMatrix stamp(const Circuit& c, double f, const ProcessParams& p) {
  MnaSystem sys(c, p);
  SystemMatrix m;
  m.dimension = sys.dimension();
  m.a = sys.matrix(f);
  m.rhs = sys.source_rhs();
  for (int n = 1; n < c.node_count(); ++n) m.unknowns.push_back("v(" + c.node_names[static_cast<std::size_t>(n)] + ")");
  for (const auto& e : c.elements) {
    if (e.as<VSource>() || e.as<MacroAmp>()) m.unknowns.push_back("i(" + e.label + ")");
  }
  return m;
}

std::vector<double> AcResult::magnitude() const {
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) out.push_back(std::abs(v));
  return out;
}

std::vector<double> AcResult::magnitude_db() const {
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) out.push_back(20.0 * std::log10(std::abs(v)));
  return out;
}

std::vector<double> AcResult::phase_deg() const {
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) out.push_back(std::arg(v) * 180.0 / kPi);
  return out;
}

namespace {

void check_grid(const std::vector<double>& g) {
  if (g.empty()) throw Error(ErrorKind::InvalidInput, "empty frequency grid");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= 0.0) || !std::isfinite(g[i])) throw Error(ErrorKind::InvalidInput, "frequency must be finite and >= 0");
    if (i > 0 && !(g[i] > g[i - 1])) throw Error(ErrorKind::InvalidInput, "frequency grid must be strictly increasing");
  }
}

int output_row(const MnaSystem& sys, std::string_view out_node) {
  const int r = sys.node_index(out_node);
  if (r < 0) throw Error(ErrorKind::Usage, "output node cannot be ground");
  return r;
}

}  // namespace

AcResult solve_ac(const Circuit& c, std::string_view in_src, std::string_view out_node,
                  const std::vector<double>& f_grid, const ProcessParams& p, Exec exec) {
  check_grid(f_grid);
  MnaSystem sys(c, p);
  const int out = output_row(sys, out_node);
  const auto rhs = sys.unit_source_rhs(in_src);
  AcResult r;
  r.freq_hz = f_grid;
  r.value.resize(f_grid.size());
  parallel_for(f_grid.size(), exec, [&](std::size_t i) {
    LuFactorization lu(sys.matrix(f_grid[i]), f_grid[i]);
    r.value[i] = lu.solve(rhs)[static_cast<std::size_t>(out)];
  });
  return r;
}

cplx transfer_from_source(const Circuit& c, std::string_view label, NoiseMechanism mechanism,
                          std::string_view out_node, double f, const ProcessParams& p) {
  MnaSystem sys(c, p);
  const int out = output_row(sys, out_node);
  const NoiseSourceInfo src{canonical_label(label), mechanism};
  const auto rhs = sys.noise_rhs(src, f);
  LuFactorization lu(sys.matrix(f), f);
  return lu.solve(rhs)[static_cast<std::size_t>(out)];
}

std::string NoiseContribution::column() const { return label + "." + mechanism_name(mechanism); }

std::vector<std::pair<std::string, double>> NoiseReport::breakdown(double f) const {
  if (freq_hz.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < freq_hz.size(); ++i) {
    if (std::fabs(std::log(freq_hz[i] / f)) < std::fabs(std::log(freq_hz[best] / f))) best = i;
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : contributions) {
    out.emplace_back(c.column(), total[best] > 0 ? c.psd[best] / total[best] : 0.0);
  }
  return out;
}

NoiseReport noise_at_output(const Circuit& c, std::string_view out_node, std::string_view in_src,
                            const std::vector<double>& f_grid, const ProcessParams& p,
                            const NoiseOptions& opts, Exec exec) {
  check_grid(f_grid);
  MnaSystem sys(c, p);
  const int out = output_row(sys, out_node);
  const auto in_rhs = sys.unit_source_rhs(in_src);
  for (const auto& x : opts.exclude) {
    if (!c.find(x)) throw Error(ErrorKind::Usage, "noise exclude target '" + x + "' not found");
  }
  std::vector<NoiseSourceInfo> sources;
  for (auto& s : sys.noise_sources(opts.flicker)) {
    if (!opts.exclude.count(s.label)) sources.push_back(s);
  }

  NoiseReport rep;
  rep.freq_hz = f_grid;
  rep.total.assign(f_grid.size(), 0.0);
  rep.gain.resize(f_grid.size());
  for (const auto& s : sources) rep.contributions.push_back({s.label, s.mechanism, std::vector<double>(f_grid.size())});

  parallel_for(f_grid.size(), exec, [&](std::size_t i) {
    const double f = f_grid[i];
    LuFactorization lu(sys.matrix(f), f);
    rep.gain[i] = lu.solve(in_rhs)[static_cast<std::size_t>(out)];
    double total = 0.0;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const cplx h = lu.solve(sys.noise_rhs(sources[k], f))[static_cast<std::size_t>(out)];
      const double psd = std::norm(h) * sys.noise_psd(sources[k], f);
      rep.contributions[k].psd[i] = psd;
      total += psd;
    }
    rep.total[i] = total;
  });

  const bool referable = std::all_of(rep.gain.begin(), rep.gain.end(), [](cplx g) { return std::norm(g) > 0.0; });
  if (referable) {
    std::vector<double> in(f_grid.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = rep.total[i] / std::norm(rep.gain[i]);
    rep.input_referred = std::move(in);
  }
  return rep;
}

NoiseReport noise_at_output(const Circuit& c, const std::vector<double>& f_grid, const ProcessParams& p,
                            const NoiseOptions& opts, Exec exec) {
  if (!c.noise) throw Error(ErrorKind::Usage, "circuit has no .noise directive");
  NoiseOptions merged = opts;
  merged.exclude.insert(c.noise->exclude.begin(), c.noise->exclude.end());
  return noise_at_output(c, c.noise->out_node, c.noise->in_source, f_grid, p, merged, exec);
}

AcResult input_impedance(const Circuit& c, std::pair<std::string, std::string> port,
                         const std::vector<double>& f_grid, const ProcessParams& p, Exec exec) {
  check_grid(f_grid);
  const auto a = c.find_node(port.first);
  const auto b = c.find_node(port.second);
  if (!a || !b) throw Error(ErrorKind::Usage, "port node not found");
  if (*a == *b) throw Error(ErrorKind::Usage, "port nodes must differ");
  MnaOptions opts;
  for (const auto& e : c.elements) {
    if (!e.as<VSource>() && !e.as<ISource>()) continue;
    if ((e.nodes[0] == *a && e.nodes[1] == *b) || (e.nodes[0] == *b && e.nodes[1] == *a)) opts.removed.insert(e.label);
  }
  MnaSystem sys(c, p, opts);
  const auto rhs = sys.current_rhs(*a, *b);
  const int ra = sys.node_index(port.first);
  const int rb = sys.node_index(port.second);
  AcResult r;
  r.freq_hz = f_grid;
  r.value.resize(f_grid.size());
  parallel_for(f_grid.size(), exec, [&](std::size_t i) {
    LuFactorization lu(sys.matrix(f_grid[i]), f_grid[i]);
    const auto x = lu.solve(rhs);
    const cplx va = ra < 0 ? cplx{} : x[static_cast<std::size_t>(ra)];
    const cplx vb = rb < 0 ? cplx{} : x[static_cast<std::size_t>(rb)];
    r.value[i] = va - vb;
  });
  return r;
}

AcResult loop_gain(const Circuit& c, const std::vector<double>& f_grid, const ProcessParams& p, Exec exec) {
  if (c.loopgain.empty()) throw Error(ErrorKind::Usage, "circuit has no .loopgain directive");
  check_grid(f_grid);
  MnaOptions opts;
  opts.loop_break = c.loopgain;
  MnaSystem sys(c, p, opts);
  const auto rhs = sys.loop_rhs();
  AcResult r;
  r.freq_hz = f_grid;
  r.value.resize(f_grid.size());
  parallel_for(f_grid.size(), exec, [&](std::size_t i) {
    LuFactorization lu(sys.matrix(f_grid[i]), f_grid[i]);
    r.value[i] = sys.return_ratio(lu.solve(rhs), f_grid[i]);
  });
  return r;
}

}  // namespace mirrornoise
