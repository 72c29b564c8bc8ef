#include "mirrornoise/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/mna.hpp"
#include "mirrornoise/netlist.hpp"
#include "mirrornoise/optimize.hpp"
#include "mirrornoise/oracles.hpp"
#include "mirrornoise/svg.hpp"
#include "mirrornoise/sweep.hpp"
#include "mirrornoise/table.hpp"
#include "mirrornoise/topologies.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage:
      return kExitUsage;
    case ErrorKind::Parse:
    case ErrorKind::InvalidInput:
      return kExitParse;
    case ErrorKind::Domain:
    case ErrorKind::OutOfRange:
    case ErrorKind::NoConvergence:
    case ErrorKind::Singular:
    case ErrorKind::ZeroGain:
      return kExitNumerical;
    case ErrorKind::Infeasible:
      return kExitInfeasible;
  }
  return kExitUsage;
}

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << data)) throw Error(ErrorKind::Usage, "cannot write '" + path + "'");
}

double eng_flag(const std::string& text, const std::string& flag) {
  const auto v = parse_eng(text);
  if (!v) throw Error(ErrorKind::Usage, flag + ": not a number: '" + text + "'");
  return *v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

struct Grid {
  std::string fstart = "1";
  std::string fstop = "10meg";
  std::string points = "61";

  void attach(CLI::App* app) {
    app->add_option("--fstart", fstart, "first frequency (Hz)");
    app->add_option("--fstop", fstop, "last frequency (Hz)");
    app->add_option("--points", points, "log-spaced points, endpoints inclusive");
  }
  std::vector<double> build() const {
    const double a = eng_flag(fstart, "--fstart");
    const double b = eng_flag(fstop, "--fstop");
    const double n = eng_flag(points, "--points");
    if (n < 1 || n != std::floor(n) || n > 1e6) throw Error(ErrorKind::Usage, "--points must be a positive integer");
    if (!(a > 0) || !(b >= a)) throw Error(ErrorKind::Usage, "need 0 < --fstart <= --fstop");
    return log_grid(a, b, static_cast<int>(n));
  }
};

struct Context {
  std::ostream& err;
  std::string process_file;
  bool serial = false;

  Exec exec() const { return serial ? Exec::Serial : Exec::Parallel; }
  ProcessParams process() const {
    return process_file.empty() ? ProcessParams{} : parse_process_params(read_file(process_file));
  }

  Circuit netlist(const std::string& path) const {
    const ParseResult r = parse_netlist(read_file(path));
    for (const auto& d : r.diagnostics) err << format_diagnostic(d, path) << "\n";
    if (!r.circuit) throw Error(ErrorKind::Parse, path + ": netlist has errors");
    return *r.circuit;
  }
};

std::string ac_csv(const AcResult& r, const char* mag_column, bool db) {
  std::string s = std::string("freq_hz,") + mag_column + ",phase_deg,re,im\n";
  const auto mag = db ? r.magnitude_db() : r.magnitude();
  const auto ph = r.phase_deg();
  for (std::size_t i = 0; i < r.freq_hz.size(); ++i) {
    s += fmt(r.freq_hz[i]) + "," + fmt(mag[i]) + "," + fmt(ph[i]) + "," + fmt(r.value[i].real()) + "," +
         fmt(r.value[i].imag()) + "\n";
  }
  return s;
}

// --- oracle -------------------------------------------------------------------

class OracleArgs {
 public:
  OracleArgs(const std::vector<std::string>& kv, const std::set<std::string>& own) {
    std::string process_text;
    for (const auto& item : kv) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::Usage, "expected key=value, got '" + item + "'");
      const std::string key = item.substr(0, eq);
      const std::string val = item.substr(eq + 1);
      if (own.count(key)) {
        if (values_.count(key)) throw Error(ErrorKind::Usage, "key '" + key + "' given twice");
        values_[key] = parse_eng_or_throw(val, key);
      } else {
        process_text += key + "=" + val + "\n";
      }
    }
    process_ = parse_process_params(process_text);
  }

  double get(const std::string& k) const {
    const auto it = values_.find(k);
    if (it == values_.end()) throw Error(ErrorKind::Usage, "missing required key '" + k + "'");
    return it->second;
  }
  double get(const std::string& k, double fallback) const {
    const auto it = values_.find(k);
    return it == values_.end() ? fallback : it->second;
  }
  const ProcessParams& process() const { return process_; }

 private:
  std::map<std::string, double> values_;
  ProcessParams process_;
};

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_oracle(const std::string& name, const std::vector<std::string>& kv) {
  if (name == "cm_noise" || name == "sdcm_noise") {
    OracleArgs a(kv, {"gm3", "r_de", "r_d"});
    const MirrorParams mp{a.get("gm3"), a.get("r_de", 0.0), a.get("r_d"), a.process().gamma_noise,
                          a.process().temperature};
    if (name == "cm_noise") {
      const double v = cm_output_noise(mp);
      return {{"psd_v2hz", v}, {"rms_v_rthz", std::sqrt(v)}};
    }
    const SdcmNoise n = sdcm_output_noise(mp);
    return {{"exact", n.exact}, {"approx", opt_json(n.approx)}, {"current_psd_a2hz", sdcm_current_psd(mp)}};
  }
  if (name == "sdcm_gm") {
    OracleArgs a(kv, {"gm3", "r_de"});
    const EffectiveGm g = sdcm_effective_gm(a.get("gm3"), a.get("r_de"));
    return {{"exact", g.exact}, {"approx", opt_json(g.approx)}, {"rel_error", opt_json(g.rel_error)}};
  }
  if (name == "ia_noise") {
    OracleArgs a(kv, {"gm1", "gm3", "r_in"});
    const double v = ia_input_noise(
        {a.get("gm1"), a.get("gm3"), a.get("r_in"), a.process().gamma_noise, a.process().temperature});
    return {{"psd_v2hz", v}, {"rms_v_rthz", std::sqrt(v)}};
  }
  if (name == "dtmos_ratio") {
    OracleArgs a(kv, {"gm", "gmb"});
    return {{"ratio", dtmos_noise_ratio(a.get("gm"), a.get("gmb"))}};
  }
  if (name == "appendix") {
    OracleArgs a(kv, {"gm3", "r_de"});
    const AppendixTransfers t = appendix_transfers(a.get("gm3"), a.get("r_de"));
    return {{"h_rde", t.h_rde}, {"h_m3", t.h_m3}, {"sum", t.h_rde + t.h_m3}};
  }
  if (name == "iso_power") {
    OracleArgs a(kv, {"noise_ratio"});
    const double r = iso_noise_power_ratio(a.get("noise_ratio"));
    return {{"power_ratio", r}, {"saving", 1.0 - r}};
  }
  if (name == "nef") {
    OracleArgs a(kv, {"v_rms", "i_total", "bw"});
    return {{"nef", nef(a.get("v_rms"), a.get("i_total"), a.get("bw"), a.process())}};
  }
  if (name == "vth") {
    OracleArgs a(kv, {"vsb"});
    return {{"vth", threshold_voltage(a.get("vsb"), a.process())}};
  }
  if (name == "gmb") {
    OracleArgs a(kv, {"gm", "vsb"});
    const double gmb = body_transconductance(a.get("gm"), a.get("vsb"), a.process());
    return {{"gmb", gmb}, {"ratio", gmb / a.get("gm")}};
  }
  if (name == "size") {
    OracleArgs a(kv, {"gm", "ic", "l"});
    const GmSizing s = size_for_gm(a.get("gm"), a.get("ic"), a.get("l"), a.process());
    return {{"id", s.id}, {"width", s.width}};
  }
  if (name == "device") {
    OracleArgs a(kv, {"w", "l", "stack", "id", "vsb", "dtmos"});
    const double stack = a.get("stack", 1.0);
    if (stack < 1 || stack != std::floor(stack)) throw Error(ErrorKind::InvalidInput, "stack must be an integer >= 1");
    const MosGeometry g{a.get("w"), a.get("l"), static_cast<int>(stack)};
    const SmallSignal s =
        small_signal(g, {a.get("id"), a.get("vsb", 0.0), 0.0}, a.process(), a.get("dtmos", 0.0) != 0.0);
    return {{"gm", s.gm},   {"gmb", s.gmb},     {"gds", s.gds}, {"vgs", s.vgs},
            {"vth", s.vth}, {"vdsat", s.vdsat}, {"ic", s.ic}};
  }
  throw Error(ErrorKind::Usage, "unknown oracle '" + name +
                                    "' (cm_noise, sdcm_gm, sdcm_noise, ia_noise, dtmos_ratio, appendix, "
                                    "iso_power, nef, vth, gmb, size, device)");
}

// --- noise --------------------------------------------------------------------

std::string noise_csv(const NoiseReport& r) {
  std::string s = "freq_hz";
  for (const auto& c : r.contributions) s += "," + c.column();
  s += ",total_v2hz";
  if (r.input_referred) s += ",input_referred_v2hz";
  s += "\n";
  for (std::size_t i = 0; i < r.freq_hz.size(); ++i) {
    s += fmt(r.freq_hz[i]);
    for (const auto& c : r.contributions) s += "," + fmt(c.psd[i]);
    s += "," + fmt(r.total[i]);
    if (r.input_referred) s += "," + fmt((*r.input_referred)[i]);
    s += "\n";
  }
  return s;
}

std::string noise_spot_json(const NoiseReport& r) {
  json j;
  j["freq_hz"] = r.freq_hz.front();
  j["total_v2hz"] = r.total.front();
  j["input_referred_v2hz"] = r.input_referred ? json(r.input_referred->front()) : json(nullptr);
  json rows = json::array();
  double sum = 0.0;
  const auto parts = r.breakdown(r.freq_hz.front());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    rows.push_back({{"source", parts[k].first}, {"psd_v2hz", r.contributions[k].psd.front()}, {"fraction", parts[k].second}});
    sum += parts[k].second;
  }
  j["sources"] = rows;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", sum);
  j["fraction_sum"] = buf;
  return j.dump(2) + "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-signal noise and headroom analysis for current mirrors and IA front ends", "mirrornoise"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expanded help");

  Context ctx{err, {}, false};
  app.add_option("--process", ctx.process_file, "process parameter file (key=value)");
  app.add_flag("--serial", ctx.serial, "use the single-threaded reference path");

  std::string netlist, in_src, out_node, spot, exclude, port, spec_file, kind, params_file, csv_file, x_col, y_cols,
      out_file, title;
  bool no_flicker = false, logx = false, logy = false;
  Grid grid;
  std::vector<std::string> oracle_kv;

  auto* analyze = app.add_subcommand("analyze", "AC transfer from a source to a node");
  analyze->add_option("netlist", netlist)->required();
  analyze->add_option("--in", in_src, "input source label")->required();
  analyze->add_option("--out", out_node, "output node")->required();
  grid.attach(analyze);

  auto* noise = app.add_subcommand("noise", "output and input-referred noise");
  noise->add_option("netlist", netlist)->required();
  noise->add_option("--out", out_node, "output node (default from .noise)");
  noise->add_option("--in", in_src, "input source label (default from .noise)");
  noise->add_option("--spot", spot, "single frequency; prints a JSON breakdown");
  noise->add_flag("--no-flicker", no_flicker, "thermal sources only");
  noise->add_option("--exclude", exclude, "comma-separated element labels to leave out");
  grid.attach(noise);

  auto* zin = app.add_subcommand("zin", "impedance seen at a port");
  zin->add_option("netlist", netlist)->required();
  zin->add_option("--port", port, "n1,n2")->required();
  grid.attach(zin);

  auto* loop = app.add_subcommand("loopgain", "return ratio of the .loopgain target");
  loop->add_option("netlist", netlist)->required();
  grid.attach(loop);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep from a JSON spec");
  sweep->add_option("spec", spec_file)->required();
  sweep->add_option("--out", out_file, "write CSV here instead of stdout");

  auto* opt = app.add_subcommand("optimize", "constrained mirror design search from a JSON spec");
  opt->add_option("spec", spec_file)->required();

  auto* topo = app.add_subcommand("topo", "emit a built-in topology netlist");
  topo->add_option("kind", kind, "mirror | tc_half | full_ia")->required();
  topo->add_option("params", params_file, "key=value parameter file");

  auto* oracle = app.add_subcommand("oracle", "evaluate a closed-form expression");
  oracle->add_option("name", kind)->required();
  oracle->add_option("values", oracle_kv, "key=value ...");

  auto* plot = app.add_subcommand("plot", "render CSV columns to SVG");
  plot->add_option("csv", csv_file)->required();
  plot->add_option("--x", x_col)->required();
  plot->add_option("--y", y_cols, "comma-separated columns")->required();
  plot->add_flag("--logx", logx);
  plot->add_flag("--logy", logy);
  plot->add_option("--title", title);
  plot->add_option("--out", out_file, "SVG file (stdout if omitted)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::string data;
  try {
    if (analyze->parsed()) {
      const Circuit c = ctx.netlist(netlist);
      data = ac_csv(solve_ac(c, in_src, out_node, grid.build(), ctx.process(), ctx.exec()), "mag_db", true);
    } else if (noise->parsed()) {
      const Circuit c = ctx.netlist(netlist);
      NoiseOptions nopt;
      nopt.flicker = !no_flicker;
      if (!exclude.empty()) {
        for (const auto& l : split_list(exclude)) nopt.exclude.insert(canonical_label(l));
      }
      std::string o = out_node, i = in_src;
      if (c.noise) {
        if (o.empty()) o = c.noise->out_node;
        if (i.empty()) i = c.noise->in_source;
        nopt.exclude.insert(c.noise->exclude.begin(), c.noise->exclude.end());
      }
      if (o.empty() || i.empty()) throw Error(ErrorKind::Usage, "--out and --in are required without a .noise directive");
      const std::vector<double> f = spot.empty() ? grid.build() : std::vector<double>{eng_flag(spot, "--spot")};
      if (!(f.front() > 0)) throw Error(ErrorKind::Usage, "--spot must be positive");
      const NoiseReport r = noise_at_output(c, canonical_node(o), canonical_label(i), f, ctx.process(), nopt, ctx.exec());
      if (!r.input_referred) err << "warning: zero gain at some frequency; input-referred noise omitted\n";
      data = spot.empty() ? noise_csv(r) : noise_spot_json(r);
    } else if (zin->parsed()) {
      const Circuit c = ctx.netlist(netlist);
      const auto nodes = split_list(port);
      if (nodes.size() != 2 || nodes[0].empty() || nodes[1].empty()) throw Error(ErrorKind::Usage, "--port expects n1,n2");
      data = ac_csv(input_impedance(c, {canonical_node(nodes[0]), canonical_node(nodes[1])}, grid.build(),
                                    ctx.process(), ctx.exec()),
                    "mag_ohm", false);
    } else if (loop->parsed()) {
      const Circuit c = ctx.netlist(netlist);
      data = ac_csv(loop_gain(c, grid.build(), ctx.process(), ctx.exec()), "mag_db", true);
    } else if (sweep->parsed()) {
      data = write_csv(run_sweep(parse_sweep_spec(read_file(spec_file)), ctx.exec()));
      if (!out_file.empty()) {
        write_file(out_file, data);
        data.clear();
      }
    } else if (opt->parsed()) {
      DesignSpec s = parse_design_spec(read_file(spec_file));
      if (!ctx.process_file.empty()) s.process = ctx.process();
      data = optimum_to_json(optimize(s, ctx.exec()));
    } else if (topo->parsed()) {
      const std::string text = params_file.empty() ? std::string() : read_file(params_file);
      if (kind == "mirror") {
        data = serialize(build_mirror(parse_mirror_params(text)));
      } else if (kind == "tc_half") {
        data = serialize(build_tc_half(parse_tc_half_params(text), ctx.process()));
      } else if (kind == "full_ia") {
        data = serialize(build_full_ia(parse_full_ia_params(text), ctx.process()));
      } else {
        throw Error(ErrorKind::Usage, "unknown topology '" + kind + "' (mirror, tc_half, full_ia)");
      }
    } else if (oracle->parsed()) {
      data = run_oracle(kind, oracle_kv).dump(2) + "\n";
    } else if (plot->parsed()) {
      PlotSpec ps;
      ps.x = x_col;
      ps.y = split_list(y_cols);
      ps.log_x = logx;
      ps.log_y = logy;
      ps.title = title;
      data = emit_svg(read_csv(read_file(csv_file)), ps);
      if (!out_file.empty()) {
        write_file(out_file, data);
        data.clear();
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  out << data;
  return kExitOk;
}

}  // namespace mirrornoise
