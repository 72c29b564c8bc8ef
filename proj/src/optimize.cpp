#include "mirrornoise/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "mirrornoise/error.hpp"
#include "mirrornoise/mna.hpp"
#include "mirrornoise/oracles.hpp"
#include "mirrornoise/units.hpp"
#include "spec_json.hpp"

namespace mirrornoise {

namespace {

constexpr const char* kHeadroom = "min_headroom_diode";
constexpr const char* kVde = "max_v_de";
constexpr const char* kNoise = "max_noise";

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidInput, what);
}

double input_gm(const DesignSpec& s) {
  if (s.gm1) return *s.gm1;
  const TcHalfParams tc;
  return small_signal(tc.m1, {tc.i_main, 0.0, 0.0}, s.process).gm;
}

// Strict weak order used for every comparison, so the answer does not
// depend on the order in which the grid was listed.
bool better(const DesignSpec& s, const DesignPoint& a, const DesignPoint& b) {
  if (s.max_noise) {
    if (a.headroom.headroom_diode != b.headroom.headroom_diode) {
      return a.headroom.headroom_diode > b.headroom.headroom_diode;
    }
  }
  return std::tie(a.noise, a.w3, a.l3, a.r_de) < std::tie(b.noise, b.w3, b.l3, b.r_de);
}

std::optional<DesignPoint> best_of(const DesignSpec& s, const std::vector<DesignPoint>& pts) {
  std::optional<DesignPoint> best;
  for (const auto& p : pts) {
    if (p.feasible && (!best || better(s, p, *best))) best = p;
  }
  return best;
}

std::vector<DesignPoint> evaluate_grid(const DesignSpec& s, const std::vector<double>& r_de, Exec exec) {
  const std::size_t nl = s.l3.size(), nr = r_de.size();
  std::vector<DesignPoint> out(s.w3.size() * nl * nr);
  parallel_for(out.size(), exec, [&](std::size_t i) {
    out[i] = evaluate_design(s, s.w3[i / (nl * nr)], s.l3[(i / nr) % nl], r_de[i % nr]);
  });
  return out;
}

[[noreturn]] void report_infeasible(const std::vector<DesignPoint>& pts, const std::string& what) {
  std::map<std::string, int> hits;
  for (const auto& p : pts) {
    for (const auto& v : p.violated) ++hits[v];
  }
  std::string binding = "none";
  int most = 0;
  for (const auto& [name, n] : hits) {
    if (n > most) {
      most = n;
      binding = name;
    }
  }
  throw Error(ErrorKind::Infeasible, "no feasible " + what + " design: binding constraint " + binding +
                                         " (violated by " + std::to_string(most) + " of " +
                                         std::to_string(pts.size()) + " candidates)");
}

// Golden-section pass over r_de at the chosen geometry. Infeasible points
// score above every feasible one, in proportion to how far they miss, so
// the search walks back toward the feasible region.
DesignPoint refine_r_de(const DesignSpec& s, const DesignPoint& start, double lo, double hi, int& evaluated) {
  DesignPoint best = start;
  auto score = [&](double r) {
    DesignPoint p = evaluate_design(s, start.w3, start.l3, r);
    ++evaluated;
    if (p.feasible && better(s, p, best)) best = p;
    if (p.feasible) return s.max_noise ? -p.headroom.headroom_diode : p.noise;
    double miss = 0.0;
    miss += std::max(0.0, s.headroom_floor() - p.headroom.headroom_diode);
    miss += std::max(0.0, p.headroom.v_de - s.max_v_de);
    if (s.max_noise) miss += std::max(0.0, p.noise - *s.max_noise);
    return 1e6 + miss;
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = score(c), fd = score(d);
  for (int it = 0; it < 60 && (b - a) > 1e-9 * std::max(1.0, b); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = score(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = score(d);
    }
  }
  return best;
}

}  // namespace

void DesignSpec::validate() const {
  require(vdd > 0, "vdd must be positive");
  require(branch_current > 0, "branch_current must be positive");
  require(max_v_de > 0, "max_v_de must be positive");
  require(!w3.empty() && !l3.empty() && !r_de.empty(), "search ranges must be nonempty");
  for (double w : w3) require(w > 0, "w3 values must be positive");
  for (double l : l3) require(l > 0, "l3 values must be positive");
  for (double r : r_de) require(r >= 0, "r_de values must be non-negative");
  require(spot_hz > 0 && r_in > 0 && r_d > 0, "spot_hz, r_in and r_d must be positive");
  require(!gm1 || *gm1 > 0, "gm1 must be positive");
  require(!max_noise || *max_noise > 0, "max_noise must be positive");
  require(!min_headroom_diode || *min_headroom_diode >= 0, "min_headroom_diode must be non-negative");
  process.validate();
}

DesignSpec parse_design_spec(std::string_view text) {
  using detail::json;
  const json j = detail::parse_json_object(
      text, {"vdd", "min_headroom_diode", "max_v_de", "branch_current", "w3", "l3", "r_de", "refine", "spot_hz",
             "r_in", "r_d", "gm1", "max_noise", "process"});
  DesignSpec s;
  auto num = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = detail::number(j[k], k);
  };
  auto opt = [&](const char* k, std::optional<double>& dst) {
    if (j.contains(k)) dst = detail::number(j[k], k);
  };
  num("vdd", s.vdd);
  opt("min_headroom_diode", s.min_headroom_diode);
  num("max_v_de", s.max_v_de);
  num("branch_current", s.branch_current);
  for (const char* k : {"w3", "l3", "r_de"}) {
    if (!j.contains(k)) throw Error(ErrorKind::Parse, std::string("spec needs a ") + k + " range");
  }
  s.w3 = detail::value_list(j["w3"], "w3");
  s.l3 = detail::value_list(j["l3"], "l3");
  s.r_de = detail::value_list(j["r_de"], "r_de");
  if (j.contains("refine")) s.refine = detail::flag(j["refine"], "refine");
  num("spot_hz", s.spot_hz);
  num("r_in", s.r_in);
  num("r_d", s.r_d);
  opt("gm1", s.gm1);
  opt("max_noise", s.max_noise);
  if (j.contains("process")) s.process = detail::process_from(j["process"]);
  return s;
}

DesignPoint evaluate_design(const DesignSpec& s, double w3, double l3, double r_de) {
  DesignPoint p;
  p.w3 = w3;
  p.l3 = l3;
  p.r_de = r_de;
  MirrorTopoParams m;
  m.kind = r_de > 0 ? MirrorKind::Sdcm : MirrorKind::Conventional;
  m.mirror = {w3, l3, 1};
  m.diode = m.mirror;
  m.r_de = r_de;
  m.r_d = s.r_d;
  m.id = s.branch_current;
  m.vdd = s.vdd;
  // The headroom floor is checked here, not by MirrorTopoParams, so that a
  // floor at or above vdd reads as infeasible rather than malformed.
  p.headroom = headroom(m, s.process);

  const ProcessParams& proc = s.process;
  p.gm3 = small_signal(m.mirror, {m.id, 0.0, 0.0}, proc).gm;
  p.current_psd = sdcm_current_psd({p.gm3, r_de, s.r_d, proc.gamma_noise, proc.temperature});
  const double gm3_equiv = p.current_psd / (four_kt(proc.temperature) * proc.gamma_noise);
  p.noise = std::sqrt(ia_input_noise({input_gm(s), gm3_equiv, s.r_in, proc.gamma_noise, proc.temperature}));

  if (p.headroom.headroom_diode < s.headroom_floor()) p.violated.push_back(kHeadroom);
  if (p.headroom.v_de > s.max_v_de) p.violated.push_back(kVde);
  for (const auto& [dev, margin] : p.headroom.sat_margin) {
    if (margin < 0) p.violated.push_back("saturation(" + dev + ")");
  }
  if (s.max_noise && p.noise > *s.max_noise) p.violated.push_back(kNoise);
  p.feasible = p.violated.empty();
  return p;
}

Optimum optimize(const DesignSpec& spec, Exec exec) {
  spec.validate();
  Optimum o;
  const std::vector<DesignPoint> grid = evaluate_grid(spec, spec.r_de, exec);
  o.evaluated = static_cast<int>(grid.size());
  o.feasible = static_cast<int>(std::count_if(grid.begin(), grid.end(), [](const auto& p) { return p.feasible; }));
  auto best = best_of(spec, grid);
  if (!best) report_infeasible(grid, "mirror");
  o.best = *best;

  if (spec.refine) {
    const auto [lo, hi] = std::minmax_element(spec.r_de.begin(), spec.r_de.end());
    if (*hi > *lo) o.best = refine_r_de(spec, o.best, *lo, *hi, o.evaluated);
  }

  const std::vector<DesignPoint> base = evaluate_grid(spec, {0.0}, exec);
  o.evaluated += static_cast<int>(base.size());
  o.baseline = best_of(spec, base);
  if (o.baseline) {
    o.noise_ratio = o.best.noise / o.baseline->noise;
    o.headroom_delta = o.best.headroom.headroom_diode - o.baseline->headroom.headroom_diode;
  }

  // Cross-check the closed form against MNA: with the load resistor's own
  // noise excluded, the drain PSD is the mirror current PSD times R_D^2.
  MirrorTopoParams m;
  m.kind = o.best.r_de > 0 ? MirrorKind::Sdcm : MirrorKind::Conventional;
  m.mirror = {o.best.w3, o.best.l3, 1};
  m.diode = m.mirror;
  m.r_de = o.best.r_de;
  m.r_d = spec.r_d;
  m.id = spec.branch_current;
  m.vdd = spec.vdd;
  NoiseOptions nopt;
  nopt.flicker = false;
  nopt.exclude = {"RD"};
  const NoiseReport rep = noise_at_output(build_mirror(m), {spec.spot_hz}, spec.process, nopt, Exec::Serial);
  const double expected = o.best.current_psd * spec.r_d * spec.r_d;
  o.spot_check_rel_error = std::fabs(rep.total.front() - expected) / expected;
  return o;
}

namespace {

detail::json point_json(const DesignPoint& p) {
  detail::json j;
  j["w3"] = p.w3;
  j["l3"] = p.l3;
  j["r_de"] = p.r_de;
  j["gm3"] = p.gm3;
  j["current_psd_a2hz"] = p.current_psd;
  j["noise_v_rthz"] = p.noise;
  j["headroom_diode"] = p.headroom.headroom_diode;
  j["v_dio"] = p.headroom.v_dio;
  j["v_de"] = p.headroom.v_de;
  detail::json margins = detail::json::object();
  for (const auto& [dev, m] : p.headroom.sat_margin) margins[dev] = m;
  j["sat_margin"] = margins;
  return j;
}

}  // namespace

std::string optimum_to_json(const Optimum& o) {
  detail::json j;
  j["best"] = point_json(o.best);
  j["baseline"] = o.baseline ? point_json(*o.baseline) : detail::json(nullptr);
  j["noise_ratio"] = o.noise_ratio ? detail::json(*o.noise_ratio) : detail::json(nullptr);
  j["headroom_delta"] = o.headroom_delta ? detail::json(*o.headroom_delta) : detail::json(nullptr);
  j["evaluated"] = o.evaluated;
  j["feasible"] = o.feasible;
  j["spot_check_rel_error"] = o.spot_check_rel_error;
  return j.dump(2) + "\n";
}

}  // namespace mirrornoise
