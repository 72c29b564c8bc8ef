#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mirrornoise/error.hpp"
#include "mirrornoise/optimize.hpp"
#include "support.hpp"

using namespace mirrornoise;

namespace {

DesignSpec small_spec() {
  DesignSpec s;
  s.w3 = {2e-6, 5e-6, 10e-6, 20e-6};
  s.l3 = {0.5e-6, 1e-6, 2e-6};
  s.r_de = {0.0, 10e3, 25e3, 50e3, 75e3, 100e3};
  return s;
}

// Exhaustive reference: the lowest-noise feasible point, ties broken by
// the geometry tuple.
DesignPoint brute_force(const DesignSpec& s) {
  std::optional<DesignPoint> best;
  for (double w : s.w3) {
    for (double l : s.l3) {
      for (double r : s.r_de) {
        const DesignPoint p = evaluate_design(s, w, l, r);
        if (!p.feasible) continue;
        if (!best || std::tie(p.noise, p.w3, p.l3, p.r_de) < std::tie(best->noise, best->w3, best->l3, best->r_de)) {
          best = p;
        }
      }
    }
  }
  if (!best) throw std::runtime_error("nothing feasible");
  return *best;
}

}  // namespace

TEST(EvaluateDesign, ConstraintsReported) {
  DesignSpec s = small_spec();
  const DesignPoint ok = evaluate_design(s, 20e-6, 1e-6, 50e3);
  EXPECT_TRUE(ok.feasible);
  EXPECT_DOUBLE_EQ(ok.headroom.v_de, 0.05);
  const DesignPoint hot = evaluate_design(s, 20e-6, 1e-6, 200e3);
  EXPECT_FALSE(hot.feasible);
  EXPECT_NE(std::find(hot.violated.begin(), hot.violated.end(), "max_v_de"), hot.violated.end());
  s.min_headroom_diode = 0.79;
  const DesignPoint tight = evaluate_design(s, 20e-6, 1e-6, 50e3);
  EXPECT_EQ(tight.violated.front(), "min_headroom_diode");
}

TEST(EvaluateDesign, DegenerationLowersNoise) {
  const DesignSpec s = small_spec();
  double prev = INFINITY;
  for (double r : {0.0, 10e3, 50e3, 100e3}) {
    const double n = evaluate_design(s, 10e-6, 1e-6, r).noise;
    EXPECT_LT(n, prev);
    prev = n;
  }
}

TEST(Optimize, MatchesBruteForce) {
  const DesignSpec s = small_spec();
  const Optimum o = optimize(s);
  const DesignPoint ref = brute_force(s);
  EXPECT_EQ(o.best.w3, ref.w3);
  EXPECT_EQ(o.best.l3, ref.l3);
  EXPECT_EQ(o.best.r_de, ref.r_de);
  EXPECT_EQ(o.best.noise, ref.noise);
  EXPECT_EQ(o.evaluated, 4 * 3 * 6 + 4 * 3);
  EXPECT_LT(o.spot_check_rel_error, 1e-9);
}

TEST(Optimize, RandomGridsAgreeWithBruteForce) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> w(1e-6, 30e-6), l(0.3e-6, 3e-6), r(0.0, 150e3);
  for (int trial = 0; trial < 20; ++trial) {
    DesignSpec s;
    for (int i = 0; i < 3; ++i) s.w3.push_back(w(rng));
    for (int i = 0; i < 3; ++i) s.l3.push_back(l(rng));
    for (int i = 0; i < 4; ++i) s.r_de.push_back(r(rng));
    s.r_de.push_back(0.0);
    const DesignPoint ref = brute_force(s);
    const Optimum o = optimize(s, trial % 2 ? Exec::Parallel : Exec::Serial);
    EXPECT_EQ(o.best.noise, ref.noise) << trial;
  }
}

TEST(Optimize, OrderInvariant) {
  DesignSpec a = small_spec();
  DesignSpec b = a;
  std::reverse(b.w3.begin(), b.w3.end());
  std::reverse(b.r_de.begin(), b.r_de.end());
  std::rotate(b.l3.begin(), b.l3.begin() + 1, b.l3.end());
  EXPECT_EQ(optimum_to_json(optimize(a)), optimum_to_json(optimize(b)));
}

TEST(Optimize, BaselineComparison) {
  const Optimum o = optimize(small_spec());
  ASSERT_TRUE(o.baseline && o.noise_ratio && o.headroom_delta);
  EXPECT_EQ(o.baseline->r_de, 0.0);
  EXPECT_GT(o.best.r_de, 0.0);
  EXPECT_LT(*o.noise_ratio, 1.0);
  EXPECT_LT(*o.headroom_delta, 0.0);  // degeneration spends headroom
}

TEST(Optimize, RefinementNeverWorse) {
  DesignSpec s = small_spec();
  const Optimum grid = optimize(s);
  s.refine = true;
  const Optimum fine = optimize(s);
  EXPECT_LE(fine.best.noise, grid.best.noise);
  EXPECT_TRUE(fine.best.feasible);
  EXPECT_LE(fine.best.headroom.v_de, s.max_v_de);
  EXPECT_GT(fine.evaluated, grid.evaluated);
  // The v_de cap binds: refinement lands on it.
  EXPECT_NEAR(fine.best.r_de, s.max_v_de / s.branch_current, 1.0);
}

TEST(Optimize, NoiseCapMaximizesHeadroom) {
  DesignSpec s = small_spec();
  const Optimum free = optimize(s);
  s.max_noise = free.best.noise * 1.05;
  const Optimum capped = optimize(s);
  EXPECT_LE(capped.best.noise, *s.max_noise);
  EXPECT_GE(capped.best.headroom.headroom_diode, free.best.headroom.headroom_diode);
}

TEST(Optimize, InfeasibleNamesBindingConstraint) {
  DesignSpec s = small_spec();
  s.min_headroom_diode = 0.79;
  try {
    optimize(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("binding constraint min_headroom_diode"), std::string::npos) << msg;
    EXPECT_NE(msg.find("of 72 candidates"), std::string::npos) << msg;
  }
  s = small_spec();
  s.max_noise = 1e-12;
  try {
    optimize(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("max_noise"), std::string::npos);
  }
}

TEST(Optimize, InvalidSpec) {
  DesignSpec s = small_spec();
  s.w3.clear();
  EXPECT_THROW(optimize(s), Error);
  s = small_spec();
  s.r_de = {-1.0};
  EXPECT_THROW(optimize(s), Error);
}

TEST(DesignSpecJson, ParseAndOutput) {
  const DesignSpec s = parse_design_spec(
      R"({"vdd":0.8,"w3":[5e-6,10e-6],"l3":{"start":0.5e-6,"stop":2e-6,"points":3,"scale":"lin"},
          "r_de":["0","50k"],"refine":false,"max_v_de":0.1,"process":{"gamma_noise":1}})");
  EXPECT_EQ(s.l3.size(), 3u);
  EXPECT_EQ(s.r_de[1], 50e3);
  const std::string out = optimum_to_json(optimize(s));
  for (const char* key : {"\"best\"", "\"baseline\"", "\"noise_ratio\"", "\"headroom_delta\"", "\"spot_check_rel_error\""}) {
    EXPECT_NE(out.find(key), std::string::npos) << key;
  }
  EXPECT_THROW(parse_design_spec(R"({"w3":[1e-6],"l3":[1e-6]})"), Error);
  EXPECT_THROW(parse_design_spec(R"({"w3":[1e-6],"l3":[1e-6],"r_de":[0],"bogus":1})"), Error);
}
