#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "pih/env.hpp"
#include "pih/expert.hpp"
#include "pih/rng.hpp"

using namespace pih;
using namespace pih::env;
using namespace pih::expert;

namespace {

EnvConfig shape_cfg(Shape s) {
  EnvConfig c;
  c.shape = s;
  return c;
}

struct DemoStats {
  double success_rate = 0;
  double mean_len = 0;
};

DemoStats stats_for(const std::vector<Episode>& demos) {
  DemoStats st;
  for (const auto& ep : demos) {
    st.success_rate += ep.success ? 1.0 : 0.0;
    st.mean_len += static_cast<double>(ep.length());
  }
  st.success_rate /= static_cast<double>(demos.size());
  st.mean_len /= static_cast<double>(demos.size());
  return st;
}

}  // namespace

TEST_CASE("expert reaches at least 95% success on every shape") {
  for (Shape sh : {Shape::triangle, Shape::square, Shape::pentagon,
                   Shape::hexagon, Shape::round}) {
    const auto demos = generate_demos(shape_cfg(sh), ExpertConfig{}, 200, 42);
    const auto st = stats_for(demos);
    INFO("shape ", format_shape(sh), " success ", st.success_rate, " len ",
         st.mean_len);
    CHECK(st.success_rate >= 0.95);
  }
}

TEST_CASE("demonstrations are deliberately slow") {
  // the touch-then-slide script should take several times longer than a
  // near-optimal dash (~15-25 steps), leaving headroom for trained policies
  const auto demos = generate_demos(shape_cfg(Shape::square), ExpertConfig{},
                                    100, 7);
  const auto st = stats_for(demos);
  CHECK(st.mean_len >= 50.0);
  CHECK(st.mean_len <= 110.0);
}

TEST_CASE("generate_demos is a pure function of its seed") {
  const auto a = generate_demos(shape_cfg(Shape::pentagon), ExpertConfig{}, 8, 3);
  const auto b = generate_demos(shape_cfg(Shape::pentagon), ExpertConfig{}, 8, 3);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].length() == b[i].length());
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].success == b[i].success);
    for (size_t t = 0; t < a[i].steps.size(); ++t) {
      CHECK(a[i].steps[t].obs.flat() == b[i].steps[t].obs.flat());
      CHECK(a[i].steps[t].action.delta.x == b[i].steps[t].action.delta.x);
      CHECK(a[i].steps[t].reward == b[i].steps[t].reward);
    }
  }
  const auto c = generate_demos(shape_cfg(Shape::pentagon), ExpertConfig{}, 8, 4);
  CHECK(a[0].steps[0].obs.flat() != c[0].steps[0].obs.flat());
}

TEST_CASE("expert actions respect the command bounds") {
  const EnvConfig ec = shape_cfg(Shape::hexagon);
  const auto demos = generate_demos(ec, ExpertConfig{}, 20, 11);
  for (const auto& ep : demos)
    for (const auto& st : ep.steps) {
      CHECK(std::abs(st.action.delta.x) <= ec.xy_bound);
      CHECK(std::abs(st.action.delta.y) <= ec.xy_bound);
      CHECK(std::abs(st.action.delta.z) <= ec.z_bound);
    }
}

TEST_CASE("failed demonstrations are kept in the set") {
  EnvConfig ec = shape_cfg(Shape::square);
  ec.max_steps = 25;  // too short for the deliberate script
  const auto demos = generate_demos(ec, ExpertConfig{}, 10, 5);
  CHECK(demos.size() == 10);
  int failures = 0;
  for (const auto& ep : demos)
    if (!ep.success) {
      ++failures;
      CHECK(ep.length() == 25);
      CHECK_FALSE(ep.steps.back().success);
      CHECK(ep.steps.back().done);
    }
  CHECK(failures > 0);
}

TEST_CASE("episode structure: rewards, termination flag, final observation") {
  const auto demos = generate_demos(shape_cfg(Shape::triangle), ExpertConfig{},
                                    30, 13);
  for (const auto& ep : demos) {
    REQUIRE(ep.length() > 0);
    for (size_t t = 0; t + 1 < ep.steps.size(); ++t) {
      CHECK_FALSE(ep.steps[t].done);
      CHECK(ep.steps[t].reward == 0.0);
    }
    CHECK(ep.steps.back().done);
    CHECK(ep.success == ep.steps.back().success);
    if (ep.success) CHECK(ep.steps.back().reward == 1.0);
    CHECK(ep.total_reward() == (ep.success ? 1.0 : 0.0));
    for (const auto& v : ep.final_obs.flat()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("recorded episodes replay exactly through the simulator") {
  const EnvConfig ec = shape_cfg(Shape::square);
  const Env e(ec);
  const auto demos = generate_demos(ec, ExpertConfig{}, 5, 21);
  for (const auto& ep : demos) {
    auto [obs, state] = e.reset(ep.seed);
    for (size_t t = 0; t < ep.steps.size(); ++t) {
      CHECK(obs.flat() == ep.steps[t].obs.flat());
      const auto res = e.step(state, ep.steps[t].action);
      CHECK(res.reward == ep.steps[t].reward);
      CHECK(res.done == ep.steps[t].done);
      obs = res.obs;
    }
    CHECK(obs.flat() == ep.final_obs.flat());
  }
}

TEST_CASE("phase behavior matches the script") {
  EnvConfig ec = shape_cfg(Shape::square);
  ec.obs_noise_std.fill(0.0);
  const Env e(ec);
  ExpertConfig xc;
  xc.action_noise_std.fill(0.0);
  Rng rng(1);

  // hovering, no contact: straight descent
  auto [o1, s1] = e.reset(2);
  const auto a1 = expert_action(e, s1, xc, rng);
  CHECK(a1.delta.x == 0.0);
  CHECK(a1.delta.y == 0.0);
  CHECK(a1.delta.z == -ec.z_bound);

  // pressed on the plate at (+d, 0): slide in -x, no sideways drift
  auto [o2, s2] = e.reset(3);
  s2.peg = {0.02, 0.0, 0.0};
  s2.tip = {0.02 - s2.wrist_bias.x, -s2.wrist_bias.y, ec.hover_z};
  for (int t = 0; t < 4; ++t) (void)e.step(s2, {{0, 0, -1e-3}});
  REQUIRE(e.probe(s2).support_n > 0.05);
  const auto a2 = expert_action(e, s2, xc, rng);
  CHECK(a2.delta.x < 0.0);
  CHECK(std::abs(a2.delta.y) < 0.2 * std::abs(a2.delta.x));

  // centered over the hole: descend to insert
  auto [o3, s3] = e.reset(4);
  s3.peg = {0, 0, 0};
  s3.tip = {-s3.wrist_bias.x, -s3.wrist_bias.y, ec.hover_z};
  const auto a3 = expert_action(e, s3, xc, rng);
  CHECK(a3.delta.z == -ec.z_bound);
}

// manual tuning aid: run with   ./test_expert -tc='*calibration*' -ns
TEST_CASE("calibration report" * doctest::skip()) {
  for (Shape sh : {Shape::triangle, Shape::square, Shape::pentagon,
                   Shape::hexagon, Shape::round}) {
    const auto demos = generate_demos(shape_cfg(sh), ExpertConfig{}, 200, 42);
    const auto st = stats_for(demos);
    int worst = 0;
    for (const auto& ep : demos)
      worst = std::max(worst, static_cast<int>(ep.length()));
    std::printf("%-9s success %.3f mean_len %6.1f max_len %d\n",
                format_shape(sh).c_str(), st.success_rate, st.mean_len, worst);
  }
}
