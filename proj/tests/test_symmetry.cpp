#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "pih/rng.hpp"
#include "pih/symmetry.hpp"

using namespace pih;
using namespace pih::sym;

namespace {

constexpr double kTol = 1e-12;

std::array<double, 4> mat_mul(const std::array<double, 4>& a,
                              const std::array<double, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

double mat_dist(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double d = 0;
  for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double det(const std::array<double, 4>& m) { return m[0] * m[3] - m[1] * m[2]; }

std::vector<SymGroup> sample_groups() {
  std::vector<SymGroup> gs;
  gs.push_back(parse_group("e"));
  gs.push_back(parse_group("fx"));
  gs.push_back(parse_group("fy"));
  gs.push_back(parse_group("fxy"));
  for (int n : {1, 2, 3, 4, 5, 6, 8}) gs.push_back(build_group(GroupName::Cyclic, n));
  for (int n : {3, 5}) gs.push_back(build_group(GroupName::FyCyclic, n));
  for (int n : {4, 6}) gs.push_back(build_group(GroupName::FxyCyclic, n));
  return gs;
}

GroupElement rot_turns(long long num, long long den) {
  return rotation(make_rational(num, den));
}

}  // namespace

TEST_CASE("group elements map to orthogonal matrices with the right determinant") {
  for (const auto& g : sample_groups()) {
    for (const auto& el : g.elements) {
      const auto m = el.matrix();
      // orthogonality: M M^T = I
      const std::array<double, 4> mt{m[0], m[2], m[1], m[3]};
      CHECK(mat_dist(mat_mul(m, mt), {1, 0, 0, 1}) < kTol);
      const double want_det =
          el.kind == GroupElement::Kind::rotation ? 1.0 : -1.0;
      CHECK(std::abs(det(m) - want_det) < kTol);
    }
  }
}

TEST_CASE("composition matches matrix products and group axioms hold") {
  for (const auto& g : sample_groups()) {
    const auto& els = g.elements;
    REQUIRE(els[0].is_identity());
    for (const auto& a : els) {
      // inverse present and correct
      const GroupElement ai = inverse(a);
      CHECK(compose(a, ai).is_identity());
      CHECK(compose(ai, a).is_identity());
      bool found = false;
      for (const auto& b : els) found = found || b == ai;
      CHECK(found);
      for (const auto& b : els) {
        const GroupElement c = compose(a, b);
        bool closed = false;
        for (const auto& e : els) closed = closed || e == c;
        CHECK(closed);
        CHECK(mat_dist(c.matrix(), mat_mul(a.matrix(), b.matrix())) < kTol);
      }
    }
    if (els.size() <= 12) {
      for (const auto& a : els)
        for (const auto& b : els)
          for (const auto& c : els)
            CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
    }
  }
}

TEST_CASE("group orders match the defining sizes") {
  CHECK(parse_group("e").size() == 1);
  CHECK(parse_group("fx").size() == 2);
  CHECK(parse_group("fy").size() == 2);
  CHECK(parse_group("fxy").size() == 4);
  CHECK(parse_group("c4").size() == 4);
  CHECK(parse_group("c1").size() == 1);
  CHECK(parse_group("fxy*c4").size() == 8);
  CHECK(parse_group("fy*c3").size() == 6);
  CHECK(parse_group("fy*c5").size() == 10);
  CHECK(parse_group("fxy*c6").size() == 12);
  // odd n forces the half-turn in, doubling the rotation count
  CHECK(parse_group("fxy*c3").size() == 12);
}

TEST_CASE("element ordering is identity, rotations ascending, reflections ascending") {
  const auto g = parse_group("fxy*c4");
  REQUIRE(g.size() == 8);
  CHECK(g.elements[0].is_identity());
  for (size_t i = 1; i < 4; ++i) {
    CHECK(g.elements[i].kind == GroupElement::Kind::rotation);
    CHECK(g.elements[i].angle() > g.elements[i - 1].angle());
  }
  for (size_t i = 4; i < 8; ++i)
    CHECK(g.elements[i].kind == GroupElement::Kind::reflection);
  for (size_t i = 5; i < 8; ++i)
    CHECK(g.elements[i].angle() > g.elements[i - 1].angle());
}

TEST_CASE("apply_point worked examples") {
  const Vec2 ex = apply_point(rot_turns(1, 4), {1, 0});
  CHECK(std::abs(ex.x - 0.0) < kTol);
  CHECK(std::abs(ex.y - 1.0) < kTol);

  const GroupElement rx = reflection({0, 1});
  const Vec2 p{0.3, -1.7};
  const Vec2 prx = apply_point(rx, p);
  CHECK(prx.x == doctest::Approx(p.x).epsilon(kTol));
  CHECK(prx.y == doctest::Approx(-p.y).epsilon(kTol));

  const Vec2 ppi = apply_point(rot_turns(1, 2), p);
  CHECK(ppi.x == doctest::Approx(-p.x).epsilon(kTol));
  CHECK(ppi.y == doctest::Approx(-p.y).epsilon(kTol));
}

TEST_CASE("compose worked examples") {
  const GroupElement rx = reflection({0, 1});
  const GroupElement ry = reflection({1, 4});
  CHECK(compose(rx, ry) == rot_turns(1, 2));
  const GroupElement r3 = rot_turns(1, 3);
  CHECK(compose(r3, r3) == rot_turns(2, 3));
  for (const auto& g : parse_group("fxy*c6").elements) {
    CHECK(compose(identity(), g) == g);
    CHECK(compose(g, identity()) == g);
  }
}

TEST_CASE("composition of applications equals application of composition") {
  Rng rng(42);
  for (const auto& grp : sample_groups()) {
    for (const auto& a : grp.elements)
      for (const auto& b : grp.elements) {
        const Vec2 p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec2 lhs = apply_point(compose(a, b), p);
        const Vec2 rhs = apply_point(a, apply_point(b, p));
        CHECK(std::abs(lhs.x - rhs.x) < kTol);
        CHECK(std::abs(lhs.y - rhs.y) < kTol);
      }
  }
}

TEST_CASE("apply_point preserves Euclidean norm") {
  Rng rng(7);
  for (const auto& grp : sample_groups())
    for (const auto& g : grp.elements) {
      const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      CHECK(std::abs(apply_point(g, p).norm() - p.norm()) < kTol);
    }
}

TEST_CASE("group spec strings round-trip through parse and format") {
  const std::vector<std::string> canonical = {
      "e",      "fx",     "fy",      "fxy",    "c2",     "c3",
      "c4",     "c6",     "c48",     "fy*c3",  "fy*c5",  "fxy*c4",
      "fxy*c6", "fy*c1",  "fxy*c1",  "c12"};
  for (const auto& s : canonical) {
    const SymGroup g = parse_group(s);
    CHECK(g.spec() == s);
    const SymGroup g2 = parse_group(g.spec());
    CHECK(g2.name == g.name);
    CHECK(g2.n == g.n);
    REQUIRE(g2.size() == g.size());
    for (size_t i = 0; i < g.size(); ++i) CHECK(g2.elements[i] == g.elements[i]);
  }
  // "c1" names the trivial group; canonical spelling is "e"
  CHECK(parse_group("c1").spec() == "e");

  for (const std::string bad :
       {"", "c0", "c-3", "cx", "q3", "fx*c2", "fy*", "fy*c", "fxy*c0",
        "c4 ", "C4", "fxyc4"})
    CHECK_THROWS_AS((void)parse_group(bad), std::invalid_argument);
  CHECK_THROWS_AS((void)build_group(GroupName::Cyclic, 0),
                  std::invalid_argument);
}

TEST_CASE("act_observation transforms planar pairs and honors torque conventions") {
  Observation o;
  o.t = {1, 2, 3};
  o.f = {0.5, 0, 1};
  o.tau = {0, 0.1, 0};
  for (auto conv : {TorqueConvention::xy_vector, TorqueConvention::physical}) {
    const Observation r = act_observation(rot_turns(1, 2), o, conv);
    CHECK(r.t.x == doctest::Approx(-1).epsilon(kTol));
    CHECK(r.t.y == doctest::Approx(-2).epsilon(kTol));
    CHECK(r.t.z == 3.0);
    CHECK(r.f.x == doctest::Approx(-0.5).epsilon(kTol));
    CHECK(std::abs(r.f.y) < kTol);
    CHECK(r.f.z == 1.0);
    CHECK(std::abs(r.tau.x) < kTol);
    CHECK(r.tau.y == doctest::Approx(-0.1).epsilon(kTol));
    CHECK(r.tau.z == 0.0);

    const Observation same = act_observation(identity(), o, conv);
    CHECK(same.flat() == o.flat());
  }

  Observation q;
  q.tau = {0.2, 0.3, 0.4};
  const GroupElement rx = reflection({0, 1});
  const Observation qv = act_observation(rx, q, TorqueConvention::xy_vector);
  CHECK(qv.tau.x == doctest::Approx(0.2).epsilon(kTol));
  CHECK(qv.tau.y == doctest::Approx(-0.3).epsilon(kTol));
  CHECK(qv.tau.z == doctest::Approx(0.4).epsilon(kTol));
  // pseudovector: extra sign flip on the pair, z negated
  const Observation qp = act_observation(rx, q, TorqueConvention::physical);
  CHECK(qp.tau.x == doctest::Approx(-0.2).epsilon(kTol));
  CHECK(qp.tau.y == doctest::Approx(0.3).epsilon(kTol));
  CHECK(qp.tau.z == doctest::Approx(-0.4).epsilon(kTol));
}

TEST_CASE("act_action transforms the planar displacement only") {
  const ActionVec a{{0.1, 0.0, 0.002}};
  const ActionVec r = act_action(rot_turns(1, 4), a);
  CHECK(std::abs(r.delta.x) < kTol);
  CHECK(r.delta.y == doctest::Approx(0.1).epsilon(kTol));
  CHECK(r.delta.z == 0.002);

  const ActionVec b{{0.1, -0.2, 0.0}};
  const ActionVec rb = act_action(reflection({1, 4}), b);
  CHECK(rb.delta.x == doctest::Approx(-0.1).epsilon(kTol));
  CHECK(rb.delta.y == doctest::Approx(-0.2).epsilon(kTol));

  const ActionVec ri = act_action(identity(), b);
  CHECK(ri.delta.x == b.delta.x);
  CHECK(ri.delta.y == b.delta.y);
  CHECK(ri.delta.z == b.delta.z);
}

namespace {

Episode random_episode(Rng& rng, size_t n) {
  Episode ep;
  ep.seed = 99;
  for (size_t i = 0; i < n; ++i) {
    TransitionStep st;
    st.obs.t = {rng.normal(), rng.normal(), rng.normal()};
    st.obs.f = {rng.normal(), rng.normal(), rng.normal()};
    st.obs.tau = {rng.normal(), rng.normal(), rng.normal()};
    st.action.delta = {rng.normal(), rng.normal(), rng.normal()};
    st.reward = rng.uniform();
    st.done = i + 1 == n;
    st.success = st.done;
    ep.steps.push_back(st);
  }
  ep.final_obs.t = {rng.normal(), rng.normal(), rng.normal()};
  ep.final_obs.f = {rng.normal(), rng.normal(), rng.normal()};
  ep.final_obs.tau = {rng.normal(), rng.normal(), rng.normal()};
  ep.success = true;
  return ep;
}

}  // namespace

TEST_CASE("act_episode maps every obs and action, leaving scalars alone") {
  Rng rng(5);
  const Episode ep = random_episode(rng, 4);

  const Episode same = act_episode(identity(), ep, TorqueConvention::xy_vector);
  REQUIRE(same.length() == ep.length());
  for (size_t i = 0; i < ep.length(); ++i) {
    CHECK(same.steps[i].obs.flat() == ep.steps[i].obs.flat());
    CHECK(same.steps[i].action.delta.x == ep.steps[i].action.delta.x);
    CHECK(same.steps[i].reward == ep.steps[i].reward);
    CHECK(same.steps[i].done == ep.steps[i].done);
    CHECK(same.steps[i].success == ep.steps[i].success);
  }
  CHECK(same.final_obs.flat() == ep.final_obs.flat());

  const Episode rpi = act_episode(rot_turns(1, 2), ep, TorqueConvention::xy_vector);
  for (size_t i = 0; i < ep.length(); ++i) {
    CHECK(rpi.steps[i].obs.t.x ==
          doctest::Approx(-ep.steps[i].obs.t.x).epsilon(kTol));
    CHECK(rpi.steps[i].obs.t.z == ep.steps[i].obs.t.z);
    CHECK(rpi.steps[i].action.delta.y ==
          doctest::Approx(-ep.steps[i].action.delta.y).epsilon(kTol));
    CHECK(rpi.steps[i].reward == ep.steps[i].reward);
  }
}

TEST_CASE("episode and observation actions are group homomorphisms") {
  Rng rng(17);
  const Episode ep = random_episode(rng, 3);
  for (auto conv : {TorqueConvention::xy_vector, TorqueConvention::physical}) {
    for (const auto& grp : {parse_group("fxy*c4"), parse_group("fy*c3")}) {
      for (const auto& g1 : grp.elements)
        for (const auto& g2 : grp.elements) {
          const Episode lhs = act_episode(compose(g1, g2), ep, conv);
          const Episode rhs = act_episode(g1, act_episode(g2, ep, conv), conv);
          for (size_t i = 0; i < ep.length(); ++i) {
            const auto a = lhs.steps[i].obs.flat();
            const auto b = rhs.steps[i].obs.flat();
            for (int k = 0; k < 9; ++k) CHECK(std::abs(a[k] - b[k]) < kTol);
            CHECK(std::abs(lhs.steps[i].action.delta.x -
                           rhs.steps[i].action.delta.x) < kTol);
            CHECK(std::abs(lhs.steps[i].action.delta.y -
                           rhs.steps[i].action.delta.y) < kTol);
          }
        }
    }
  }
}

TEST_CASE("planar f.tau dot product: conventions differ exactly on reflections") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Observation o;
    o.f = {rng.normal(), rng.normal(), rng.normal()};
    o.tau = {rng.normal(), rng.normal(), rng.normal()};
    const double base = o.f.xy().dot(o.tau.xy());
    for (const auto& g : parse_group("fxy*c4").elements) {
      const Observation ov = act_observation(g, o, TorqueConvention::xy_vector);
      CHECK(ov.f.xy().dot(ov.tau.xy()) == doctest::Approx(base).epsilon(1e-9));
      const Observation op = act_observation(g, o, TorqueConvention::physical);
      const double want =
          g.kind == GroupElement::Kind::reflection ? -base : base;
      CHECK(op.f.xy().dot(op.tau.xy()) == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("torque convention strings parse and format") {
  CHECK(parse_convention("physical") == TorqueConvention::physical);
  CHECK(parse_convention("xy_vector") == TorqueConvention::xy_vector);
  CHECK(parse_convention("paper") == TorqueConvention::xy_vector);
  CHECK(format_convention(TorqueConvention::physical) == "physical");
  CHECK(format_convention(TorqueConvention::xy_vector) == "xy_vector");
  CHECK_THROWS_AS((void)parse_convention("pseudo"), std::invalid_argument);
}
