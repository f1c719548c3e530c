#include "pih/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pih::sym {

namespace {
constexpr Rational kHalf{1, 2};
constexpr Rational kOne{1, 1};
}  // namespace

Rational make_rational(long long num, long long den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(std::llabs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

Rational rat_add(Rational a, Rational b) {
  return make_rational(a.num * b.den + b.num * a.den, a.den * b.den);
}

Rational rat_sub(Rational a, Rational b) {
  return make_rational(a.num * b.den - b.num * a.den, a.den * b.den);
}

Rational rat_half(Rational a) { return make_rational(a.num, a.den * 2); }

Rational rat_double(Rational a) { return make_rational(a.num * 2, a.den); }

Rational rat_mod(Rational a, Rational modulus) {
  // a - floor(a/modulus)*modulus, exact
  const long long num = a.num * modulus.den;
  const long long den = a.den * modulus.num;  // a/modulus = num/den
  long long q = num / den;
  if (num % den != 0 && ((num < 0) != (den < 0))) q -= 1;  // floor division
  Rational scaled = make_rational(modulus.num * q, modulus.den);
  return rat_sub(a, scaled);
}

bool rat_eq(Rational a, Rational b) {
  return a.num == b.num && a.den == b.den;  // both canonical
}

double rat_to_double(Rational a) {
  return static_cast<double>(a.num) / static_cast<double>(a.den);
}

double GroupElement::angle() const {
  return 2.0 * std::numbers::pi * rat_to_double(turns);
}

std::array<double, 4> GroupElement::matrix() const {
  if (kind == Kind::rotation) {
    const double th = angle();
    const double c = std::cos(th), s = std::sin(th);
    return {c, -s, s, c};
  }
  // mirror about a line at angle phi: [[cos 2phi, sin 2phi], [sin 2phi, -cos 2phi]]
  const double two_phi = 2.0 * angle();
  const double c = std::cos(two_phi), s = std::sin(two_phi);
  return {c, s, s, -c};
}

bool GroupElement::is_identity() const {
  return kind == Kind::rotation && turns.num == 0;
}

bool operator==(const GroupElement& a, const GroupElement& b) {
  return a.kind == b.kind && rat_eq(a.turns, b.turns);
}

bool operator!=(const GroupElement& a, const GroupElement& b) {
  return !(a == b);
}

GroupElement identity() { return {GroupElement::Kind::rotation, {0, 1}}; }

GroupElement rotation(Rational turns) {
  return {GroupElement::Kind::rotation, rat_mod(turns, kOne)};
}

GroupElement reflection(Rational axis_turns) {
  // axis phi and phi + 1/2 turn are the same mirror line
  return {GroupElement::Kind::reflection, rat_mod(axis_turns, kHalf)};
}

Vec2 apply_point(const GroupElement& g, Vec2 p) {
  const auto m = g.matrix();
  return {m[0] * p.x + m[1] * p.y, m[2] * p.x + m[3] * p.y};
}

GroupElement compose(const GroupElement& g1, const GroupElement& g2) {
  using K = GroupElement::Kind;
  // rot(a)rot(b) = rot(a+b); refl(p)refl(q) = rot(2(p-q));
  // refl(p)rot(b) = refl(p - b/2); rot(a)refl(q) = refl(q + a/2)
  if (g1.kind == K::rotation && g2.kind == K::rotation)
    return rotation(rat_add(g1.turns, g2.turns));
  if (g1.kind == K::reflection && g2.kind == K::reflection)
    return rotation(rat_double(rat_sub(g1.turns, g2.turns)));
  if (g1.kind == K::reflection)
    return reflection(rat_sub(g1.turns, rat_half(g2.turns)));
  return reflection(rat_add(g2.turns, rat_half(g1.turns)));
}

GroupElement inverse(const GroupElement& g) {
  if (g.kind == GroupElement::Kind::reflection) return g;  // involution
  return rotation(make_rational(-g.turns.num, g.turns.den));
}

namespace {

bool contains(const std::vector<GroupElement>& v, const GroupElement& g) {
  return std::find(v.begin(), v.end(), g) != v.end();
}

void sort_canonical(std::vector<GroupElement>& els) {
  std::sort(els.begin(), els.end(),
            [](const GroupElement& a, const GroupElement& b) {
              if (a.kind != b.kind)
                return a.kind == GroupElement::Kind::rotation;
              const double ta = rat_to_double(a.turns);
              const double tb = rat_to_double(b.turns);
              return ta < tb;
            });
}

}  // namespace

SymGroup build_group(GroupName name, int n) {
  const bool cyclic_kind = name == GroupName::Cyclic ||
                           name == GroupName::FyCyclic ||
                           name == GroupName::FxyCyclic;
  if (cyclic_kind && n < 1)
    throw std::invalid_argument("cyclic order must be >= 1");
  if (!cyclic_kind) n = 1;

  std::vector<GroupElement> gens;
  switch (name) {
    case GroupName::Fx:
      gens.push_back(reflection({0, 1}));
      break;
    case GroupName::Fy:
      gens.push_back(reflection({1, 4}));
      break;
    case GroupName::Fxy:
      gens.push_back(reflection({0, 1}));
      gens.push_back(reflection({1, 4}));
      break;
    case GroupName::Cyclic:
      gens.push_back(rotation(make_rational(1, n)));
      break;
    case GroupName::FyCyclic:
      gens.push_back(reflection({1, 4}));
      gens.push_back(rotation(make_rational(1, n)));
      break;
    case GroupName::FxyCyclic:
      gens.push_back(reflection({0, 1}));
      gens.push_back(reflection({1, 4}));
      gens.push_back(rotation(make_rational(1, n)));
      break;
  }

  std::vector<GroupElement> els{identity()};
  for (const auto& g : gens)
    if (!contains(els, g)) els.push_back(g);
  // closure by repeated products; element count is tiny so quadratic is fine
  for (bool grew = true; grew;) {
    grew = false;
    const size_t sz = els.size();
    for (size_t i = 0; i < sz; ++i)
      for (size_t j = 0; j < sz; ++j) {
        const GroupElement c = compose(els[i], els[j]);
        if (!contains(els, c)) {
          els.push_back(c);
          grew = true;
        }
      }
    if (els.size() > 4096) throw std::logic_error("group closure runaway");
  }

  // axiom verification: identity, inverses, closure
  if (!contains(els, identity())) throw std::logic_error("group lost identity");
  for (const auto& g : els)
    if (!contains(els, inverse(g)))
      throw std::logic_error("group element without inverse");
  for (const auto& a : els)
    for (const auto& b : els)
      if (!contains(els, compose(a, b)))
        throw std::logic_error("group not closed");

  sort_canonical(els);
  SymGroup out;
  out.name = name;
  out.n = n;
  out.elements = std::move(els);
  return out;
}

std::string format_group(GroupName name, int n) {
  switch (name) {
    case GroupName::Fx:
      return "fx";
    case GroupName::Fy:
      return "fy";
    case GroupName::Fxy:
      return "fxy";
    case GroupName::Cyclic:
      return n == 1 ? "e" : "c" + std::to_string(n);
    case GroupName::FyCyclic:
      return "fy*c" + std::to_string(n);
    case GroupName::FxyCyclic:
      return "fxy*c" + std::to_string(n);
  }
  return "?";
}

std::string SymGroup::spec() const { return format_group(name, n); }

namespace {

int parse_cyclic_order(const std::string& s, size_t pos) {
  // expects "c<digits>" at pos, consuming the rest of the string
  if (pos >= s.size() || s[pos] != 'c')
    throw std::invalid_argument("bad group spec: " + s);
  const std::string digits = s.substr(pos + 1);
  if (digits.empty() ||
      digits.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("bad group spec: " + s);
  const long v = std::strtol(digits.c_str(), nullptr, 10);
  if (v < 1 || v > 1024)
    throw std::invalid_argument("cyclic order out of range: " + s);
  return static_cast<int>(v);
}

}  // namespace

SymGroup parse_group(const std::string& spec) {
  if (spec == "e") return build_group(GroupName::Cyclic, 1);
  if (spec == "fx") return build_group(GroupName::Fx);
  if (spec == "fy") return build_group(GroupName::Fy);
  if (spec == "fxy") return build_group(GroupName::Fxy);
  if (spec.rfind("fy*", 0) == 0)
    return build_group(GroupName::FyCyclic, parse_cyclic_order(spec, 3));
  if (spec.rfind("fxy*", 0) == 0)
    return build_group(GroupName::FxyCyclic, parse_cyclic_order(spec, 4));
  if (!spec.empty() && spec[0] == 'c')
    return build_group(GroupName::Cyclic, parse_cyclic_order(spec, 0));
  throw std::invalid_argument("bad group spec: " + spec);
}

TorqueConvention parse_convention(const std::string& s) {
  if (s == "xy_vector" || s == "paper") return TorqueConvention::xy_vector;
  if (s == "physical") return TorqueConvention::physical;
  throw std::invalid_argument("bad torque convention: " + s);
}

std::string format_convention(TorqueConvention c) {
  return c == TorqueConvention::xy_vector ? "xy_vector" : "physical";
}

Observation act_observation(const GroupElement& g, const Observation& o,
                            TorqueConvention convention) {
  Observation out = o;
  const Vec2 t = apply_point(g, o.t.xy());
  const Vec2 f = apply_point(g, o.f.xy());
  Vec2 tau = apply_point(g, o.tau.xy());
  double tau_z = o.tau.z;
  if (convention == TorqueConvention::physical &&
      g.kind == GroupElement::Kind::reflection) {
    tau = -tau;
    tau_z = -tau_z;
  }
  out.t.x = t.x;
  out.t.y = t.y;
  out.f.x = f.x;
  out.f.y = f.y;
  out.tau.x = tau.x;
  out.tau.y = tau.y;
  out.tau.z = tau_z;
  return out;
}

ActionVec act_action(const GroupElement& g, const ActionVec& a) {
  const Vec2 d = apply_point(g, a.delta.xy());
  return {{d.x, d.y, a.delta.z}};
}

Episode act_episode(const GroupElement& g, const Episode& ep,
                    TorqueConvention convention) {
  Episode out = ep;
  for (auto& st : out.steps) {
    st.obs = act_observation(g, st.obs, convention);
    st.action = act_action(g, st.action);
  }
  out.final_obs = act_observation(g, ep.final_obs, convention);
  return out;
}

}  // namespace pih::sym
