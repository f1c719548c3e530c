#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pih/types.hpp"

// Finite planar transformation groups and their actions on points,
// observations, actions and episodes.
//
// Angles are stored as exact rationals (fractions of a full turn) so that
// canonicalized elements compare equal without float tolerance; the 2x2
// matrix is derived on demand.

namespace pih::sym {

struct Rational {
  long long num = 0;
  long long den = 1;  // canonical: den > 0, gcd(|num|, den) == 1
};

Rational make_rational(long long num, long long den);
Rational rat_add(Rational a, Rational b);
Rational rat_sub(Rational a, Rational b);
Rational rat_half(Rational a);
Rational rat_double(Rational a);
// reduce into [0, modulus) where modulus is 1 (full turn) or 1/2 (mirror axis)
Rational rat_mod(Rational a, Rational modulus);
bool rat_eq(Rational a, Rational b);
double rat_to_double(Rational a);

struct GroupElement {
  enum class Kind { rotation, reflection };
  Kind kind = Kind::rotation;
  // rotation: CCW angle; reflection: mirror-axis angle from +X.
  // Canonical range: rotation in [0,1) turns, reflection axis in [0,1/2).
  Rational turns{0, 1};

  double angle() const;                   // radians
  std::array<double, 4> matrix() const;   // row-major 2x2
  bool is_identity() const;
};

bool operator==(const GroupElement& a, const GroupElement& b);
bool operator!=(const GroupElement& a, const GroupElement& b);

GroupElement identity();
GroupElement rotation(Rational turns);
GroupElement reflection(Rational axis_turns);

Vec2 apply_point(const GroupElement& g, Vec2 p);
GroupElement compose(const GroupElement& g1, const GroupElement& g2);
GroupElement inverse(const GroupElement& g);

enum class GroupName { Fx, Fy, Fxy, Cyclic, FyCyclic, FxyCyclic };

struct SymGroup {
  GroupName name = GroupName::Cyclic;
  int n = 1;  // cyclic order parameter; 1 for the pure reflection groups
  // identity first, then rotations by increasing angle, then reflections by
  // increasing axis angle
  std::vector<GroupElement> elements;

  size_t size() const { return elements.size(); }
  std::string spec() const;
};

// throws std::invalid_argument on n < 1, std::logic_error on closure failure
SymGroup build_group(GroupName name, int n = 1);
// accepts "e", "fx", "fy", "fxy", "c<n>", "fy*c<n>", "fxy*c<n>"
SymGroup parse_group(const std::string& spec);
std::string format_group(GroupName name, int n);

// xy_vector: the torque xy pair transforms exactly like a position vector
// (z untouched). physical: torque is a pseudovector, so reflections flip the
// sign of the transformed xy pair and negate tau_z.
enum class TorqueConvention { xy_vector, physical };

TorqueConvention parse_convention(const std::string& s);
std::string format_convention(TorqueConvention c);

// Planar pairs (t_xy, f_xy, tau_xy) transform by apply_point; z components
// pass through. Under TorqueConvention::physical, torque transforms as a
// pseudovector: reflections add a sign flip on tau_xy relative to apply_point
// and negate tau_z. Rotations are identical in both conventions.
Observation act_observation(const GroupElement& g, const Observation& o,
                            TorqueConvention convention);
ActionVec act_action(const GroupElement& g, const ActionVec& a);
Episode act_episode(const GroupElement& g, const Episode& ep,
                    TorqueConvention convention);

}  // namespace pih::sym
