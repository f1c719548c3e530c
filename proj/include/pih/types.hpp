#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace pih {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec2 xy() const { return {x, y}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 cross(Vec3 o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
};

// Arm-tip position, wrist force, wrist torque, all in the hole-centered frame.
struct Observation {
  Vec3 t;
  Vec3 f;
  Vec3 tau;

  std::array<double, 9> flat() const {
    return {t.x, t.y, t.z, f.x, f.y, f.z, tau.x, tau.y, tau.z};
  }
  static Observation from_flat(const std::array<double, 9>& v) {
    return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}};
  }
};

// Commanded tip displacement per control step, meters.
struct ActionVec {
  Vec3 delta;
};

constexpr int kObsDim = 9;
constexpr int kActDim = 3;
constexpr int kStateDim = 6;  // true peg + tip, for the privileged baseline

struct TransitionStep {
  Observation obs;  // observation the action was taken from
  std::array<double, kStateDim> state{};  // noise-free peg/tip at that moment
  ActionVec action;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

enum class Source { online, expert };

struct Episode {
  std::vector<TransitionStep> steps;
  Observation final_obs;  // observation after the last action
  std::array<double, kStateDim> final_state{};
  std::uint64_t seed = 0;
  bool success = false;  // any step flagged success
  Source source = Source::online;

  size_t length() const { return steps.size(); }
  double total_reward() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.reward;
    return s;
  }
};

}  // namespace pih
