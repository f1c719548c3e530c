#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pih/rng.hpp"
#include "pih/symmetry.hpp"
#include "pih/types.hpp"

// Quasi-static planar soft-wrist peg-in-hole simulator.
//
// A rigid peg (prism with a regular-polygon or round cross-section) hangs
// from the commanded arm tip through a soft wrist modeled as a 3-axis linear
// spring. The spring's lateral rest point carries a hidden per-episode offset
// (wrist_bias): the tip pose alone never reveals where the peg actually is,
// which is what makes the task a POMDP for an observation-only agent.
// Contact with the plate and the hole walls is resolved by overdamped
// relaxation; all force laws are continuous in the state so the dynamics
// commute with the hole's planar symmetries.

namespace pih::env {

enum class Shape { triangle, square, pentagon, hexagon, round };

Shape parse_shape(const std::string& s);
std::string format_shape(Shape s);
int shape_sides(Shape s);  // round is discretized as a 48-gon

enum class ContactMode { free, on_surface, in_hole, jammed };
const char* contact_mode_name(ContactMode m);

struct EnvConfig {
  Shape shape = Shape::square;
  double clearance = 0.001;  // inscribed-radius difference, hole minus peg
  double hole_depth = 0.020;
  double r_peg = 0.010;   // circumradius of the peg cross-section
  double hover_z = 0.005; // tip-to-peg-bottom rest distance; also reset height
  double init_radius = 0.030;
  double far_limit = 0.060;
  double k_lat = 500.0;
  double k_z = 2000.0;
  double k_contact = 20000.0;  // plate support and hole wall stiffness
  double mu = 0.3;             // Coulomb friction on the plate
  double max_deflection = 0.015;
  double bias_max = 0.004;        // hidden lateral rest-offset radius
  double init_deflection = 0.0005;
  double wall_ramp = 0.001;  // submersion depth over which wall force ramps in
  int relax_substeps = 80;
  // per-channel observation noise std: t(3), f(3), tau(3)
  std::array<double, 9> obs_noise_std = {2e-4, 2e-4, 2e-4, 0.1,  0.1,
                                         0.1,  0.02, 0.02, 0.005};
  double xy_bound = 0.002;
  double z_bound = 0.001;
  int max_steps = 200;
  double success_depth_frac = 0.2;  // of hole_depth
  bool force_penalty_on = false;
  bool distance_penalty_on = false;
  sym::TorqueConvention torque_convention = sym::TorqueConvention::xy_vector;
};

struct EnvState {
  Vec3 tip;
  Vec3 peg;        // bottom-face center
  Vec2 wrist_bias; // hidden spring rest offset, resampled every episode
  ContactMode contact_mode = ContactMode::free;
  int step_count = 0;
  bool terminal = false;
  Rng noise_rng{0};
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  std::map<std::string, double> info;
};

// contact diagnostics at a given state (no noise, no mutation)
struct ContactProbe {
  double support_n = 0.0;     // plate + hole-bottom normal force
  double wall_force = 0.0;    // total wall push-out magnitude
  double outside_area = 0.0;  // peg face area fraction over the plate
  double inside_margin = 0.0; // min vertex distance inside the hole (<0: out)
};

class Env {
 public:
  explicit Env(const EnvConfig& cfg);  // throws std::invalid_argument

  std::pair<Observation, EnvState> reset(std::uint64_t seed) const;
  // throws std::logic_error when state.terminal
  StepResult step(EnvState& state, const ActionVec& a) const;

  // peg position then tip position in the hole frame, noise-free
  std::array<double, 6> full_state_vector(const EnvState& state) const;

  ContactProbe probe(const EnvState& state) const;
  double success_depth() const;
  const EnvConfig& config() const { return cfg_; }
  const std::vector<Vec2>& peg_poly() const { return peg_poly_; }
  const std::vector<Vec2>& hole_poly() const { return hole_poly_; }

 private:
  struct Forces;
  Forces contact_forces(const Vec3& peg, const Vec2& rest_xy,
                        double rest_z) const;
  void relax(EnvState& state) const;
  Observation sensors(const EnvState& state, bool with_noise,
                      Rng* rng) const;

  EnvConfig cfg_;
  std::vector<Vec2> peg_poly_;   // CCW, centered at the peg axis
  std::vector<Vec2> hole_poly_;  // CCW, centered at the origin
  double peg_area_ = 0.0;
};

// spec string of the hole's symmetry group; best_row selects the
// empirically strongest group instead of the full one
std::string hole_symmetry(const EnvConfig& cfg, bool best_row = false);

// transforms every pose-like field (tip, peg, hidden bias) by g; used by the
// simulator-equivariance oracle
EnvState transform_state(const sym::GroupElement& g, const EnvState& s);

}  // namespace pih::env
