#include "pih/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pih::env {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// regular n-gon, CCW, circumradius r, first vertex at start_turns
std::vector<Vec2> make_poly(int n, double r, double start_turns) {
  std::vector<Vec2> v;
  v.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double th = kTwoPi * (start_turns + static_cast<double>(k) / n);
    v.push_back({r * std::cos(th), r * std::sin(th)});
  }
  return v;
}

double poly_area(const std::vector<Vec2>& p) {
  double a = 0;
  for (size_t i = 0, j = p.size() - 1; i < p.size(); j = i++)
    a += p[j].cross(p[i]);
  return 0.5 * a;
}

// area-weighted centroid; caller guards against ~zero area
Vec2 poly_centroid(const std::vector<Vec2>& p, double area) {
  double cx = 0, cy = 0;
  for (size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    const double w = p[j].cross(p[i]);
    cx += (p[j].x + p[i].x) * w;
    cy += (p[j].y + p[i].y) * w;
  }
  const double inv = 1.0 / (6.0 * area);
  return {cx * inv, cy * inv};
}

// signed distance of q from the polygon boundary, positive inside (convex,
// CCW); equals min over edges of the signed edge-line distance
double inside_margin_of(const std::vector<Vec2>& poly, Vec2 q) {
  double m = 1e18;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[j], b = poly[i];
    const Vec2 e = b - a;
    const double d = e.cross(q - a) / e.norm();
    m = std::min(m, d);
  }
  return m;
}

// nearest boundary point for an outside query point
Vec2 nearest_on_boundary(const std::vector<Vec2>& poly, Vec2 q) {
  double best = 1e18;
  Vec2 out = poly[0];
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[j], b = poly[i];
    const Vec2 e = b - a;
    const double t =
        std::clamp((q - a).dot(e) / e.dot(e), 0.0, 1.0);
    const Vec2 c = a + e * t;
    const double d2 = (q - c).dot(q - c);
    if (d2 < best) {
      best = d2;
      out = c;
    }
  }
  return out;
}

// Sutherland-Hodgman clip of a convex subject polygon by a convex CCW clip
// polygon; result written into out
void clip_convex(const std::vector<Vec2>& subject,
                 const std::vector<Vec2>& clip, std::vector<Vec2>& out,
                 std::vector<Vec2>& scratch) {
  out = subject;
  for (size_t i = 0, j = clip.size() - 1; i < clip.size(); j = i++) {
    const Vec2 a = clip[j], b = clip[i];
    const Vec2 e = b - a;
    scratch.clear();
    const size_t n = out.size();
    if (n == 0) break;
    for (size_t s = 0, t = n - 1; s < n; t = s++) {
      const Vec2 p = out[t], q = out[s];
      const double dp = e.cross(p - a);
      const double dq = e.cross(q - a);
      if (dq >= 0) {
        if (dp < 0) {
          const double f = dp / (dp - dq);
          scratch.push_back(p + (q - p) * f);
        }
        scratch.push_back(q);
      } else if (dp >= 0) {
        const double f = dp / (dp - dq);
        scratch.push_back(p + (q - p) * f);
      }
    }
    std::swap(out, scratch);
  }
}

}  // namespace

Shape parse_shape(const std::string& s) {
  if (s == "triangle") return Shape::triangle;
  if (s == "square") return Shape::square;
  if (s == "pentagon") return Shape::pentagon;
  if (s == "hexagon") return Shape::hexagon;
  if (s == "round") return Shape::round;
  throw std::invalid_argument("bad shape: " + s);
}

std::string format_shape(Shape s) {
  switch (s) {
    case Shape::triangle:
      return "triangle";
    case Shape::square:
      return "square";
    case Shape::pentagon:
      return "pentagon";
    case Shape::hexagon:
      return "hexagon";
    case Shape::round:
      return "round";
  }
  return "?";
}

int shape_sides(Shape s) {
  switch (s) {
    case Shape::triangle:
      return 3;
    case Shape::square:
      return 4;
    case Shape::pentagon:
      return 5;
    case Shape::hexagon:
      return 6;
    case Shape::round:
      return 48;
  }
  return 0;
}

const char* contact_mode_name(ContactMode m) {
  switch (m) {
    case ContactMode::free:
      return "free";
    case ContactMode::on_surface:
      return "on_surface";
    case ContactMode::in_hole:
      return "in_hole";
    case ContactMode::jammed:
      return "jammed";
  }
  return "?";
}

std::string hole_symmetry(const EnvConfig& cfg, bool best_row) {
  switch (cfg.shape) {
    case Shape::triangle:
      return best_row ? "c3" : "fy*c3";
    case Shape::square:
      return "fxy*c4";
    case Shape::pentagon:
      return best_row ? "c5" : "fy*c5";
    case Shape::hexagon:
      return best_row ? "c6" : "fxy*c6";
    case Shape::round:
      return "fxy*c4";
  }
  return "e";
}

EnvState transform_state(const sym::GroupElement& g, const EnvState& s) {
  EnvState out = s;
  const Vec2 tip = sym::apply_point(g, s.tip.xy());
  const Vec2 peg = sym::apply_point(g, s.peg.xy());
  out.tip.x = tip.x;
  out.tip.y = tip.y;
  out.peg.x = peg.x;
  out.peg.y = peg.y;
  out.wrist_bias = sym::apply_point(g, s.wrist_bias);
  return out;
}

Env::Env(const EnvConfig& cfg) : cfg_(cfg) {
  if (cfg.clearance <= 0) throw std::invalid_argument("clearance must be > 0");
  if (cfg.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (cfg.far_limit <= cfg.init_radius)
    throw std::invalid_argument("far_limit must exceed init_radius");
  if (cfg.r_peg <= 0 || cfg.hole_depth <= 0 || cfg.hover_z <= 0 ||
      cfg.k_lat <= 0 || cfg.k_z <= 0 || cfg.k_contact <= 0 ||
      cfg.relax_substeps < 1 || cfg.xy_bound <= 0 || cfg.z_bound <= 0)
    throw std::invalid_argument("non-positive geometry or stiffness field");
  if (cfg.success_depth_frac <= 0 || cfg.success_depth_frac > 1)
    throw std::invalid_argument("success_depth_frac out of (0,1]");

  const int n = shape_sides(cfg.shape);
  // first vertex chosen so the polygon is symmetric under its hole group
  double start = 0.0;
  switch (cfg.shape) {
    case Shape::triangle:
      start = 0.25;  // apex up, mirror about the Y axis
      break;
    case Shape::square:
      start = 0.125;  // vertices on the diagonals, mirrors about X and Y
      break;
    case Shape::pentagon:
      start = 0.25;  // apex up
      break;
    case Shape::hexagon:
    case Shape::round:
      start = 0.0;  // vertex on +X, mirrors about X and Y
      break;
  }
  peg_poly_ = make_poly(n, cfg.r_peg, start);
  // hole is the peg cross-section scaled so the inscribed radii differ by
  // exactly the clearance
  const double inradius = cfg.r_peg * std::cos(std::numbers::pi / n);
  const double scale = (inradius + cfg.clearance) / inradius;
  hole_poly_ = make_poly(n, cfg.r_peg * scale, start);
  peg_area_ = poly_area(peg_poly_);
}

double Env::success_depth() const {
  return cfg_.success_depth_frac * cfg_.hole_depth;
}

struct Env::Forces {
  Vec2 spring_lat;
  double spring_z = 0.0;
  Vec2 wall;              // total lateral wall push
  double n_support = 0.0; // plate normal
  double n_bottom = 0.0;  // hole-bottom normal
  Vec2 c_out;             // support application point
  double w_out = 1.0;     // outside-area fraction
  double wall_mag = 0.0;  // sum of wall force magnitudes
  double inside_margin = 0.0;
  Vec3 wall_tau;          // wall torque about the tip (sensor pass only)
};

Env::Forces Env::contact_forces(const Vec3& peg, const Vec2& rest_xy,
                                double rest_z) const {
  Forces out;
  out.spring_lat = (rest_xy - peg.xy()) * cfg_.k_lat;
  out.spring_z = cfg_.k_z * (rest_z - peg.z);
  out.c_out = peg.xy();

  const double r_hole = hole_poly_[0].norm();
  const double dist = peg.xy().norm();
  const bool near_hole = dist <= r_hole + cfg_.r_peg + 1e-6;

  if (!near_hole) {
    out.inside_margin = -(dist - cfg_.r_peg - r_hole);
    out.w_out = 1.0;
  } else {
    // translate the peg polygon to its world position once
    thread_local std::vector<Vec2> world, inter, scratch;
    world.clear();
    for (const Vec2& v : peg_poly_) world.push_back(v + peg.xy());

    double margin = 1e18;
    for (const Vec2& q : world)
      margin = std::min(margin, inside_margin_of(hole_poly_, q));
    out.inside_margin = margin;

    clip_convex(world, hole_poly_, inter, scratch);
    double a_int = inter.size() >= 3 ? poly_area(inter) : 0.0;
    a_int = std::clamp(a_int, 0.0, peg_area_);
    const double a_out = peg_area_ - a_int;
    out.w_out = a_out / peg_area_;
    if (a_out > peg_area_ * 1e-9 && a_int > peg_area_ * 1e-9) {
      const Vec2 c_int = poly_centroid(inter, a_int);
      const Vec2 c_peg = peg.xy();
      out.c_out = {(c_peg.x * peg_area_ - c_int.x * a_int) / a_out,
                   (c_peg.y * peg_area_ - c_int.y * a_int) / a_out};
    }

    // lateral wall push-out on submerged vertices that poke outside the hole;
    // per-vertex engagement blends the minimum-translation choice between
    // escaping sideways (true wall contact) and escaping upward (plate
    // support, handled by the area term)
    if (peg.z < 0) {
      const double depth = -peg.z;
      const double ramp = std::min(1.0, depth / cfg_.wall_ramp);
      struct Contact {
        Vec2 at;
        Vec2 dir;
        double d_out;
        double engage;
      };
      thread_local std::vector<Contact> contacts;
      contacts.clear();
      double total_engage = 0.0;
      for (const Vec2& q : world) {
        const double m = inside_margin_of(hole_poly_, q);
        if (m >= 0) continue;
        const double d_out = -m;
        const Vec2 nb = nearest_on_boundary(hole_poly_, q);
        const Vec2 to_in = nb - q;
        const double len = to_in.norm();
        if (len < 1e-15) continue;
        const double engage =
            ramp * (depth * depth) / (depth * depth + d_out * d_out);
        contacts.push_back({q, to_in * (1.0 / len), d_out, engage});
        total_engage += engage;
      }
      const double norm = 1.0 / std::max(1.0, total_engage);
      for (const auto& c : contacts) {
        const Vec2 f = c.dir * (cfg_.k_contact * c.d_out * c.engage * norm);
        out.wall += f;
        out.wall_mag += f.norm();
        out.wall_tau = out.wall_tau + Vec3{c.at.x, c.at.y, peg.z}.cross(
                                          {f.x, f.y, 0.0});
      }
    }
  }

  if (peg.z < 0) {
    out.n_support = cfg_.k_contact * (-peg.z) * out.w_out;
    const double below = -cfg_.hole_depth - peg.z;
    if (below > 0) out.n_bottom = cfg_.k_contact * below * (1.0 - out.w_out);
  }
  return out;
}

namespace {

// Coulomb friction against the net lateral load: full cancellation inside the
// stick cone, kinetic cap outside
Vec2 friction_force(Vec2 lat_other, double n_total, double mu) {
  if (n_total <= 0) return {0, 0};
  const double cap = mu * n_total;
  const double mag = lat_other.norm();
  if (mag <= cap) return -lat_other;
  return lat_other * (-cap / mag);
}

}  // namespace

void Env::relax(EnvState& s) const {
  const Vec2 rest_xy = s.tip.xy() + s.wrist_bias;
  const double rest_z = s.tip.z - cfg_.hover_z;

  if (rest_z >= 0 && s.peg.z >= 0) {
    // airborne: the spring equilibrium is contact-free and exact
    s.peg = {rest_xy.x, rest_xy.y, rest_z};
    return;
  }

  // gains below each regime's maximum force slope; conditions are rotation
  // and reflection invariant, so the iteration commutes with the hole group
  const double eta_wall = 1.0 / (cfg_.k_lat + 2.5 * cfg_.k_contact);
  const double eta_free_xy = 0.8 / cfg_.k_lat;
  const double eta_sup = 1.0 / (cfg_.k_z + cfg_.k_contact);
  const double eta_free_z = 0.8 / cfg_.k_z;
  for (int it = 0; it < cfg_.relax_substeps; ++it) {
    const Forces F = contact_forces(s.peg, rest_xy, rest_z);
    const Vec2 lat_other = F.spring_lat + F.wall;
    const double n_total = F.n_support + F.n_bottom;
    if (n_total <= 0 && F.wall_mag <= 0 && rest_z >= 0 && s.peg.z >= 0) {
      s.peg = {rest_xy.x, rest_xy.y, rest_z};
      return;
    }
    const Vec2 fr = friction_force(lat_other, n_total, cfg_.mu);
    const Vec2 lat_net = lat_other + fr;
    const double z_net = F.spring_z + n_total;
    const double eta_xy = F.wall_mag > 0 ? eta_wall : eta_free_xy;
    const double eta_z = s.peg.z < 0 ? eta_sup : eta_free_z;
    const double mx = eta_xy * lat_net.x;
    const double my = eta_xy * lat_net.y;
    const double mz = eta_z * z_net;
    s.peg.x += mx;
    s.peg.y += my;
    s.peg.z += mz;

    const Vec2 defl = s.peg.xy() - s.tip.xy();
    const double dn = defl.norm();
    if (dn > cfg_.max_deflection) {
      const Vec2 lim = s.tip.xy() + defl * (cfg_.max_deflection / dn);
      s.peg.x = lim.x;
      s.peg.y = lim.y;
    }
    if (mx * mx + my * my + mz * mz < 1e-26) break;  // converged
  }
}

Observation Env::sensors(const EnvState& s, bool with_noise, Rng* rng) const {
  const Vec2 rest_xy = s.tip.xy() + s.wrist_bias;
  const double rest_z = s.tip.z - cfg_.hover_z;

  Observation o;
  o.t = s.tip;
  // the sensor sits in the wrist: it reads the spring deformation, which at
  // equilibrium equals the total contact force on the peg
  o.f = {cfg_.k_lat * (s.peg.x - rest_xy.x), cfg_.k_lat * (s.peg.y - rest_xy.y),
         cfg_.k_z * (s.peg.z - rest_z)};

  const Forces F = contact_forces(s.peg, rest_xy, rest_z);
  const Vec2 lat_other = F.spring_lat + F.wall;
  const double n_total = F.n_support + F.n_bottom;
  const Vec2 fr = friction_force(lat_other, n_total, cfg_.mu);

  Vec3 tau = F.wall_tau;
  const Vec3 sup_lever{F.c_out.x - s.tip.x, F.c_out.y - s.tip.y,
                       s.peg.z - s.tip.z};
  tau = tau + sup_lever.cross({fr.x, fr.y, F.n_support});
  if (F.n_bottom > 0) {
    const Vec3 bot_lever = s.peg - s.tip;
    tau = tau + bot_lever.cross({0.0, 0.0, F.n_bottom});
  }
  o.tau = tau;

  if (with_noise && rng) {
    auto flat = o.flat();
    for (int i = 0; i < 9; ++i)
      flat[i] += cfg_.obs_noise_std[i] * rng->normal();
    o = Observation::from_flat(flat);
  }
  return o;
}

std::pair<Observation, EnvState> Env::reset(std::uint64_t seed) const {
  Rng r(derive_seed(seed, "env-reset"));
  EnvState s;

  const double bias_ang = kTwoPi * r.uniform();
  const double bias_rad = cfg_.bias_max * std::sqrt(r.uniform());
  s.wrist_bias = {bias_rad * std::cos(bias_ang), bias_rad * std::sin(bias_ang)};

  const double ang = kTwoPi * r.uniform();
  const double r0 = 0.3 * cfg_.init_radius, r1 = cfg_.init_radius;
  const double rad = std::sqrt(r0 * r0 + (r1 * r1 - r0 * r0) * r.uniform());
  s.peg = {rad * std::cos(ang), rad * std::sin(ang), 0.0};

  const double d_ang = kTwoPi * r.uniform();
  const double d_rad = cfg_.init_deflection * std::sqrt(r.uniform());
  const Vec2 defl{d_rad * std::cos(d_ang), d_rad * std::sin(d_ang)};

  s.tip = {s.peg.x - s.wrist_bias.x - defl.x,
           s.peg.y - s.wrist_bias.y - defl.y, cfg_.hover_z};
  s.contact_mode = ContactMode::free;
  s.step_count = 0;
  s.terminal = false;
  s.noise_rng = Rng(derive_seed(seed, "env-noise"));

  const Observation o = sensors(s, true, &s.noise_rng);
  return {o, s};
}

StepResult Env::step(EnvState& s, const ActionVec& a) const {
  if (s.terminal)
    throw std::logic_error("step() called on a terminal state");

  const double dx = std::clamp(a.delta.x, -cfg_.xy_bound, cfg_.xy_bound);
  const double dy = std::clamp(a.delta.y, -cfg_.xy_bound, cfg_.xy_bound);
  const double dz = std::clamp(a.delta.z, -cfg_.z_bound, cfg_.z_bound);
  s.tip.x += dx;
  s.tip.y += dy;
  s.tip.z = std::max(0.0, s.tip.z + dz);  // the arm never reaches below plate

  relax(s);
  s.step_count += 1;

  const Vec2 rest_xy = s.tip.xy() + s.wrist_bias;
  const double rest_z = s.tip.z - cfg_.hover_z;
  const Forces F = contact_forces(s.peg, rest_xy, rest_z);

  if (F.inside_margin >= 0 && s.peg.z < -0.5e-3)
    s.contact_mode = ContactMode::in_hole;
  else if (F.wall_mag > 1e-6)
    s.contact_mode = ContactMode::jammed;
  else if (F.n_support + F.n_bottom > 1e-9)
    s.contact_mode = ContactMode::on_surface;
  else
    s.contact_mode = ContactMode::free;

  StepResult out;
  out.obs = sensors(s, true, &s.noise_rng);

  const bool contained = F.inside_margin >= 0;
  out.success = contained && s.peg.z <= -success_depth();
  const double planar_dist = s.peg.xy().norm();
  const bool too_far = planar_dist > cfg_.far_limit;
  const bool timeout = s.step_count >= cfg_.max_steps;
  out.done = out.success || too_far || timeout;

  if (out.success) {
    out.reward = 1.0;
  } else {
    double rwd = 0.0;
    if (cfg_.force_penalty_on) {
      const double fmag = Vec3{out.obs.f.x, out.obs.f.y, out.obs.f.z}.norm();
      if (fmag > 10.0) rwd -= 0.1;
    }
    if (cfg_.distance_penalty_on && too_far) rwd -= 5.0;
    out.reward = rwd;
  }

  s.terminal = out.done;
  out.info["peg_dist"] = planar_dist;
  out.info["peg_depth"] = s.peg.z;
  out.info["inside_margin"] = F.inside_margin;
  out.info["support_n"] = F.n_support + F.n_bottom;
  out.info["contact_mode"] = static_cast<double>(s.contact_mode);
  return out;
}

std::array<double, 6> Env::full_state_vector(const EnvState& s) const {
  return {s.peg.x, s.peg.y, s.peg.z, s.tip.x, s.tip.y, s.tip.z};
}

ContactProbe Env::probe(const EnvState& s) const {
  const Vec2 rest_xy = s.tip.xy() + s.wrist_bias;
  const double rest_z = s.tip.z - cfg_.hover_z;
  const Forces F = contact_forces(s.peg, rest_xy, rest_z);
  ContactProbe p;
  p.support_n = F.n_support + F.n_bottom;
  p.wall_force = F.wall_mag;
  p.outside_area = F.w_out;
  p.inside_margin = F.inside_margin;
  return p;
}

}  // namespace pih::env
