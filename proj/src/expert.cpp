#include "pih/expert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pih::expert {

using env::Env;
using env::EnvState;

ActionVec expert_action(const Env& e, const EnvState& s,
                        const ExpertConfig& cfg, Rng& rng) {
  const auto& ec = e.config();
  const auto probe = e.probe(s);
  const Vec2 to_center = -s.peg.xy();

  Vec3 d{0, 0, 0};
  const bool touching =
      probe.support_n > 0.05 || probe.wall_force > 0.01 || s.peg.z < -1e-4;
  if (probe.inside_margin >= 0.15 * ec.clearance) {
    // cross-section fits: descend, with a light centering nudge
    const double lim = 0.2 * ec.xy_bound;
    d.x = std::clamp(to_center.x, -lim, lim);
    d.y = std::clamp(to_center.y, -lim, lim);
    d.z = -ec.z_bound;
  } else if (touching) {
    // slide toward the hole center, keeping a gentle press on the plate
    d.x = cfg.gain * to_center.x;
    d.y = cfg.gain * to_center.y;
    if (probe.support_n < 0.3)
      d.z = -0.25 * ec.z_bound;
    else if (probe.support_n > 2.0)
      d.z = 0.25 * ec.z_bound;
  } else {
    d.z = -ec.z_bound;
  }

  d.x += cfg.action_noise_std[0] * rng.normal();
  d.y += cfg.action_noise_std[1] * rng.normal();
  d.z += cfg.action_noise_std[2] * rng.normal();
  d.x = std::clamp(d.x, -ec.xy_bound, ec.xy_bound);
  d.y = std::clamp(d.y, -ec.xy_bound, ec.xy_bound);
  d.z = std::clamp(d.z, -ec.z_bound, ec.z_bound);
  return {d};
}

std::vector<Episode> generate_demos(const env::EnvConfig& env_cfg,
                                    const ExpertConfig& cfg, int n,
                                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("demo count must be >= 1");
  const Env e(env_cfg);
  std::vector<Episode> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t ep_seed = derive_seed(seed, "demo", i);
    Rng act_rng(derive_seed(seed, "demo-act", i));
    auto [obs, state] = e.reset(ep_seed);
    Episode ep;
    ep.seed = ep_seed;
    ep.source = Source::expert;
    while (true) {
      TransitionStep st;
      st.obs = obs;
      st.state = e.full_state_vector(state);
      st.action = expert_action(e, state, cfg, act_rng);
      const auto res = e.step(state, st.action);
      st.reward = res.reward;
      st.done = res.done;
      st.success = res.success;
      ep.steps.push_back(st);
      obs = res.obs;
      if (res.done) {
        ep.final_obs = obs;
        ep.final_state = e.full_state_vector(state);
        ep.success = res.success;
        break;
      }
    }
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace pih::expert
