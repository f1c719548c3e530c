#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pih/env.hpp"
#include "pih/rng.hpp"
#include "pih/types.hpp"

// Scripted full-state demonstrator. It reads the true simulator state (peg
// pose, contact diagnostics), which the learning agents never see, and plays
// a deliberately unhurried touch-then-slide strategy: push down until the
// plate answers, crawl toward the hole center, insert once the cross-section
// fits. Slower than necessary by design so a trained policy has headroom to
// beat it.

namespace pih::expert {

enum class Strategy { touch_then_slide };

struct ExpertConfig {
  // noise added to commanded actions before clamping; defaults are 10% of
  // the default action bounds
  std::array<double, 3> action_noise_std = {2e-4, 2e-4, 1e-4};
  Strategy strategy = Strategy::touch_then_slide;
  double gain = 0.06;  // fraction of the remaining planar error per step
};

ActionVec expert_action(const env::Env& e, const env::EnvState& s,
                        const ExpertConfig& cfg, Rng& rng);

// n episodes, observations recorded with the environment's noise model;
// failed episodes are kept
std::vector<Episode> generate_demos(const env::EnvConfig& env_cfg,
                                    const ExpertConfig& cfg, int n,
                                    std::uint64_t seed);

}  // namespace pih::expert
