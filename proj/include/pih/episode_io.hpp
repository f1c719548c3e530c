#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pih/env.hpp"
#include "pih/types.hpp"

// Episode files are JSON Lines. Each episode starts with a header object
// carrying the env config, episode seed, source and outcome, followed by one
// object per step:
//   {"env_config":{...},"seed":7,"source":"expert","success":true}
//   {"obs":[9],"state":[6],"action":[3],"reward":0.0,"done":false,"success":false}
//   ...last step additionally carries "final_obs" and "final_state".
// Doubles are written with enough digits to round-trip bit-exactly.

namespace pih::io {

void save_episodes(const std::string& path, const std::vector<Episode>& eps,
                   const env::EnvConfig& cfg);
void append_episode(std::ostream& out, const Episode& ep,
                    const env::EnvConfig& cfg);

// cfg_out (when non-null) receives the config from the first header
std::vector<Episode> load_episodes(const std::string& path,
                                   env::EnvConfig* cfg_out = nullptr);

}  // namespace pih::io
