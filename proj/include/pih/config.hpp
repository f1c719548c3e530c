#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pih/agent.hpp"
#include "pih/env.hpp"
#include "pih/expert.hpp"
#include "pih/harness.hpp"

// JSON round-trips for every config struct, with strict key validation: an
// unknown key anywhere in the tree is rejected with its exact dotted path, so
// a typo in a run file never silently falls back to a default.

namespace pih::cfg {

using json = nlohmann::ordered_json;

constexpr int kConfigVersion = 1;

json to_json(const env::EnvConfig& c);
env::EnvConfig env_from_json(const json& j, const std::string& prefix = "env");

json to_json(const expert::ExpertConfig& c);
expert::ExpertConfig expert_from_json(const json& j,
                                      const std::string& prefix = "expert");

json to_json(const agent::AgentConfig& c);
// overlays onto `base`, so partial blocks keep the caller's defaults
agent::AgentConfig agent_from_json(const json& j,
                                   const std::string& prefix = "agent",
                                   agent::AgentConfig base = {});

// the "train" block holds the protocol scalars; env/expert/agent live in
// sibling blocks of the versioned root file
json to_json(const harness::TrainConfig& c);
harness::TrainConfig train_from_json(const json& j,
                                     const std::string& prefix = "train");

json root_to_json(const harness::TrainConfig& c);
harness::TrainConfig root_from_json(const json& j);

// throws std::invalid_argument naming the offending dotted path
void reject_unknown_keys(const json& obj, const std::vector<std::string>& keys,
                         const std::string& prefix);

// "env.k_lat=700" or "train.preset=RSAC-Aug"; value parsed as JSON when
// possible, kept as a string otherwise; missing intermediate objects are
// created, and strict key validation rejects the result if the path was a typo
void apply_override(json& root, const std::string& assignment);

json load_json_file(const std::string& path);                // throws runtime_error
void save_json_file(const std::string& path, const json& j); // throws runtime_error

}  // namespace pih::cfg
