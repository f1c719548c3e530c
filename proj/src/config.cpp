#include "pih/config.hpp"

#include <fstream>
#include <stdexcept>

namespace pih::cfg {

namespace {

// pull j[key] into out when present; type errors surface as invalid_argument
// with the dotted path
template <typename T>
void read(const json& j, const char* key, T& out, const std::string& prefix) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: bad value type at " + prefix + "." +
                                key);
  }
}

template <typename T, size_t N>
void read_array(const json& j, const char* key, std::array<T, N>& out,
                const std::string& prefix) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != N)
    throw std::invalid_argument("config: " + prefix + "." + key +
                                " must be an array of " + std::to_string(N));
  for (size_t i = 0; i < N; ++i) {
    try {
      out[i] = (*it)[i].get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad value type at " + prefix + "." +
                                  key);
    }
  }
}

}  // namespace

void reject_unknown_keys(const json& obj, const std::vector<std::string>& keys,
                         const std::string& prefix) {
  if (!obj.is_object())
    throw std::invalid_argument("config: " + prefix + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const auto& allowed : keys)
      if (k == allowed) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key " + prefix + "." + k);
  }
}

json to_json(const env::EnvConfig& c) {
  json j;
  j["shape"] = env::format_shape(c.shape);
  j["clearance"] = c.clearance;
  j["hole_depth"] = c.hole_depth;
  j["r_peg"] = c.r_peg;
  j["hover_z"] = c.hover_z;
  j["init_radius"] = c.init_radius;
  j["far_limit"] = c.far_limit;
  j["k_lat"] = c.k_lat;
  j["k_z"] = c.k_z;
  j["k_contact"] = c.k_contact;
  j["mu"] = c.mu;
  j["max_deflection"] = c.max_deflection;
  j["bias_max"] = c.bias_max;
  j["init_deflection"] = c.init_deflection;
  j["wall_ramp"] = c.wall_ramp;
  j["relax_substeps"] = c.relax_substeps;
  j["obs_noise_std"] = c.obs_noise_std;
  j["xy_bound"] = c.xy_bound;
  j["z_bound"] = c.z_bound;
  j["max_steps"] = c.max_steps;
  j["success_depth_frac"] = c.success_depth_frac;
  j["force_penalty_on"] = c.force_penalty_on;
  j["distance_penalty_on"] = c.distance_penalty_on;
  j["torque_convention"] = sym::format_convention(c.torque_convention);
  return j;
}

env::EnvConfig env_from_json(const json& j, const std::string& prefix) {
  reject_unknown_keys(
      j,
      {"shape", "clearance", "hole_depth", "r_peg", "hover_z", "init_radius",
       "far_limit", "k_lat", "k_z", "k_contact", "mu", "max_deflection",
       "bias_max", "init_deflection", "wall_ramp", "relax_substeps",
       "obs_noise_std", "xy_bound", "z_bound", "max_steps",
       "success_depth_frac", "force_penalty_on", "distance_penalty_on",
       "torque_convention"},
      prefix);
  env::EnvConfig c;
  if (j.contains("shape")) c.shape = env::parse_shape(j["shape"].get<std::string>());
  read(j, "clearance", c.clearance, prefix);
  read(j, "hole_depth", c.hole_depth, prefix);
  read(j, "r_peg", c.r_peg, prefix);
  read(j, "hover_z", c.hover_z, prefix);
  read(j, "init_radius", c.init_radius, prefix);
  read(j, "far_limit", c.far_limit, prefix);
  read(j, "k_lat", c.k_lat, prefix);
  read(j, "k_z", c.k_z, prefix);
  read(j, "k_contact", c.k_contact, prefix);
  read(j, "mu", c.mu, prefix);
  read(j, "max_deflection", c.max_deflection, prefix);
  read(j, "bias_max", c.bias_max, prefix);
  read(j, "init_deflection", c.init_deflection, prefix);
  read(j, "wall_ramp", c.wall_ramp, prefix);
  read(j, "relax_substeps", c.relax_substeps, prefix);
  read_array(j, "obs_noise_std", c.obs_noise_std, prefix);
  read(j, "xy_bound", c.xy_bound, prefix);
  read(j, "z_bound", c.z_bound, prefix);
  read(j, "max_steps", c.max_steps, prefix);
  read(j, "success_depth_frac", c.success_depth_frac, prefix);
  read(j, "force_penalty_on", c.force_penalty_on, prefix);
  read(j, "distance_penalty_on", c.distance_penalty_on, prefix);
  if (j.contains("torque_convention"))
    c.torque_convention =
        sym::parse_convention(j["torque_convention"].get<std::string>());
  return c;
}

json to_json(const expert::ExpertConfig& c) {
  json j;
  j["action_noise_std"] = c.action_noise_std;
  j["strategy"] = "touch_then_slide";
  j["gain"] = c.gain;
  return j;
}

expert::ExpertConfig expert_from_json(const json& j,
                                      const std::string& prefix) {
  reject_unknown_keys(j, {"action_noise_std", "strategy", "gain"}, prefix);
  expert::ExpertConfig c;
  read_array(j, "action_noise_std", c.action_noise_std, prefix);
  if (j.contains("strategy")) {
    const auto s = j["strategy"].get<std::string>();
    if (s != "touch_then_slide")
      throw std::invalid_argument("config: unknown strategy " + s);
    c.strategy = expert::Strategy::touch_then_slide;
  }
  read(j, "gain", c.gain, prefix);
  return c;
}

json to_json(const agent::AgentConfig& c) {
  json j;
  j["gamma"] = c.gamma;
  j["alpha"] = c.alpha;
  j["auto_alpha"] = c.auto_alpha;
  j["alpha_lr"] = c.alpha_lr;
  j["rho"] = c.rho;
  j["lambda_c"] = c.lambda_c;
  j["lambda_a"] = c.lambda_a;
  j["group"] = c.group;
  j["augment"] = c.augment;
  j["aux_losses"] = c.aux_losses;
  j["batch_episodes"] = c.batch_episodes;
  j["expert_fraction"] = c.expert_fraction;
  j["lr"] = c.lr;
  j["use_state"] = c.use_state;
  j["bounds"] = c.bounds;
  j["convention"] = sym::format_convention(c.convention);
  j["net"] = net::spec_to_json(c.net);
  return j;
}

agent::AgentConfig agent_from_json(const json& j, const std::string& prefix,
                                   agent::AgentConfig base) {
  reject_unknown_keys(
      j,
      {"gamma", "alpha", "auto_alpha", "alpha_lr", "rho", "lambda_c",
       "lambda_a", "group", "augment", "aux_losses", "batch_episodes",
       "expert_fraction", "lr", "use_state", "bounds", "convention", "net"},
      prefix);
  agent::AgentConfig c = std::move(base);
  read(j, "gamma", c.gamma, prefix);
  read(j, "alpha", c.alpha, prefix);
  read(j, "auto_alpha", c.auto_alpha, prefix);
  read(j, "alpha_lr", c.alpha_lr, prefix);
  read(j, "rho", c.rho, prefix);
  read(j, "lambda_c", c.lambda_c, prefix);
  read(j, "lambda_a", c.lambda_a, prefix);
  read(j, "group", c.group, prefix);
  read(j, "augment", c.augment, prefix);
  read(j, "aux_losses", c.aux_losses, prefix);
  read(j, "batch_episodes", c.batch_episodes, prefix);
  read(j, "expert_fraction", c.expert_fraction, prefix);
  read(j, "lr", c.lr, prefix);
  read(j, "use_state", c.use_state, prefix);
  read_array(j, "bounds", c.bounds, prefix);
  if (j.contains("convention"))
    c.convention = sym::parse_convention(j["convention"].get<std::string>());
  if (j.contains("net")) {
    reject_unknown_keys(j["net"],
                        {"obs_dim", "act_dim", "obs_embed", "act_embed",
                         "rnn_hidden", "mlp_hidden", "nonlin", "log_std_min",
                         "log_std_max", "recurrent"},
                        prefix + ".net");
    try {
      c.net = net::spec_from_json(j["net"]);
    } catch (const json::exception&) {
      // the net block is all-or-nothing: every field must be present
      throw std::invalid_argument("config: incomplete or mistyped " + prefix +
                                  ".net block");
    }
  }
  return c;
}

json to_json(const harness::TrainConfig& c) {
  json j;
  j["preset"] = harness::format_preset(c.preset);
  j["phase1_updates"] = c.phase1_updates;
  j["phase2_env_steps"] = c.phase2_env_steps;
  j["updates_per_env_step"] = c.updates_per_env_step;
  j["eval_every"] = c.eval_every;
  j["eval_episodes"] = c.eval_episodes;
  j["demo_count"] = c.demo_count;
  j["seeds"] = c.seeds;
  j["replay_capacity"] = c.replay_capacity;
  return j;
}

harness::TrainConfig train_from_json(const json& j, const std::string& prefix) {
  reject_unknown_keys(j,
                      {"preset", "phase1_updates", "phase2_env_steps",
                       "updates_per_env_step", "eval_every", "eval_episodes",
                       "demo_count", "seeds", "replay_capacity"},
                      prefix);
  harness::TrainConfig c;
  if (j.contains("preset"))
    c.preset = harness::parse_preset(j["preset"].get<std::string>());
  read(j, "phase1_updates", c.phase1_updates, prefix);
  read(j, "phase2_env_steps", c.phase2_env_steps, prefix);
  read(j, "updates_per_env_step", c.updates_per_env_step, prefix);
  read(j, "eval_every", c.eval_every, prefix);
  read(j, "eval_episodes", c.eval_episodes, prefix);
  read(j, "demo_count", c.demo_count, prefix);
  read(j, "seeds", c.seeds, prefix);
  read(j, "replay_capacity", c.replay_capacity, prefix);
  return c;
}

json root_to_json(const harness::TrainConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  j["env"] = to_json(c.env);
  j["expert"] = to_json(c.expert);
  j["agent"] = to_json(c.agent);
  j["train"] = to_json(c);
  return j;
}

harness::TrainConfig root_from_json(const json& j) {
  reject_unknown_keys(j, {"version", "env", "expert", "agent", "train"},
                      "config");
  if (!j.contains("version"))
    throw std::invalid_argument("config: missing version");
  if (j["version"] != json(kConfigVersion))
    throw std::invalid_argument("config: unsupported version");
  harness::TrainConfig c =
      j.contains("train") ? train_from_json(j["train"]) : harness::TrainConfig{};
  if (j.contains("env")) c.env = env_from_json(j["env"]);
  if (j.contains("expert")) c.expert = expert_from_json(j["expert"]);
  if (j.contains("agent"))
    c.agent = agent_from_json(j["agent"], "agent", harness::desk_agent_defaults());
  return c;
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like path.key=value: " +
                                assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json* node = &root;
  size_t begin = 0;
  while (true) {
    const size_t dot = path.find('.', begin);
    const std::string part = path.substr(
        begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (part.empty())
      throw std::invalid_argument("override has an empty path segment: " +
                                  assignment);
    if (dot == std::string::npos) {
      json value = json::parse(raw, nullptr, false);
      if (value.is_discarded()) value = raw;  // bare strings stay strings
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    begin = dot + 1;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw std::runtime_error("invalid JSON in " + path);
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pih::cfg
