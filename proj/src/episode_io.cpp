#include "pih/episode_io.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "pih/config.hpp"

namespace pih::io {

using cfg::json;

namespace {

json obs_to_json(const Observation& o) { return o.flat(); }

Observation obs_from_json(const json& j) {
  std::array<double, 9> v{};
  if (!j.is_array() || j.size() != 9)
    throw std::runtime_error("episode file: obs must have 9 entries");
  for (int i = 0; i < 9; ++i) v[i] = j[i].get<double>();
  return Observation::from_flat(v);
}

std::array<double, kStateDim> state_from_json(const json& j) {
  std::array<double, kStateDim> v{};
  if (!j.is_array() || j.size() != kStateDim)
    throw std::runtime_error("episode file: state must have 6 entries");
  for (int i = 0; i < kStateDim; ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

void append_episode(std::ostream& out, const Episode& ep,
                    const env::EnvConfig& cfg) {
  json header;
  header["env_config"] = cfg::to_json(cfg);
  header["seed"] = ep.seed;
  header["source"] = ep.source == Source::expert ? "expert" : "online";
  header["success"] = ep.success;
  out << header.dump() << "\n";
  for (size_t t = 0; t < ep.steps.size(); ++t) {
    const auto& st = ep.steps[t];
    json line;
    line["obs"] = obs_to_json(st.obs);
    line["state"] = st.state;
    line["action"] =
        std::array<double, 3>{st.action.delta.x, st.action.delta.y,
                              st.action.delta.z};
    line["reward"] = st.reward;
    line["done"] = st.done;
    line["success"] = st.success;
    if (t + 1 == ep.steps.size()) {
      line["final_obs"] = obs_to_json(ep.final_obs);
      line["final_state"] = ep.final_state;
    }
    out << line.dump() << "\n";
  }
}

void save_episodes(const std::string& path, const std::vector<Episode>& eps,
                   const env::EnvConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& ep : eps) append_episode(out, ep, cfg);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Episode> load_episodes(const std::string& path,
                                   env::EnvConfig* cfg_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<Episode> eps;
  Episode* cur = nullptr;
  bool saw_header = false;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": invalid JSON");
    if (j.contains("env_config")) {
      if (cur && cur->steps.empty())
        throw std::runtime_error(path + ": header without steps at line " +
                                 std::to_string(lineno));
      if (!saw_header && cfg_out)
        *cfg_out = cfg::env_from_json(j["env_config"], "env_config");
      saw_header = true;
      eps.emplace_back();
      cur = &eps.back();
      cur->seed = j["seed"].get<std::uint64_t>();
      cur->success = j.value("success", false);
      cur->source =
          j.value("source", std::string("online")) == "expert"
              ? Source::expert
              : Source::online;
      continue;
    }
    if (!cur)
      throw std::runtime_error(path + ": step line before any header");
    TransitionStep st;
    st.obs = obs_from_json(j.at("obs"));
    if (j.contains("state")) st.state = state_from_json(j["state"]);
    const auto& a = j.at("action");
    st.action = {{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()}};
    st.reward = j.at("reward").get<double>();
    st.done = j.at("done").get<bool>();
    st.success = j.at("success").get<bool>();
    cur->steps.push_back(st);
    if (j.contains("final_obs")) {
      cur->final_obs = obs_from_json(j["final_obs"]);
      if (j.contains("final_state"))
        cur->final_state = state_from_json(j["final_state"]);
    }
  }
  if (cur && cur->steps.empty())
    throw std::runtime_error(path + ": trailing header without steps");
  for (const auto& ep : eps)
    if (!ep.steps.back().done)
      throw std::runtime_error(path + ": episode does not end with done");
  return eps;
}

}  // namespace pih::io
