#include "pih/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pih/config.hpp"
#include "pih/episode_io.hpp"

namespace fs = std::filesystem;

namespace pih::harness {

namespace {

// %.17g round-trips doubles exactly, so same-seed runs write identical files
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_key(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

Preset parse_preset(const std::string& s) {
  if (s == "SAC-State") return Preset::sac_state;
  if (s == "SAC-Obs") return Preset::sac_obs;
  if (s == "RSAC") return Preset::rsac;
  if (s == "RSAC-Aug") return Preset::rsac_aug;
  if (s == "RSAC-Aux") return Preset::rsac_aux;
  if (s == "RSAC-Aug-Aux") return Preset::rsac_aug_aux;
  throw std::invalid_argument("unknown preset: " + s);
}

std::string format_preset(Preset p) {
  switch (p) {
    case Preset::sac_state: return "SAC-State";
    case Preset::sac_obs: return "SAC-Obs";
    case Preset::rsac: return "RSAC";
    case Preset::rsac_aug: return "RSAC-Aug";
    case Preset::rsac_aux: return "RSAC-Aux";
    case Preset::rsac_aug_aux: return "RSAC-Aug-Aux";
  }
  return "?";
}

PresetFlags preset_flags(Preset p) {
  switch (p) {
    case Preset::sac_state: return {false, false, false, true};
    case Preset::sac_obs: return {false, false, false, false};
    case Preset::rsac: return {true, false, false, false};
    case Preset::rsac_aug: return {true, true, false, false};
    case Preset::rsac_aux: return {true, false, true, false};
    case Preset::rsac_aug_aux: return {true, true, true, false};
  }
  return {};
}

int default_demo_count(env::Shape s) {
  switch (s) {
    case env::Shape::pentagon:
    case env::Shape::hexagon:
      return 200;
    default:
      return 100;
  }
}

agent::AgentConfig desk_agent_defaults() {
  agent::AgentConfig c;
  c.auto_alpha = true;
  c.alpha = 0.05;
  c.lr = 1e-3;
  c.batch_episodes = 6;
  c.net.obs_embed = 12;
  c.net.act_embed = 6;
  c.net.rnn_hidden = 24;
  c.net.mlp_hidden = {32};
  return c;
}

void TrainConfig::validate() const {
  if (phase1_updates < -1)
    throw std::invalid_argument("train: phase1_updates must be >= 0 or -1");
  if (phase2_env_steps < 0)
    throw std::invalid_argument("train: phase2_env_steps must be >= 0");
  if (!(updates_per_env_step >= 0.0) || !std::isfinite(updates_per_env_step))
    throw std::invalid_argument("train: updates_per_env_step must be >= 0");
  if (eval_every < 1)
    throw std::invalid_argument("train: eval_every must be >= 1");
  if (eval_episodes < 1)
    throw std::invalid_argument("train: eval_episodes must be >= 1");
  if (demo_count == 0 || demo_count < -1)
    throw std::invalid_argument(
        "train: demo_count must be positive (or -1 for the shape default)");
  if (seeds.empty()) throw std::invalid_argument("train: seeds must not be empty");
  if (replay_capacity < 1)
    throw std::invalid_argument("train: replay_capacity must be >= 1");
  agent.validate();
}

TrainConfig resolve(const TrainConfig& in) {
  TrainConfig c = in;
  const PresetFlags f = preset_flags(c.preset);
  c.agent.net.recurrent = f.recurrent;
  c.agent.augment = f.augment;
  c.agent.aux_losses = f.aux;
  c.agent.use_state = f.state_input;
  c.agent.net.obs_dim = f.state_input ? kStateDim : kObsDim;
  if ((f.augment || f.aux) && c.agent.group == "e")
    c.agent.group = env::hole_symmetry(c.env, true);
  // the policy must squash to the environment's action box, and symmetry
  // transforms must agree on how torque observations behave
  c.agent.bounds = {c.env.xy_bound, c.env.xy_bound, c.env.z_bound};
  c.agent.convention = c.env.torque_convention;
  if (c.demo_count < 0) c.demo_count = default_demo_count(c.env.shape);
  return c;
}

Episode rollout(const env::Env& e, agent::SymSacAgent<double>& ag,
                std::uint64_t seed, bool stochastic) {
  const bool recurrent = ag.config().net.recurrent;
  const bool use_state = ag.config().use_state;
  auto [obs, st] = e.reset(seed);

  Episode ep;
  ep.seed = seed;
  ep.source = Source::online;
  std::vector<double> in_hist, act_hist;
  auto append_input = [&] {
    if (use_state) {
      const auto fs6 = e.full_state_vector(st);
      if (!recurrent) in_hist.clear();
      in_hist.insert(in_hist.end(), fs6.begin(), fs6.end());
    } else {
      const auto f = obs.flat();
      if (!recurrent) in_hist.clear();
      in_hist.insert(in_hist.end(), f.begin(), f.end());
    }
  };
  append_input();

  while (true) {
    TransitionStep t;
    t.obs = obs;
    t.state = e.full_state_vector(st);
    t.action = ag.act(in_hist, act_hist, stochastic);
    const auto res = e.step(st, t.action);
    t.reward = res.reward;
    t.done = res.done;
    t.success = res.success;
    ep.steps.push_back(t);
    obs = res.obs;
    if (res.done) {
      ep.final_obs = obs;
      ep.final_state = e.full_state_vector(st);
      ep.success = res.success;
      break;
    }
    if (recurrent) {
      act_hist.push_back(t.action.delta.x);
      act_hist.push_back(t.action.delta.y);
      act_hist.push_back(t.action.delta.z);
    }
    append_input();
  }
  return ep;
}

EvalSummary evaluate(agent::SymSacAgent<double>& ag, const env::Env& e,
                     int n_episodes, std::uint64_t seed) {
  EvalSummary s;
  s.episodes = n_episodes;
  std::vector<double> success_lengths;
  for (int i = 0; i < n_episodes; ++i) {
    const Episode ep = rollout(e, ag, derive_seed(seed, i), false);
    s.success_rate += ep.success ? 1.0 : 0.0;
    s.mean_length += static_cast<double>(ep.length());
    s.mean_return += ep.total_reward();
    if (ep.success) success_lengths.push_back(static_cast<double>(ep.length()));
  }
  s.success_rate /= n_episodes;
  s.mean_length /= n_episodes;
  s.mean_return /= n_episodes;
  s.mean_success_length = mean_of(success_lengths);
  return s;
}

EvalSummary evaluate_checkpoint(const nlohmann::ordered_json& checkpoint,
                                const env::EnvConfig& env_cfg, int n_episodes,
                                std::uint64_t seed) {
  agent::AgentConfig acfg;
  try {
    acfg = cfg::agent_from_json(checkpoint.at("config").at("agent"));
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("checkpoint: missing embedded agent config");
  }
  agent::SymSacAgent<double> ag(acfg, derive_seed(seed, "ckpt"));
  ag.from_json(checkpoint.at("agent"));
  const env::Env e(env_cfg);
  return evaluate(ag, e, n_episodes, seed);
}

RunResult train(const TrainConfig& resolved, std::uint64_t seed,
                const std::vector<Episode>& demos, std::ostream* log) {
  TrainConfig c = resolved;
  c.seeds = {seed};
  c.validate();
  if (demos.empty()) throw std::invalid_argument("train: no demonstrations");

  RunResult out;
  out.config = cfg::root_to_json(c);

  const env::Env e(c.env);
  agent::SymSacAgent<double> ag(c.agent, derive_seed(seed, "agent"));
  replay::ReplayBuffer buffer(static_cast<size_t>(c.replay_capacity));
  std::int64_t demo_steps = 0;
  for (const auto& d : demos) {
    demo_steps += d.length();
    buffer.push(d);
  }

  RunMetrics& m = out.metrics;
  m.phase1_updates = c.phase1_updates >= 0 ? c.phase1_updates
                                           : static_cast<int>(demo_steps);

  std::int64_t total_updates = 0;
  auto do_update = [&](int phase) {
    try {
      m.updates.push_back(ag.update(buffer));
      m.update_phase.push_back(phase);
      ++total_updates;
    } catch (const net::numerical_error& err) {
      // diagnostic dump, then let the caller map it to an exit code
      std::ostringstream d;
      d << err.what() << " [phase " << phase << ", update " << total_updates
        << ", seed " << seed << "]";
      if (log) {
        *log << "[abort] " << d.str() << "\n";
        const size_t n = m.updates.size();
        for (size_t i = n > 5 ? n - 5 : 0; i < n; ++i)
          *log << "  update " << i << ": td1=" << m.updates[i].td_loss_1
               << " actor=" << m.updates[i].actor_loss
               << " alpha=" << m.updates[i].alpha << "\n";
        *log << out.config.dump(2) << std::endl;
      }
      throw net::numerical_error(d.str());
    }
  };

  if (log)
    *log << "[train] " << format_preset(c.preset) << " shape "
         << env::format_shape(c.env.shape) << " group " << c.agent.group
         << " seed " << seed << ": " << demos.size() << " demos ("
         << demo_steps << " steps), phase 1 " << m.phase1_updates
         << " updates, phase 2 " << c.phase2_env_steps << " env steps"
         << std::endl;

  for (int u = 0; u < m.phase1_updates; ++u) {
    do_update(1);
    if (log && (u + 1) % 2000 == 0)
      *log << "[phase1] update " << (u + 1) << "/" << m.phase1_updates
           << " td1=" << m.updates.back().td_loss_1
           << " alpha=" << m.updates.back().alpha << std::endl;
  }

  auto eval_at = [&](int env_step) {
    const EvalSummary s =
        evaluate(ag, e, c.eval_episodes, derive_seed(seed, "eval", env_step));
    m.evals.push_back({env_step, s.success_rate, s.mean_length, s.mean_return,
                       s.mean_success_length});
    if (log)
      *log << "[eval] step " << env_step << " success " << s.success_rate
           << " len " << s.mean_length << " return " << s.mean_return
           << std::endl;
  };
  eval_at(0);

  int env_step = 0;
  std::uint64_t ep_idx = 0;
  double credit = 0.0;
  while (env_step < c.phase2_env_steps) {
    auto [obs, st] = e.reset(derive_seed(seed, "episode", ep_idx));
    ++ep_idx;
    Episode ep;
    ep.seed = 0;  // online episodes are not replayable by seed alone
    ep.source = Source::online;
    std::vector<double> in_hist, act_hist;
    auto append_input = [&] {
      if (c.agent.use_state) {
        const auto fs6 = e.full_state_vector(st);
        if (!c.agent.net.recurrent) in_hist.clear();
        in_hist.insert(in_hist.end(), fs6.begin(), fs6.end());
      } else {
        const auto f = obs.flat();
        if (!c.agent.net.recurrent) in_hist.clear();
        in_hist.insert(in_hist.end(), f.begin(), f.end());
      }
    };
    append_input();

    while (true) {
      TransitionStep t;
      t.obs = obs;
      t.state = e.full_state_vector(st);
      t.action = ag.act(in_hist, act_hist, true);
      const auto res = e.step(st, t.action);
      t.reward = res.reward;
      t.done = res.done;
      t.success = res.success;
      ep.steps.push_back(t);
      obs = res.obs;
      ++env_step;

      if (res.done) {
        ep.final_obs = obs;
        ep.final_state = e.full_state_vector(st);
        ep.success = res.success;
        buffer.push(std::move(ep));
      }

      credit += c.updates_per_env_step;
      while (credit >= 1.0) {
        do_update(2);
        credit -= 1.0;
      }
      if (env_step % c.eval_every == 0) eval_at(env_step);

      if (res.done || env_step >= c.phase2_env_steps) break;
      if (c.agent.net.recurrent) {
        act_hist.push_back(t.action.delta.x);
        act_hist.push_back(t.action.delta.y);
        act_hist.push_back(t.action.delta.z);
      }
      append_input();
    }
    // an episode cut off by the step budget is dropped, not pushed
  }

  out.checkpoint["config"] = out.config;
  out.checkpoint["phase1_updates"] = m.phase1_updates;
  out.checkpoint["agent"] = ag.to_json();
  return out;
}

std::string run_key(const nlohmann::ordered_json& resolved_config) {
  return hex_key(fnv1a(resolved_config.dump()));
}

std::vector<Episode> demos_cached(const TrainConfig& resolved,
                                  std::uint64_t seed,
                                  const std::string& cache_dir) {
  const std::uint64_t demo_seed = derive_seed(seed, "demos");
  nlohmann::ordered_json k;
  k["env"] = cfg::to_json(resolved.env);
  k["expert"] = cfg::to_json(resolved.expert);
  k["count"] = resolved.demo_count;
  k["seed"] = demo_seed;
  const fs::path path =
      fs::path(cache_dir) / "demos" / (hex_key(fnv1a(k.dump())) + ".jsonl");
  if (fs::exists(path)) return io::load_episodes(path.string());
  std::vector<Episode> demos = expert::generate_demos(
      resolved.env, resolved.expert, resolved.demo_count, demo_seed);
  fs::create_directories(path.parent_path());
  io::save_episodes(path.string(), demos, resolved.env);
  return demos;
}

RunResult train_cached(const TrainConfig& cfg, std::uint64_t seed,
                       const std::string& cache_dir, std::ostream* log) {
  TrainConfig r = resolve(cfg);
  r.seeds = {seed};
  r.validate();
  const nlohmann::ordered_json root = cfg::root_to_json(r);
  const std::string key = run_key(root);
  const fs::path dir = fs::path(cache_dir) / "runs" / key;

  if (fs::exists(dir / "checkpoint.json")) {  // written last, marks completion
    RunResult out;
    out.config = cfg::load_json_file((dir / "config.json").string());
    if (out.config != root)
      throw std::runtime_error("artifact cache: config mismatch under " +
                               dir.string());
    out.metrics.evals = read_eval_csv((dir / "eval.csv").string());
    out.metrics.phase1_updates =
        cfg::load_json_file((dir / "checkpoint.json").string())
            .value("phase1_updates", 0);
    out.checkpoint = cfg::load_json_file((dir / "checkpoint.json").string());
    if (log) *log << "[cache] reusing run " << key << std::endl;
    return out;
  }

  const std::vector<Episode> demos = demos_cached(r, seed, cache_dir);
  RunResult out = train(r, seed, demos, log);
  fs::create_directories(dir);
  cfg::save_json_file((dir / "config.json").string(), out.config);
  write_eval_csv((dir / "eval.csv").string(), out.config, out.metrics.evals);
  write_updates_csv((dir / "updates.csv").string(), out.config, out.metrics);
  cfg::save_json_file((dir / "checkpoint.json").string(), out.checkpoint);
  return out;
}

void write_eval_csv(const std::string& path,
                    const nlohmann::ordered_json& config,
                    const std::vector<EvalRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "# pih-run " << config.dump() << "\n";
  f << "env_step,success_rate,mean_episode_length,mean_return,"
       "mean_success_length\n";
  for (const auto& r : rows)
    f << r.env_step << "," << fmt(r.success_rate) << "," << fmt(r.mean_length)
      << "," << fmt(r.mean_return) << "," << fmt(r.mean_success_length)
      << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<EvalRow> read_eval_csv(const std::string& path,
                                   nlohmann::ordered_json* config_out) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<EvalRow> rows;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# pih-run ";
      if (config_out && line.rfind(tag, 0) == 0)
        *config_out = nlohmann::ordered_json::parse(line.substr(tag.size()));
      continue;
    }
    if (!header_seen) {  // column names
      header_seen = true;
      continue;
    }
    EvalRow r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &r.env_step,
                    &r.success_rate, &r.mean_length, &r.mean_return,
                    &r.mean_success_length) != 5)
      throw std::runtime_error("malformed eval row in " + path + ": " + line);
    rows.push_back(r);
  }
  return rows;
}

void write_updates_csv(const std::string& path,
                       const nlohmann::ordered_json& config,
                       const RunMetrics& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "# pih-run " << config.dump() << "\n";
  f << "update,phase,td_loss_1,td_loss_2,critic_sym_loss,actor_loss,"
       "actor_sym_loss,entropy,alpha,q_mean\n";
  for (size_t i = 0; i < m.updates.size(); ++i) {
    const auto& u = m.updates[i];
    f << i << "," << m.update_phase[i] << "," << fmt(u.td_loss_1) << ","
      << fmt(u.td_loss_2) << "," << fmt(u.critic_sym_loss) << ","
      << fmt(u.actor_loss) << "," << fmt(u.actor_sym_loss) << ","
      << fmt(u.entropy) << "," << fmt(u.alpha) << "," << fmt(u.q_mean) << "\n";
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

double auc_success(const std::vector<EvalRow>& rows) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.success_rate;
  return s / static_cast<double>(rows.size());
}

double final_k_success(const std::vector<EvalRow>& rows, int k) {
  if (rows.empty()) return 0.0;
  const size_t n = rows.size();
  const size_t take = std::min<size_t>(static_cast<size_t>(k), n);
  double s = 0.0;
  for (size_t i = n - take; i < n; ++i) s += rows[i].success_rate;
  return s / static_cast<double>(take);
}

namespace {

AblateRow stats_row(const std::string& label, std::uint64_t seed,
                    const std::vector<EvalRow>& evals) {
  AblateRow r;
  r.label = label;
  r.seed = seed;
  r.auc = auc_success(evals);
  r.final5 = final_k_success(evals, 5);
  r.final = evals.empty() ? 0.0 : evals.back().success_rate;
  return r;
}

}  // namespace

std::vector<AblateRow> ablate_method(const TrainConfig& base,
                                     const std::string& cache_dir,
                                     std::ostream* log) {
  std::vector<AblateRow> rows;
  for (Preset p : {Preset::rsac, Preset::rsac_aug, Preset::rsac_aux,
                   Preset::rsac_aug_aux}) {
    TrainConfig c = base;
    c.preset = p;
    for (std::uint64_t s : base.seeds) {
      const RunResult res = train_cached(c, s, cache_dir, log);
      rows.push_back(stats_row(format_preset(p), s, res.metrics.evals));
    }
  }
  return rows;
}

std::vector<AblateRow> ablate_group(const TrainConfig& base,
                                    std::vector<std::string> groups,
                                    const std::string& cache_dir,
                                    std::ostream* log) {
  if (groups.empty()) groups = default_group_grid(base.env.shape);
  std::vector<AblateRow> rows;
  for (const auto& g : groups) {
    TrainConfig c = base;
    c.agent.group = g;
    for (std::uint64_t s : base.seeds) {
      const RunResult res = train_cached(c, s, cache_dir, log);
      rows.push_back(stats_row(g, s, res.metrics.evals));
    }
  }
  return rows;
}

std::vector<std::string> default_group_grid(env::Shape s) {
  switch (s) {
    case env::Shape::triangle: return {"fy", "c3", "fy*c3"};
    case env::Shape::square: return {"fxy", "c4", "fxy*c4"};
    case env::Shape::pentagon: return {"fy", "c5", "fy*c5"};
    case env::Shape::hexagon: return {"fxy", "c3", "c6"};
    case env::Shape::round: return {"fxy", "c4", "fxy*c4"};
  }
  return {"e"};
}

void write_ablate_csv(const std::string& path,
                      const nlohmann::ordered_json& base_config,
                      const std::vector<AblateRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "# pih-ablate " << base_config.dump() << "\n";
  f << "label,seed,auc_success,final5_success,final_success\n";
  for (const auto& r : rows)
    f << r.label << "," << r.seed << "," << fmt(r.auc) << "," << fmt(r.final5)
      << "," << fmt(r.final) << "\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

EvalSummary cross_shape_eval(const RunResult& run, env::Shape other,
                             int n_episodes, std::uint64_t seed) {
  env::EnvConfig ec = cfg::env_from_json(run.config.at("env"));
  ec.shape = other;
  return evaluate_checkpoint(run.checkpoint, ec, n_episodes, seed);
}

std::vector<ReportRow> report_runs(const std::string& cache_dir) {
  std::vector<ReportRow> rows;
  const fs::path base = fs::path(cache_dir) / "runs";
  if (!fs::exists(base)) return rows;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (!entry.is_directory()) continue;
    const fs::path dir = entry.path();
    if (!fs::exists(dir / "checkpoint.json") || !fs::exists(dir / "eval.csv"))
      continue;
    const auto config = cfg::load_json_file((dir / "config.json").string());
    const auto evals = read_eval_csv((dir / "eval.csv").string());
    ReportRow r;
    r.preset = config.at("train").at("preset").get<std::string>();
    r.group = config.at("agent").at("group").get<std::string>();
    r.shape = config.at("env").at("shape").get<std::string>();
    r.seed = config.at("train").at("seeds").at(0).get<std::uint64_t>();
    r.phase2_env_steps = config.at("train").at("phase2_env_steps").get<int>();
    r.auc = auc_success(evals);
    r.final5 = final_k_success(evals, 5);
    r.final = evals.empty() ? 0.0 : evals.back().success_rate;
    r.mean_success_length =
        evals.empty() ? std::numeric_limits<double>::quiet_NaN()
                      : evals.back().mean_success_length;
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.shape, a.preset, a.group, a.seed) <
           std::tie(b.shape, b.preset, b.group, b.seed);
  });
  return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-9s %-13s %-8s %5s %9s %7s %7s %7s %9s\n",
                "shape", "preset", "group", "seed", "steps", "auc", "final5",
                "final", "succ_len");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%-9s %-13s %-8s %5llu %9d %7.3f %7.3f %7.3f %9.1f\n",
                  r.shape.c_str(), r.preset.c_str(), r.group.c_str(),
                  static_cast<unsigned long long>(r.seed), r.phase2_env_steps,
                  r.auc, r.final5, r.final, r.mean_success_length);
    out << buf;
  }
  return out.str();
}

}  // namespace pih::harness
