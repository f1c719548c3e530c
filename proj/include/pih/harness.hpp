#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pih/agent.hpp"
#include "pih/env.hpp"
#include "pih/expert.hpp"
#include "pih/replay.hpp"

// Two-phase training protocol and the experiment plumbing around it:
// presets, periodic mean-mode evaluation, per-run metrics files, ablation
// grids, and a content-addressed artifact cache so repeated invocations of
// the same configuration reuse finished runs. Everything in a run is derived
// from one seed; two runs with equal resolved configs and seeds produce
// byte-identical metrics files.

namespace pih::harness {

// SAC-State and SAC-Obs are the non-recurrent baselines (privileged state
// input and raw observation input); the RSAC family is recurrent, with
// group augmentation and/or the symmetric consistency losses layered on.
enum class Preset {
  sac_state,
  sac_obs,
  rsac,
  rsac_aug,
  rsac_aux,
  rsac_aug_aux,
};

Preset parse_preset(const std::string& s);  // names like "RSAC-Aug-Aux"
std::string format_preset(Preset p);

struct PresetFlags {
  bool recurrent = false;
  bool augment = false;
  bool aux = false;
  bool state_input = false;
};
PresetFlags preset_flags(Preset p);

// demonstration budget per hole shape
int default_demo_count(env::Shape s);

// agent defaults sized for desk-scale budgets (small recurrent net, entropy
// temperature tuned automatically); the full-scale configuration lives in
// configs/full_scale.json
agent::AgentConfig desk_agent_defaults();

struct TrainConfig {
  Preset preset = Preset::rsac_aug_aux;
  int phase1_updates = -1;  // <0: one update per demonstration transition
  int phase2_env_steps = 20000;
  double updates_per_env_step = 1.0;
  int eval_every = 1000;  // environment steps between evaluations
  int eval_episodes = 10;
  int demo_count = -1;  // <0: per-shape default
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int replay_capacity = 512;  // online episodes kept; demos never evicted
  env::EnvConfig env;
  expert::ExpertConfig expert;
  agent::AgentConfig agent = desk_agent_defaults();

  void validate() const;  // throws std::invalid_argument
};

// applies the preset's flags to the agent block, fills shape-dependent
// defaults (demo count, symmetry group when left at "e"), and couples the
// agent's action bounds and torque convention to the environment's
TrainConfig resolve(const TrainConfig& in);

struct EvalRow {
  int env_step = 0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_return = 0.0;
  double mean_success_length = 0.0;  // nan when no episode succeeded
};

struct EvalSummary {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_return = 0.0;
  double mean_success_length = 0.0;
};

struct RunMetrics {
  int phase1_updates = 0;
  std::vector<EvalRow> evals;  // env_step 0 row, then every eval_every
  std::vector<agent::UpdateMetrics> updates;
  std::vector<int> update_phase;  // 1 or 2, aligned with updates
};

struct RunResult {
  nlohmann::ordered_json config;  // resolved config, seeds = {this run's}
  RunMetrics metrics;             // updates empty when loaded from cache
  nlohmann::ordered_json checkpoint;
};

// one episode under the current policy; the recurrent agent re-reads its
// whole action-observation history each step
Episode rollout(const env::Env& e, agent::SymSacAgent<double>& ag,
                std::uint64_t seed, bool stochastic);

// mean-mode rollouts on fresh seeds; never touches the agent's rng streams
EvalSummary evaluate(agent::SymSacAgent<double>& ag, const env::Env& e,
                     int n_episodes, std::uint64_t seed);

// restores the agent embedded in a checkpoint and evaluates it on the given
// environment (cross-shape evaluation passes a different shape here)
EvalSummary evaluate_checkpoint(const nlohmann::ordered_json& checkpoint,
                                const env::EnvConfig& env_cfg, int n_episodes,
                                std::uint64_t seed);

RunResult train(const TrainConfig& resolved, std::uint64_t seed,
                const std::vector<Episode>& demos, std::ostream* log = nullptr);

// --- artifact cache ---

std::string run_key(const nlohmann::ordered_json& resolved_config);

// demos are keyed by (env, expert, count, demo seed); generated on a miss
std::vector<Episode> demos_cached(const TrainConfig& resolved,
                                  std::uint64_t seed,
                                  const std::string& cache_dir);

// cache_dir/runs/<key>/{config.json, eval.csv, updates.csv, checkpoint.json};
// a finished run is recognized by its checkpoint (written last)
RunResult train_cached(const TrainConfig& cfg, std::uint64_t seed,
                       const std::string& cache_dir,
                       std::ostream* log = nullptr);

void write_eval_csv(const std::string& path,
                    const nlohmann::ordered_json& config,
                    const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_eval_csv(const std::string& path,
                                   nlohmann::ordered_json* config_out = nullptr);
void write_updates_csv(const std::string& path,
                       const nlohmann::ordered_json& config,
                       const RunMetrics& m);

// comparison statistics over an evaluation curve
double auc_success(const std::vector<EvalRow>& rows);  // mean over all rows
double final_k_success(const std::vector<EvalRow>& rows, int k);

struct AblateRow {
  std::string label;  // preset name or group spec
  std::uint64_t seed = 0;
  double auc = 0.0;
  double final5 = 0.0;
  double final = 0.0;
};

// method axis: {RSAC, RSAC-Aug, RSAC-Aux, RSAC-Aug-Aux} x base.seeds
std::vector<AblateRow> ablate_method(const TrainConfig& base,
                                     const std::string& cache_dir,
                                     std::ostream* log = nullptr);
// group axis: the given group specs (default grid per shape) x base.seeds,
// all under the base preset
std::vector<AblateRow> ablate_group(const TrainConfig& base,
                                    std::vector<std::string> groups,
                                    const std::string& cache_dir,
                                    std::ostream* log = nullptr);
std::vector<std::string> default_group_grid(env::Shape s);
void write_ablate_csv(const std::string& path,
                      const nlohmann::ordered_json& base_config,
                      const std::vector<AblateRow>& rows);

// frozen-policy transfer: evaluate a finished run's checkpoint on a
// different hole shape (same clearance and sensor model)
EvalSummary cross_shape_eval(const RunResult& run, env::Shape other,
                             int n_episodes, std::uint64_t seed);

// one row per cached run, for the report command
struct ReportRow {
  std::string preset, group, shape;
  std::uint64_t seed = 0;
  int phase2_env_steps = 0;
  double auc = 0.0;
  double final5 = 0.0;
  double final = 0.0;
  double mean_success_length = 0.0;  // from the last eval row
};
std::vector<ReportRow> report_runs(const std::string& cache_dir);
std::string format_report(const std::vector<ReportRow>& rows);

}  // namespace pih::harness
