#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pih/config.hpp"
#include "pih/expert.hpp"
#include "pih/harness.hpp"

using namespace pih;
using namespace pih::harness;

namespace fs = std::filesystem;

namespace {

// each test gets its own cache directory so nothing depends on test order
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("pih_harness_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// budgets small enough that a full two-phase run takes well under a second
TrainConfig tiny_cfg() {
  TrainConfig c;
  c.preset = Preset::rsac;
  c.phase1_updates = 4;
  c.phase2_env_steps = 30;
  c.eval_every = 15;
  c.eval_episodes = 2;
  c.demo_count = 3;
  c.seeds = {1};
  c.agent.batch_episodes = 2;
  c.agent.net.obs_embed = 4;
  c.agent.net.act_embed = 3;
  c.agent.net.rnn_hidden = 5;
  c.agent.net.mlp_hidden = {6};
  return c;
}

bool rows_equal(const std::vector<EvalRow>& a, const std::vector<EvalRow>& b) {
  if (a.size() != b.size()) return false;
  auto same = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].env_step != b[i].env_step) return false;
    if (!same(a[i].success_rate, b[i].success_rate)) return false;
    if (!same(a[i].mean_length, b[i].mean_length)) return false;
    if (!same(a[i].mean_return, b[i].mean_return)) return false;
    if (!same(a[i].mean_success_length, b[i].mean_success_length)) return false;
  }
  return true;
}

bool updates_equal(const std::vector<agent::UpdateMetrics>& a,
                   const std::vector<agent::UpdateMetrics>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].td_loss_1 != b[i].td_loss_1 || a[i].td_loss_2 != b[i].td_loss_2 ||
        a[i].critic_sym_loss != b[i].critic_sym_loss ||
        a[i].actor_loss != b[i].actor_loss ||
        a[i].actor_sym_loss != b[i].actor_sym_loss ||
        a[i].entropy != b[i].entropy || a[i].alpha != b[i].alpha ||
        a[i].q_mean != b[i].q_mean)
      return false;
  }
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("preset names round-trip and flag table matches the family") {
  for (Preset p : {Preset::sac_state, Preset::sac_obs, Preset::rsac,
                   Preset::rsac_aug, Preset::rsac_aux, Preset::rsac_aug_aux})
    CHECK(parse_preset(format_preset(p)) == p);
  CHECK_THROWS_AS(parse_preset("rsac"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset(""), std::invalid_argument);

  CHECK(preset_flags(Preset::sac_state).state_input);
  CHECK_FALSE(preset_flags(Preset::sac_state).recurrent);
  CHECK_FALSE(preset_flags(Preset::sac_obs).state_input);
  CHECK(preset_flags(Preset::rsac).recurrent);
  CHECK_FALSE(preset_flags(Preset::rsac).augment);
  CHECK(preset_flags(Preset::rsac_aug).augment);
  CHECK_FALSE(preset_flags(Preset::rsac_aug).aux);
  CHECK(preset_flags(Preset::rsac_aux).aux);
  CHECK_FALSE(preset_flags(Preset::rsac_aux).augment);
  CHECK(preset_flags(Preset::rsac_aug_aux).augment);
  CHECK(preset_flags(Preset::rsac_aug_aux).aux);
}

TEST_CASE("train config validation rejects each out-of-range field") {
  CHECK_NOTHROW(tiny_cfg().validate());
  auto bad = [](auto mut) {
    TrainConfig c = tiny_cfg();
    mut(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  bad([](TrainConfig& c) { c.phase1_updates = -2; });
  bad([](TrainConfig& c) { c.phase2_env_steps = -1; });
  bad([](TrainConfig& c) { c.updates_per_env_step = -0.5; });
  bad([](TrainConfig& c) { c.updates_per_env_step = 1.0 / 0.0; });
  bad([](TrainConfig& c) { c.eval_every = 0; });
  bad([](TrainConfig& c) { c.eval_episodes = 0; });
  bad([](TrainConfig& c) { c.demo_count = 0; });
  bad([](TrainConfig& c) { c.demo_count = -3; });
  bad([](TrainConfig& c) { c.seeds.clear(); });
  bad([](TrainConfig& c) { c.replay_capacity = 0; });
  bad([](TrainConfig& c) { c.agent.gamma = 1.5; });  // nested agent validate
}

TEST_CASE("resolve applies preset flags and couples agent to environment") {
  TrainConfig c = tiny_cfg();
  c.preset = Preset::rsac_aug_aux;
  c.demo_count = -1;
  c.env.shape = env::Shape::square;
  c.env.xy_bound = 0.003;
  c.env.z_bound = 0.0015;
  c.env.torque_convention = sym::TorqueConvention::physical;
  const TrainConfig r = resolve(c);

  CHECK(r.agent.net.recurrent);
  CHECK(r.agent.augment);
  CHECK(r.agent.aux_losses);
  CHECK_FALSE(r.agent.use_state);
  CHECK(r.agent.net.obs_dim == kObsDim);
  CHECK(r.agent.group == "fxy*c4");  // best group for the square hole
  CHECK(r.agent.bounds[0] == 0.003);
  CHECK(r.agent.bounds[1] == 0.003);
  CHECK(r.agent.bounds[2] == 0.0015);
  CHECK(r.agent.convention == sym::TorqueConvention::physical);
  CHECK(r.demo_count == 100);

  SUBCASE("an explicit group survives") {
    c.agent.group = "c2";
    CHECK(resolve(c).agent.group == "c2");
  }
  SUBCASE("plain recurrent preset keeps the identity group") {
    c.preset = Preset::rsac;
    const TrainConfig r2 = resolve(c);
    CHECK(r2.agent.group == "e");
    CHECK_FALSE(r2.agent.augment);
    CHECK_FALSE(r2.agent.aux_losses);
  }
  SUBCASE("privileged baseline gets the state input width") {
    c.preset = Preset::sac_state;
    const TrainConfig r2 = resolve(c);
    CHECK(r2.agent.use_state);
    CHECK(r2.agent.net.obs_dim == kStateDim);
    CHECK_FALSE(r2.agent.net.recurrent);
  }
  SUBCASE("shape-dependent demo budget") {
    c.env.shape = env::Shape::hexagon;
    CHECK(resolve(c).demo_count == 200);
    c.demo_count = 7;
    CHECK(resolve(c).demo_count == 7);
  }
}

TEST_CASE("root config json round-trips through overrides with strict keys") {
  TrainConfig c = tiny_cfg();
  c.preset = Preset::rsac_aug;
  c.env.k_lat = 650.0;
  cfg::json root = cfg::root_to_json(c);
  CHECK(root.at("version") == cfg::kConfigVersion);

  // byte-level stability: dump -> parse -> dump
  const TrainConfig back = cfg::root_from_json(root);
  CHECK(cfg::root_to_json(back) == root);

  cfg::apply_override(root, "env.k_lat=700");
  cfg::apply_override(root, "train.preset=RSAC-Aux");
  cfg::apply_override(root, "agent.net.rnn_hidden=8");
  const TrainConfig over = cfg::root_from_json(root);
  CHECK(over.env.k_lat == 700.0);
  CHECK(over.preset == Preset::rsac_aux);
  CHECK(over.agent.net.rnn_hidden == 8);

  SUBCASE("a typo'd path is rejected, naming the bad key") {
    cfg::apply_override(root, "env.k_latt=5");
    try {
      cfg::root_from_json(root);
      CHECK(false);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("env.k_latt") != std::string::npos);
    }
  }
  SUBCASE("a typo'd block is rejected at the root") {
    cfg::apply_override(root, "envv.k_lat=5");
    CHECK_THROWS_AS(cfg::root_from_json(root), std::invalid_argument);
  }
  SUBCASE("malformed assignments throw") {
    CHECK_THROWS_AS(cfg::apply_override(root, "no_equals"),
                    std::invalid_argument);
    CHECK_THROWS_AS(cfg::apply_override(root, "=5"), std::invalid_argument);
    CHECK_THROWS_AS(cfg::apply_override(root, "env..k_lat=5"),
                    std::invalid_argument);
  }
  SUBCASE("wrong version is rejected") {
    root["version"] = 999;
    CHECK_THROWS_AS(cfg::root_from_json(root), std::invalid_argument);
  }
}

TEST_CASE("evaluation rows land at step 0 and every eval_every thereafter") {
  TrainConfig c = resolve(tiny_cfg());
  c.phase2_env_steps = 30;
  c.eval_every = 10;
  const auto demos =
      expert::generate_demos(c.env, c.expert, c.demo_count, 123);
  const RunResult res = train(c, 1, demos);
  REQUIRE(res.metrics.evals.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(res.metrics.evals[i].env_step == 10 * i);
  // one update per env step at the default rate, after the phase-1 block
  CHECK(res.metrics.updates.size() ==
        static_cast<size_t>(c.phase1_updates + c.phase2_env_steps));
  for (int u = 0; u < c.phase1_updates; ++u)
    CHECK(res.metrics.update_phase[u] == 1);
  CHECK(res.metrics.update_phase.back() == 2);
}

TEST_CASE("fractional update rate and the per-transition phase-1 default") {
  TrainConfig c = resolve(tiny_cfg());
  c.phase1_updates = -1;  // one update per demonstration transition
  c.phase2_env_steps = 20;
  c.eval_every = 20;
  c.updates_per_env_step = 0.5;
  const auto demos = expert::generate_demos(c.env, c.expert, c.demo_count, 7);
  std::int64_t transitions = 0;
  for (const auto& d : demos) transitions += d.length();

  const RunResult res = train(c, 2, demos);
  CHECK(res.metrics.phase1_updates == transitions);
  int p2 = 0;
  for (int ph : res.metrics.update_phase) p2 += ph == 2 ? 1 : 0;
  CHECK(p2 == 10);  // half the env steps earn an update
}

TEST_CASE("phase-1-only training still evaluates once and checkpoints") {
  TrainConfig c = resolve(tiny_cfg());
  c.phase2_env_steps = 0;
  const auto demos = expert::generate_demos(c.env, c.expert, c.demo_count, 5);
  const RunResult res = train(c, 3, demos);
  REQUIRE(res.metrics.evals.size() == 1);
  CHECK(res.metrics.evals[0].env_step == 0);
  CHECK(res.metrics.updates.size() == static_cast<size_t>(c.phase1_updates));
  CHECK(res.checkpoint.contains("agent"));
  CHECK(res.checkpoint.at("config") == res.config);
}

TEST_CASE("same seed, same config: byte-identical metrics files") {
  TrainConfig c = resolve(tiny_cfg());
  const auto demos = expert::generate_demos(c.env, c.expert, c.demo_count, 9);
  const RunResult a = train(c, 11, demos);
  const RunResult b = train(c, 11, demos);
  CHECK(rows_equal(a.metrics.evals, b.metrics.evals));
  CHECK(updates_equal(a.metrics.updates, b.metrics.updates));
  CHECK(a.checkpoint == b.checkpoint);

  TempDir td("determinism");
  write_eval_csv((td.path / "a.csv").string(), a.config, a.metrics.evals);
  write_eval_csv((td.path / "b.csv").string(), b.config, b.metrics.evals);
  CHECK(slurp(td.path / "a.csv") == slurp(td.path / "b.csv"));

  const RunResult other = train(c, 12, demos);
  CHECK_FALSE(updates_equal(a.metrics.updates, other.metrics.updates));
}

TEST_CASE("trivial-group augmentation reproduces the plain recurrent run") {
  // hand-resolved configs so resolve() cannot replace the identity group
  TrainConfig plain = resolve(tiny_cfg());
  TrainConfig degen = plain;
  degen.preset = Preset::rsac_aug_aux;
  degen.agent.augment = true;
  degen.agent.aux_losses = true;
  degen.agent.group = "e";

  const auto demos =
      expert::generate_demos(plain.env, plain.expert, plain.demo_count, 21);
  const RunResult a = train(plain, 4, demos);
  const RunResult b = train(degen, 4, demos);
  CHECK(updates_equal(a.metrics.updates, b.metrics.updates));
  CHECK(rows_equal(a.metrics.evals, b.metrics.evals));
  for (const auto& u : b.metrics.updates) {
    CHECK(u.critic_sym_loss == 0.0);
    CHECK(u.actor_sym_loss == 0.0);
  }
}

TEST_CASE("eval csv round-trips rows, config header, and the nan sentinel") {
  TempDir td("csv");
  const std::string path = (td.path / "eval.csv").string();
  cfg::json config = cfg::root_to_json(tiny_cfg());
  std::vector<EvalRow> rows = {
      {0, 0.0, 200.0, -1.25, std::nan("")},
      {1000, 0.5, 123.456789012345678, 0.5, 61.5},
      {2000, 1.0, 55.0, 1.0, 55.0},
  };
  write_eval_csv(path, config, rows);

  cfg::json config_back;
  const auto back = read_eval_csv(path, &config_back);
  CHECK(config_back == config);
  CHECK(rows_equal(rows, back));

  SUBCASE("malformed rows are reported with the offending line") {
    std::ofstream f(path, std::ios::app);
    f << "not,a,row\n";
    f.close();
    CHECK_THROWS_AS(read_eval_csv(path), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_eval_csv((td.path / "nope.csv").string()),
                    std::runtime_error);
  }
}

TEST_CASE("curve statistics: auc is the row mean, final-k averages the tail") {
  std::vector<EvalRow> rows;
  for (int i = 0; i < 10; ++i)
    rows.push_back({i * 100, i / 10.0, 0.0, 0.0, 0.0});
  CHECK(auc_success(rows) == doctest::Approx(0.45));
  CHECK(final_k_success(rows, 5) == doctest::Approx(0.7));
  CHECK(final_k_success(rows, 1) == doctest::Approx(0.9));
  CHECK(final_k_success(rows, 50) == doctest::Approx(0.45));  // clamps to n
  CHECK(auc_success({}) == 0.0);
  CHECK(final_k_success({}, 5) == 0.0);
}

TEST_CASE("run key is a stable 16-hex digest of the resolved config") {
  const cfg::json a = cfg::root_to_json(resolve(tiny_cfg()));
  TrainConfig c2 = tiny_cfg();
  c2.phase2_env_steps += 1;
  const cfg::json b = cfg::root_to_json(resolve(c2));
  const std::string ka = run_key(a);
  CHECK(ka.size() == 16);
  CHECK(ka.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(ka == run_key(a));
  CHECK(ka != run_key(b));
}

TEST_CASE("demo cache: a second request loads the identical episodes") {
  TempDir td("demos");
  const TrainConfig c = resolve(tiny_cfg());
  const auto first = demos_cached(c, 31, td.str());
  REQUIRE(first.size() == static_cast<size_t>(c.demo_count));
  CHECK(fs::exists(td.path / "demos"));

  const auto second = demos_cached(c, 31, td.str());
  REQUIRE(second.size() == first.size());
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].length() == second[i].length());
    CHECK(first[i].success == second[i].success);
    CHECK(first[i].total_reward() == second[i].total_reward());
    for (size_t t = 0; t < first[i].steps.size(); ++t) {
      CHECK(first[i].steps[t].action.delta.x == second[i].steps[t].action.delta.x);
      CHECK(first[i].steps[t].obs.flat() == second[i].steps[t].obs.flat());
    }
  }
  // a different run seed derives a different demo stream
  const auto other = demos_cached(c, 32, td.str());
  bool any_diff = other.size() != first.size();
  for (size_t i = 0; !any_diff && i < first.size(); ++i)
    any_diff = first[i].steps[0].action.delta.x !=
               other[i].steps[0].action.delta.x;
  CHECK(any_diff);
}

TEST_CASE("artifact cache: reuse, completion marker, and config mismatch") {
  TempDir td("cache");
  const TrainConfig c = tiny_cfg();
  const RunResult fresh = train_cached(c, 1, td.str());
  CHECK_FALSE(fresh.metrics.updates.empty());

  const std::string key = run_key(cfg::root_to_json([&] {
    TrainConfig r = resolve(c);
    r.seeds = {1};
    return r;
  }()));
  const fs::path dir = td.path / "runs" / key;
  REQUIRE(fs::exists(dir / "checkpoint.json"));
  REQUIRE(fs::exists(dir / "eval.csv"));
  REQUIRE(fs::exists(dir / "updates.csv"));

  const RunResult cached = train_cached(c, 1, td.str());
  CHECK(cached.metrics.updates.empty());  // loaded, not retrained
  CHECK(rows_equal(cached.metrics.evals, fresh.metrics.evals));
  CHECK(cached.checkpoint == fresh.checkpoint);
  CHECK(cached.metrics.phase1_updates == fresh.metrics.phase1_updates);

  SUBCASE("a missing checkpoint means unfinished: the run is redone") {
    fs::remove(dir / "checkpoint.json");
    const RunResult redo = train_cached(c, 1, td.str());
    CHECK_FALSE(redo.metrics.updates.empty());
    CHECK(fs::exists(dir / "checkpoint.json"));
  }
  SUBCASE("a tampered config under the same key is an error") {
    cfg::json stored = cfg::load_json_file((dir / "config.json").string());
    stored["train"]["eval_episodes"] = 99;
    cfg::save_json_file((dir / "config.json").string(), stored);
    CHECK_THROWS_AS(train_cached(c, 1, td.str()), std::runtime_error);
  }
}

TEST_CASE("checkpoint evaluation is reproducible and matches same-shape transfer") {
  TempDir td("ckpt");
  const TrainConfig c = tiny_cfg();
  const RunResult run = train_cached(c, 2, td.str());

  const env::EnvConfig ec = cfg::env_from_json(run.config.at("env"));
  const EvalSummary a = evaluate_checkpoint(run.checkpoint, ec, 3, 77);
  const EvalSummary b = evaluate_checkpoint(run.checkpoint, ec, 3, 77);
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.mean_length == b.mean_length);
  CHECK(a.mean_return == b.mean_return);

  const EvalSummary same = cross_shape_eval(run, ec.shape, 3, 77);
  CHECK(a.mean_return == same.mean_return);
  CHECK(a.mean_length == same.mean_length);

  // transfer to a different hole is a different problem
  const EvalSummary tri = cross_shape_eval(run, env::Shape::triangle, 3, 77);
  CHECK(tri.episodes == 3);
  CHECK(std::isfinite(tri.mean_return));

  SUBCASE("a checkpoint without the embedded config is rejected") {
    cfg::json broken = run.checkpoint;
    broken.erase("config");
    CHECK_THROWS_AS(evaluate_checkpoint(broken, ec, 1, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("an untrained policy essentially never solves the task") {
  const TrainConfig c = resolve(tiny_cfg());
  agent::SymSacAgent<double> ag(c.agent, 99);
  const env::Env e(c.env);
  const EvalSummary s = evaluate(ag, e, 50, 424242);
  CHECK(s.success_rate <= 0.1);
  CHECK(s.mean_length > 10.0);  // episodes are not ending instantly
}

TEST_CASE("method ablation covers the recurrent grid and caches by label") {
  TempDir td("ablate_m");
  TrainConfig base = tiny_cfg();
  base.phase1_updates = 2;
  base.phase2_env_steps = 10;
  base.eval_every = 10;
  base.eval_episodes = 1;
  base.seeds = {5};

  const auto rows = ablate_method(base, td.str());
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].label == "RSAC");
  CHECK(rows[1].label == "RSAC-Aug");
  CHECK(rows[2].label == "RSAC-Aux");
  CHECK(rows[3].label == "RSAC-Aug-Aux");
  for (const auto& r : rows) {
    CHECK(r.seed == 5);
    CHECK(r.auc >= 0.0);
    CHECK(r.auc <= 1.0);
    CHECK(r.final5 >= r.final * 0.0);  // both defined
  }
  // second pass hits the cache for all four runs
  const auto again = ablate_method(base, td.str());
  REQUIRE(again.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(again[i].auc == rows[i].auc);
    CHECK(again[i].final5 == rows[i].final5);
  }

  write_ablate_csv((td.path / "ablate.csv").string(),
                   cfg::root_to_json(resolve(base)), rows);
  const std::string text = slurp(td.path / "ablate.csv");
  CHECK(text.find("label,seed,auc_success") != std::string::npos);
  CHECK(text.find("RSAC-Aug-Aux,5,") != std::string::npos);
}

TEST_CASE("group ablation trains each requested group under the base preset") {
  TempDir td("ablate_g");
  TrainConfig base = tiny_cfg();
  base.preset = Preset::rsac_aug;
  base.phase1_updates = 2;
  base.phase2_env_steps = 10;
  base.eval_every = 10;
  base.eval_episodes = 1;
  base.seeds = {6};

  const auto rows = ablate_group(base, {"c2", "fy"}, td.str());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "c2");
  CHECK(rows[1].label == "fy");

  // the stored configs really carry the requested groups
  const auto report = report_runs(td.str());
  REQUIRE(report.size() == 2);
  CHECK(report[0].preset == "RSAC-Aug");
  bool saw_c2 = false, saw_fy = false;
  for (const auto& r : report) {
    saw_c2 = saw_c2 || r.group == "c2";
    saw_fy = saw_fy || r.group == "fy";
  }
  CHECK(saw_c2);
  CHECK(saw_fy);
}

TEST_CASE("default group grids name subgroups of each hole symmetry") {
  using env::Shape;
  CHECK(default_group_grid(Shape::triangle) ==
        std::vector<std::string>{"fy", "c3", "fy*c3"});
  CHECK(default_group_grid(Shape::square) ==
        std::vector<std::string>{"fxy", "c4", "fxy*c4"});
  CHECK(default_group_grid(Shape::pentagon) ==
        std::vector<std::string>{"fy", "c5", "fy*c5"});
  CHECK(default_group_grid(Shape::hexagon) ==
        std::vector<std::string>{"fxy", "c3", "c6"});
  CHECK(default_group_grid(Shape::round) ==
        std::vector<std::string>{"fxy", "c4", "fxy*c4"});
}

TEST_CASE("report lists every finished cached run with its curve statistics") {
  TempDir td("report");
  TrainConfig c = tiny_cfg();
  c.phase1_updates = 2;
  c.phase2_env_steps = 10;
  c.eval_every = 5;
  c.eval_episodes = 1;
  train_cached(c, 1, td.str());
  c.preset = Preset::sac_obs;
  train_cached(c, 1, td.str());

  const auto rows = report_runs(td.str());
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.shape == "square");
    CHECK(r.seed == 1);
    CHECK(r.phase2_env_steps == 10);
    CHECK(r.auc >= 0.0);
  }
  // sorted by (shape, preset, group, seed): RSAC before SAC-Obs
  CHECK(rows[0].preset == "RSAC");
  CHECK(rows[1].preset == "SAC-Obs");

  const std::string text = format_report(rows);
  CHECK(text.find("shape") != std::string::npos);
  CHECK(text.find("RSAC") != std::string::npos);
  CHECK(text.find("SAC-Obs") != std::string::npos);

  CHECK(report_runs((td.path / "empty").string()).empty());
}
