#include "hrl4in/harness/run.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace hrl4in::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("run: cannot write '" + path + "'");
  f << text;
}

json eval_to_json(const EvalReport& r) {
  return {{"episodes", r.episodes},
          {"success_rate", r.success_rate},
          {"mean_length", r.mean_length},
          {"mean_reward", r.mean_reward},
          {"mean_energy", r.mean_energy},
          {"mean_length_ratio", r.mean_length_ratio},
          {"embodiment_fractions", r.embodiment_fractions}};
}

void write_decisions_csv(const std::string& path, const std::vector<HlDecision>& ds,
                         int k) {
  std::ofstream f(path);
  if (!f) throw ConfigError("run: cannot write '" + path + "'");
  f << "# k=" << k << "\n";
  f << "x,y,embodiment\n";
  for (const auto& d : ds)
    f << d.pos.x << "," << d.pos.y << "," << static_cast<int>(d.embodiment) << "\n";
}

}  // namespace

RunResult run_training(const RunConfig& cfg, uint64_t seed, const std::string& out_base) {
  cfg.validate();
  auto layout = std::make_shared<env::GridLayout>(env::GridLayout::load(cfg.layout_path));

  RunResult res;
  res.seed = seed;
  fs::path dir = fs::path(out_base) / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);
  res.run_dir = dir.string();
  res.metrics_path = (dir / "metrics.jsonl").string();
  res.best_checkpoint_path = (dir / "checkpoint_best.bin").string();
  std::string last_ckpt = (dir / "checkpoint_last.bin").string();
  write_text((dir / "effective_config.json").string(), cfg.serialize());
  std::ofstream(res.metrics_path, std::ios::trunc);  // fresh log per run

  const bool hierarchical = cfg.algorithm != "flat_ppo";
  TrainerOptions topt = cfg.trainer_options(seed, layout);
  std::unique_ptr<FlatTrainer> flat;
  std::unique_ptr<HrlTrainer> hrl_tr;
  if (hierarchical)
    hrl_tr = std::make_unique<HrlTrainer>(topt);
  else
    flat = std::make_unique<FlatTrainer>(topt);

  auto save = [&](const std::string& path) {
    hierarchical ? hrl_tr->save_checkpoint(path) : flat->save_checkpoint(path);
  };
  auto greedy_eval = [&](int n, uint64_t eval_seed,
                         std::vector<HlDecision>* ds = nullptr) {
    EvalReport r = hierarchical
                       ? evaluate_hrl(hrl_tr->hl(), hrl_tr->ll(), topt.hrl, layout, n,
                                      eval_seed, true)
                       : evaluate_flat(flat->policy(), layout, n, eval_seed, true);
    if (ds) *ds = r.hl_decisions;
    return r;
  };

  const uint64_t eval_seed = derive_seed(seed, "eval");
  // Quick evals on cadence use fewer episodes; threshold hits are confirmed
  // with the full count before stopping early.
  const int quick_episodes = std::min(cfg.eval_episodes, 20);
  double best = -1.0;
  bool stopped_early = false;

  for (int u = 0; u < cfg.total_updates; ++u) {
    CycleMetrics cm;
    try {
      cm = hierarchical ? hrl_tr->run_update_cycle() : flat->run_update_cycle();
    } catch (const std::exception& e) {
      save(last_ckpt);
      write_text((dir / "diagnostics.txt").string(),
                 std::string("training aborted at update ") + std::to_string(u) + ": " +
                     e.what() + "\n");
      throw;
    }
    append_metrics(res.metrics_path, MetricsRecord::from_cycle(cm));
    res.updates_run = u + 1;

    if (cfg.checkpoint_interval > 0 && (u + 1) % cfg.checkpoint_interval == 0)
      save(last_ckpt);

    bool eval_now = cfg.eval_interval > 0 && (u + 1) % cfg.eval_interval == 0;
    if (eval_now) {
      EvalReport quick = greedy_eval(quick_episodes, eval_seed);
      if (quick.success_rate > best) {
        best = quick.success_rate;
        save(res.best_checkpoint_path);
      }
      if (cfg.early_stop_success >= 0 && quick.success_rate >= cfg.early_stop_success) {
        EvalReport full = greedy_eval(cfg.eval_episodes, eval_seed);
        if (full.success_rate >= cfg.early_stop_success) {
          best = std::max(best, full.success_rate);
          save(res.best_checkpoint_path);
          stopped_early = true;
          break;
        }
      }
    }
  }
  save(last_ckpt);
  if (best < 0) {
    best = greedy_eval(quick_episodes, eval_seed).success_rate;
    save(res.best_checkpoint_path);
  }
  res.best_eval_success = best;
  (void)stopped_early;

  // Final evaluation from the best checkpoint.
  if (hierarchical)
    hrl_tr->load_checkpoint(res.best_checkpoint_path);
  else
    flat->load_checkpoint(res.best_checkpoint_path);
  std::vector<HlDecision> decisions;
  res.final_eval = greedy_eval(cfg.eval_episodes, derive_seed(seed, "final_eval"),
                               &decisions);
  write_text((dir / "eval.json").string(), eval_to_json(res.final_eval).dump(2) + "\n");
  if (hierarchical) {
    write_decisions_csv((dir / "hl_decisions.csv").string(), decisions, layout->k);
    EmbodimentUsageMap::build(decisions, layout->k)
        .export_csv((dir / "heatmap.csv").string());
  }
  return res;
}

EvalReport evaluate_checkpoint(const std::string& checkpoint_path, const RunConfig& cfg,
                               int n_episodes, bool deterministic,
                               std::vector<HlDecision>* decisions) {
  cfg.validate();
  auto layout = std::make_shared<env::GridLayout>(env::GridLayout::load(cfg.layout_path));
  TrainerOptions topt = cfg.trainer_options(cfg.seeds.front(), layout);
  uint64_t eval_seed = derive_seed(cfg.seeds.front(), "final_eval");
  EvalReport r;
  if (cfg.algorithm == "flat_ppo") {
    FlatTrainer tr(topt);
    tr.load_checkpoint(checkpoint_path);
    r = evaluate_flat(tr.policy(), layout, n_episodes, eval_seed, deterministic);
  } else {
    HrlTrainer tr(topt);
    tr.load_checkpoint(checkpoint_path);
    r = evaluate_hrl(tr.hl(), tr.ll(), topt.hrl, layout, n_episodes, eval_seed,
                     deterministic);
  }
  if (decisions) *decisions = r.hl_decisions;
  return r;
}

}  // namespace hrl4in::harness
