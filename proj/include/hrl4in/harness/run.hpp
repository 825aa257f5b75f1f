#pragma once

#include "hrl4in/harness/config.hpp"
#include "hrl4in/harness/metrics.hpp"

namespace hrl4in::harness {

struct RunResult {
  uint64_t seed = 0;
  int updates_run = 0;
  double best_eval_success = 0.0;
  EvalReport final_eval;  // greedy, from the best checkpoint
  std::string run_dir;
  std::string metrics_path;
  std::string best_checkpoint_path;
};

// Trains one seed of the configured algorithm. Artifacts under
// <out_base>/seed_<seed>/: effective_config.json, metrics.jsonl,
// checkpoint_last.bin, checkpoint_best.bin, eval.json, and (hierarchical
// algorithms) hl_decisions.csv + heatmap.csv from the final evaluation.
// On a divergence abort the last checkpoint and partial log are preserved.
RunResult run_training(const RunConfig& cfg, uint64_t seed, const std::string& out_base);

// Reruns the final greedy evaluation of a stored checkpoint.
EvalReport evaluate_checkpoint(const std::string& checkpoint_path, const RunConfig& cfg,
                               int n_episodes, bool deterministic,
                               std::vector<HlDecision>* decisions = nullptr);

}  // namespace hrl4in::harness
