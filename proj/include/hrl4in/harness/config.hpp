#pragma once

#include "hrl4in/harness/trainers.hpp"

namespace hrl4in::harness {

// Full experiment description. JSON on disk; every field has a default so a
// config file only lists overrides. The effective config is echoed into the
// output directory of every run.
struct RunConfig {
  std::string algorithm = "flat_ppo";  // flat_ppo | hrl4in | hrl4in_no_embodiment
  std::string layout_path;
  std::vector<uint64_t> seeds{1, 2, 3};
  int total_updates = 100;
  int num_envs = 8;
  int rollout_steps = 256;
  int eval_interval = 10;  // update cycles between greedy evals (0 = final only)
  int eval_episodes = 100;
  int checkpoint_interval = 50;
  double early_stop_success = -1.0;  // stop early when greedy success >= this
  std::string out_dir = "runs/out";

  ppo::PpoConfig ppo;
  hrl::HrlConfig hrl;

  std::vector<int> conv_channels{32, 64, 64};
  int conv_kernel = 3;
  int conv_fc = 128;
  int vec_fc = 64;
  int hidden = 512;

  void validate() const;
  static RunConfig load(const std::string& path);
  static RunConfig parse(const std::string& text);
  std::string serialize() const;

  TrainerOptions trainer_options(uint64_t seed,
                                 std::shared_ptr<const env::GridLayout> layout) const;
};

}  // namespace hrl4in::harness
