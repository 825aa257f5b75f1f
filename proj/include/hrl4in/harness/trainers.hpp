#pragma once

#include <memory>

#include "hrl4in/env/oracle.hpp"
#include "hrl4in/harness/encoding.hpp"
#include "hrl4in/ppo/ppo.hpp"

namespace hrl4in::harness {

using Net = ppo::ActorCritic<float>;

struct TrainerOptions {
  std::shared_ptr<const env::GridLayout> layout;
  int num_envs = 8;
  int rollout_steps = 256;
  ppo::PpoConfig ppo;  // lr is used by the flat trainer; HRL overrides per level
  hrl::HrlConfig hrl;
  // Net shape knobs; observation/action dims are filled in by the trainer.
  std::vector<int> conv_channels{32, 64, 64};
  int conv_kernel = 3;
  int conv_fc = 128;
  int vec_fc = 64;
  int hidden = 512;
  uint64_t seed = 1;
};

// Per-cycle training metrics (one record per PPO update cycle).
struct CycleMetrics {
  int update = 0;
  long long env_steps = 0;  // cumulative
  int episodes = 0;         // completed this cycle
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_energy = 0.0;
  std::array<double, hrl::kNumEmbodiments> embodiment_fractions = {0.0, 0.0, 0.0};
  ppo::UpdateStats ll_stats;  // the only stats for the flat trainer
  ppo::UpdateStats hl_stats;
  bool hl_updated = false;
  int hl_decisions = 0;
  int hl_max_segment_steps = 0;  // longest stretch governed by one HL decision
  int hl_achieved = 0;
  int hl_timeouts = 0;
};

class FlatTrainer {
 public:
  explicit FlatTrainer(TrainerOptions opt);

  CycleMetrics run_update_cycle();
  int update_index() const { return update_; }
  Net& policy() { return *net_; }
  const TrainerOptions& options() const { return opt_; }

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  struct Slot {
    env::EnvState state;
    env::Observation obs;
    nn::Tensor<float> hidden;
    double ep_reward = 0.0;
    double ep_energy = 0.0;
    long long episode_index = 0;
  };

  void reset_env(int e);

  TrainerOptions opt_;
  std::unique_ptr<Net> net_;
  std::unique_ptr<nn::Adam<float>> adam_;
  std::vector<Slot> slots_;
  std::mt19937_64 act_rng_, ppo_rng_;
  int update_ = 0;
  long long env_steps_ = 0;
};

class HrlTrainer {
 public:
  explicit HrlTrainer(TrainerOptions opt);

  CycleMetrics run_update_cycle();
  int update_index() const { return update_; }
  Net& hl() { return *hl_; }
  Net& ll() { return *ll_; }
  const TrainerOptions& options() const { return opt_; }

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  struct Slot {
    env::EnvState state;
    env::Observation obs;
    nn::Tensor<float> hl_hidden, ll_hidden;
    hrl::SubgoalTracker tracker;
    bool needs_decision = true;
    bool has_pending_hl = false;
    ppo::StepRecord<float> pending_hl;
    double ep_reward = 0.0;
    double ep_energy = 0.0;
    long long episode_index = 0;
  };

  void reset_env(int e);
  // Sample a new HL action for slot e; opens a pending HL record.
  void decide(int e, CycleMetrics& m);
  // Finish the pending HL record (env_done marks an episode boundary).
  void close_pending(int e, bool env_done, CycleMetrics& m);
  double hl_value(int e);  // value-only HL forward at the current obs

  TrainerOptions opt_;
  std::unique_ptr<Net> hl_, ll_;
  std::unique_ptr<nn::Adam<float>> hl_adam_, ll_adam_;
  std::vector<Slot> slots_;
  ppo::RolloutBuffer<float> hl_buf_, ll_buf_;
  ppo::PpoConfig hl_cfg_, ll_cfg_;
  ppo::RewardNormalizer ll_rnorm_;
  std::mt19937_64 act_rng_, hl_ppo_rng_, ll_ppo_rng_;
  int update_ = 0;
  long long env_steps_ = 0;
};

}  // namespace hrl4in::harness
