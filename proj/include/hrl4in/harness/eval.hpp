#pragma once

#include "hrl4in/harness/trainers.hpp"

namespace hrl4in::harness {

struct EvalEpisode {
  bool success = false;
  int length = 0;
  double reward = 0.0;
  double energy = 0.0;
  int optimal = 0;          // oracle steps from the actual start pose
  double length_ratio = 0;  // length / optimal
};

// One HL decision during evaluation: where the agent stood and what it chose.
struct HlDecision {
  Vec2i pos;
  hrl::Embodiment embodiment = hrl::Embodiment::BaseArm;
};

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_reward = 0.0;
  double mean_energy = 0.0;
  double mean_length_ratio = 0.0;
  std::array<double, hrl::kNumEmbodiments> embodiment_fractions = {0.0, 0.0, 0.0};
  std::vector<EvalEpisode> per_episode;
  std::vector<HlDecision> hl_decisions;  // empty for non-hierarchical policies
};

// Greedy (deterministic=true, distribution mode) or stochastic rollouts of a
// flat policy; episode starts are seeded from `seed`.
EvalReport evaluate_flat(Net& policy, std::shared_ptr<const env::GridLayout> layout,
                         int n_episodes, uint64_t seed, bool deterministic = true);

EvalReport evaluate_hrl(Net& hl, Net& ll, const hrl::HrlConfig& cfg,
                        std::shared_ptr<const env::GridLayout> layout, int n_episodes,
                        uint64_t seed, bool deterministic = true);

// Oracle-driven agent (BFS shortest-path actions); reference for the eval
// pipeline: success 100%, length ratio exactly 1.
EvalReport evaluate_scripted_oracle(std::shared_ptr<const env::GridLayout> layout,
                                    int n_episodes, uint64_t seed);

// Uniform-random actions; sparse-goal baseline.
EvalReport evaluate_random(std::shared_ptr<const env::GridLayout> layout, int n_episodes,
                           uint64_t seed);

}  // namespace hrl4in::harness
