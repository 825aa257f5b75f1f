#pragma once

#include <cmath>
#include <cstdlib>

#include "hrl4in/env/toyenv.hpp"

namespace hrl4in::hrl {

using env::MutableObs;

enum class Embodiment : int { BaseOnly = 0, ArmOnly = 1, BaseArm = 2 };
inline constexpr int kNumEmbodiments = 3;

// Gates derived from the embodiment choice: which subsystems the low level may
// actuate, and which mutable-observation dimensions enter the subgoal distance.
struct Masks {
  bool nav_enabled = true;
  bool manip_enabled = true;
  std::array<int, 4> subgoal = {1, 1, 1, 1};  // (x, y, yaw, door)
  friend bool operator==(const Masks&, const Masks&) = default;
};

inline Masks get_masks(Embodiment e) {
  switch (e) {
    case Embodiment::BaseOnly:
      return {true, false, {1, 1, 1, 0}};
    case Embodiment::ArmOnly:
      return {false, true, {0, 0, 0, 1}};
    case Embodiment::BaseArm:
      return {true, true, {1, 1, 1, 1}};
  }
  throw UsageError("get_masks: invalid embodiment");
}

// Gated sub-actions become NoOp; the rest pass through.
inline env::ToyAction apply_action_mask(env::ToyAction a, const Masks& m) {
  if (!m.nav_enabled) a.nav = env::NavAction::NoOp;
  if (!m.manip_enabled) a.manip = env::ManipAction::NoOp;
  return a;
}

// Shortest signed residue of a yaw-index difference, in [-2, 2] (|r| <= 2).
inline int yaw_residue(int delta) {
  int r = delta % 4;
  if (r > 2) r -= 4;
  if (r < -2) r += 4;
  return r;
}

// Masked Euclidean distance between the current mutable observation and an
// absolute 4-dim target; the yaw dimension is measured on the cyclic residue.
inline double subgoal_distance(const MutableObs& x, const std::array<int, 4>& target,
                               const std::array<int, 4>& subgoal_mask) {
  double sq = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (!subgoal_mask[i]) continue;
    int d = (i == 2) ? yaw_residue(x[i] - target[i]) : x[i] - target[i];
    sq += static_cast<double>(d) * d;
  }
  return std::sqrt(sq);
}

inline double intrinsic_reward(double d_t, double d_next, double scale) {
  return scale * (d_t - d_next);
}

// Current-relative subgoal for LL conditioning: target - x_t, yaw on residue.
inline std::array<int, 4> retarget_subgoal(const std::array<int, 4>& absolute_target,
                                           const MutableObs& x) {
  std::array<int, 4> g;
  for (int i = 0; i < 4; ++i) {
    int d = absolute_target[i] - x[i];
    g[i] = (i == 2) ? yaw_residue(d) : d;
  }
  return g;
}

enum class SubgoalSpace { Discrete, Continuous };

inline bool subgoal_achieved(double d, SubgoalSpace space = SubgoalSpace::Discrete,
                             double t_sg = 0.0) {
  return space == SubgoalSpace::Discrete ? d == 0.0 : d <= t_sg;
}

inline int round_half_away(double v) {
  return static_cast<int>(v < 0 ? std::ceil(v - 0.5) : std::floor(v + 0.5));
}

// Per-dimension subgoal bounds: |dx|,|dy| <= k-1, |dyaw| <= 2,
// |ddoor| <= door_max-1.
inline std::array<int, 4> subgoal_bounds(int k, int door_max) {
  return {k - 1, k - 1, 2, door_max - 1};
}

struct HighLevelAction {
  std::array<int, 4> subgoal = {0, 0, 0, 0};  // relative, integral
  Embodiment embodiment = Embodiment::BaseArm;
};

// Round the continuous Gaussian sample and clamp each dimension.
inline std::array<int, 4> quantize_subgoal(const std::array<double, 4>& sample,
                                           const std::array<int, 4>& bounds) {
  std::array<int, 4> g;
  for (int i = 0; i < 4; ++i)
    g[i] = std::clamp(round_half_away(sample[i]), -bounds[i], bounds[i]);
  return g;
}

struct HrlConfig {
  int T = 4;
  double intrinsic_reward_scale = 30.0;
  int hl_freeze_updates = 500;
  double hl_lr = 1e-5;
  double ll_lr = 1e-4;
  double gamma_hl = 0.99;
  double gamma_ll = 0.99;
  std::array<double, 4> subgoal_init_std = {0.2, 0.2, 0.5, 0.5};
  std::array<double, 4> subgoal_min_std = {0.1, 0.1, 0.25, 0.25};
  bool no_embodiment_selector = false;  // ablation: force BaseArm
  // Divide LL rewards by the running std of the LL discounted return before
  // storage. The large intrinsic scale otherwise makes value-loss gradients
  // dominate the global gradient-norm clip and starve the policy gradient.
  bool ll_reward_normalization = true;
  // Init gain of the HL subgoal mean layer. Subgoal samples are rounded to
  // integers, so with a near-zero initial mean the frozen HL would request a
  // zero base displacement in every state and the LL could never practice
  // (nor the HL later command) base movement. A larger gain spreads the
  // initial means so small nonzero subgoals occur from the start.
  double hl_subgoal_mean_gain = 1.0;
};

// Pending-subgoal bookkeeping between two HL decisions.
struct SubgoalTracker {
  bool active = false;
  std::array<int, 4> target = {0, 0, 0, 0};  // absolute
  Masks masks;
  Embodiment embodiment = Embodiment::BaseArm;
  int steps_used = 0;
  double extrinsic_sum = 0.0;  // env reward accumulated since the HL decision
};

}  // namespace hrl4in::hrl
