#pragma once

#include <vector>

#include "hrl4in/hrl/subgoal.hpp"

namespace hrl4in::harness {

// Affine map of [lo, hi] onto [-1, 1] and its exact inverse.
inline double normalize_range(double v, double lo, double hi) {
  if (hi <= lo) throw UsageError("normalize_range: empty range");
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}
inline double denormalize_range(double n, double lo, double hi) {
  if (hi <= lo) throw UsageError("denormalize_range: empty range");
  return lo + (n + 1.0) * 0.5 * (hi - lo);
}

// Map channels are produced in [0,1]; the network sees [-1,1].
template <typename T>
std::vector<T> encode_map(const env::Observation& obs) {
  std::vector<T> out(obs.global_map.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<T>(2.0 * obs.global_map[i] - 1.0);
  return out;
}

// Non-spatial observation, each field normalized to [-1,1]:
// x, y, cos_yaw, sin_yaw, door, goal_x, goal_y, next_to_door.
inline constexpr int kFlatVecDim = 8;

template <typename T>
std::vector<T> encode_flat_vec(const env::Observation& obs, const env::GridLayout& layout) {
  double hi = layout.k - 1;
  std::vector<T> out;
  out.reserve(kFlatVecDim);
  out.push_back(static_cast<T>(normalize_range(obs.agent_position.x, 0, hi)));
  out.push_back(static_cast<T>(normalize_range(obs.agent_position.y, 0, hi)));
  out.push_back(static_cast<T>(obs.cos_yaw));
  out.push_back(static_cast<T>(obs.sin_yaw));
  out.push_back(static_cast<T>(
      layout.door_max > 1 ? normalize_range(obs.door_state, 1, layout.door_max) : 0.0));
  out.push_back(static_cast<T>(normalize_range(obs.goal_position.x, 0, hi)));
  out.push_back(static_cast<T>(normalize_range(obs.goal_position.y, 0, hi)));
  out.push_back(static_cast<T>(obs.next_to_door ? 1.0 : -1.0));
  return out;
}

// LL conditioning appended to the flat vector: the current-relative subgoal
// (per dimension, its sign and its bound-normalized magnitude), the subgoal
// mask, and a one-hot embodiment code. The sign channel keeps "no displacement
// wanted" and "one cell wanted" a full input-range apart; with magnitudes
// alone the two differ by only 1/bound and the network conflates them.
inline constexpr int kLlExtraDim = 4 + 4 + 4 + hrl::kNumEmbodiments;

template <typename T>
std::vector<T> encode_ll_vec(const env::Observation& obs, const env::GridLayout& layout,
                             const std::array<int, 4>& relative_subgoal,
                             const hrl::Masks& masks, hrl::Embodiment e) {
  std::vector<T> out = encode_flat_vec<T>(obs, layout);
  auto bounds = hrl::subgoal_bounds(layout.k, layout.door_max);
  for (int i = 0; i < 4; ++i) {
    int r = relative_subgoal[i];
    out.push_back(static_cast<T>(r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0)));
    double b = std::max(1, bounds[i]);
    out.push_back(static_cast<T>(r / b));
  }
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<T>(masks.subgoal[i] ? 1.0 : -1.0));
  for (int i = 0; i < hrl::kNumEmbodiments; ++i)
    out.push_back(static_cast<T>(static_cast<int>(e) == i ? 1.0 : -1.0));
  return out;
}

}  // namespace hrl4in::harness
